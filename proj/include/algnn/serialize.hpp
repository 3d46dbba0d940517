#pragma once

#include <string>
#include <vector>

#include "algnn/tensor.hpp"

namespace algnn {

/// Checkpoint container: 8-byte magic "ALGNNCKP", u32 version, model algebra
/// (u32 tag + u32 param), embedded config text, then a layer manifest
/// (name, per-entry algebra, shape) followed by the raw little-endian f64
/// component arrays in manifest order.
struct CheckpointEntry {
  std::string name;
  AlgebraTensor tensor;
};

struct Checkpoint {
  AlgebraId algebra;
  std::string config_text;
  std::vector<CheckpointEntry> entries;

  const AlgebraTensor* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
/// Throws std::runtime_error with a versioned message on corrupt input.
Checkpoint load_checkpoint(const std::string& path);

/// Mask container: 8-byte magic "ALGNNMSK", u32 version, u8 mode
/// (0 tuple-granular, 1 component-granular), manifest (name, unit count,
/// frozen flag), then bit-packed masks, LSB-first, bit 1 = pruned.
struct MaskEntry {
  std::string name;
  bool frozen = false;
  std::vector<char> pruned;  // one flag per tuple (or component)
};

struct MaskFile {
  bool component_mode = false;
  std::vector<MaskEntry> entries;

  const MaskEntry* find(const std::string& name) const;
};

void save_mask(const MaskFile& mask, const std::string& path);
MaskFile load_mask(const std::string& path);

}  // namespace algnn
