#include "algnn/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace algnn {

namespace {

constexpr char kCkptMagic[8] = {'A', 'L', 'G', 'N', 'N', 'C', 'K', 'P'};
constexpr char kMaskMagic[8] = {'A', 'L', 'G', 'N', 'N', 'M', 'S', 'K'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "serializers assume a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

struct Reader {
  std::ifstream in;
  std::string path;

  void fail(const std::string& what) {
    throw std::runtime_error(path + ": " + what + " (format v" +
                             std::to_string(kVersion) + ")");
  }

  void raw(void* dst, std::size_t n, const char* what) {
    if (!in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n)))
      fail(std::string("truncated ") + what);
  }

  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    raw(&v, sizeof v, what);
    return v;
  }

  std::uint64_t u64(const char* what) {
    std::uint64_t v;
    raw(&v, sizeof v, what);
    return v;
  }

  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    if (n > (1u << 20)) fail(std::string("oversized ") + what);
    std::string s(n, '\0');
    raw(s.data(), n, what);
    return s;
  }
};

AlgebraId algebra_from_wire(std::uint32_t tag, std::uint32_t param,
                            Reader& reader) {
  if (tag > static_cast<std::uint32_t>(AlgebraTag::kDiagonal))
    reader.fail("unknown algebra tag");
  const auto t = static_cast<AlgebraTag>(tag);
  if (t == AlgebraTag::kDiagonal) return AlgebraId::diagonal(static_cast<int>(param));
  for (const AlgebraId& a : all_algebras())
    if (a.tag() == t) return a;
  reader.fail("unknown algebra tag");
  return AlgebraId::real();
}

void put_algebra(std::ostream& out, const AlgebraId& a) {
  put_u32(out, static_cast<std::uint32_t>(a.tag()));
  put_u32(out, static_cast<std::uint32_t>(a.param()));
}

}  // namespace

const AlgebraTensor* Checkpoint::find(const std::string& name) const {
  for (const CheckpointEntry& e : entries)
    if (e.name == name) return &e.tensor;
  return nullptr;
}

const MaskEntry* MaskFile::find(const std::string& name) const {
  for (const MaskEntry& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kCkptMagic, sizeof kCkptMagic);
  put_u32(out, kVersion);
  put_algebra(out, ckpt.algebra);
  put_string(out, ckpt.config_text);
  put_u32(out, static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const CheckpointEntry& e : ckpt.entries) {
    put_string(out, e.name);
    put_algebra(out, e.tensor.algebra());
    put_u32(out, static_cast<std::uint32_t>(e.tensor.rank()));
    for (std::size_t d = 0; d < e.tensor.rank(); ++d)
      put_u64(out, e.tensor.extent(d));
  }
  for (const CheckpointEntry& e : ckpt.entries)
    out.write(reinterpret_cast<const char*>(e.tensor.data()),
              static_cast<std::streamsize>(e.tensor.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader reader{std::ifstream(path, std::ios::binary), path};
  if (!reader.in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  reader.raw(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kCkptMagic, sizeof magic) != 0)
    reader.fail("bad checkpoint magic");
  const std::uint32_t version = reader.u32("version");
  if (version != kVersion)
    reader.fail("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  {
    const std::uint32_t tag = reader.u32("algebra tag");
    const std::uint32_t param = reader.u32("algebra param");
    ckpt.algebra = algebra_from_wire(tag, param, reader);
  }
  ckpt.config_text = reader.str("config");
  const std::uint32_t count = reader.u32("entry count");
  struct Pending {
    std::string name;
    AlgebraId algebra;
    std::vector<std::size_t> shape;
  };
  std::vector<Pending> manifest;
  for (std::uint32_t i = 0; i < count; ++i) {
    Pending p;
    p.name = reader.str("entry name");
    const std::uint32_t tag = reader.u32("entry algebra tag");
    const std::uint32_t param = reader.u32("entry algebra param");
    p.algebra = algebra_from_wire(tag, param, reader);
    const std::uint32_t rank = reader.u32("entry rank");
    if (rank > 8) reader.fail("entry rank too large");
    for (std::uint32_t d = 0; d < rank; ++d)
      p.shape.push_back(static_cast<std::size_t>(reader.u64("entry dim")));
    manifest.push_back(std::move(p));
  }
  for (Pending& p : manifest) {
    AlgebraTensor t(p.algebra, p.shape);
    reader.raw(t.data(), t.size() * sizeof(double), "tensor data");
    ckpt.entries.push_back({std::move(p.name), std::move(t)});
  }
  return ckpt;
}

void save_mask(const MaskFile& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kMaskMagic, sizeof kMaskMagic);
  put_u32(out, kVersion);
  const char mode = mask.component_mode ? 1 : 0;
  out.write(&mode, 1);
  put_u32(out, static_cast<std::uint32_t>(mask.entries.size()));
  for (const MaskEntry& e : mask.entries) {
    put_string(out, e.name);
    put_u64(out, e.pruned.size());
    const char frozen = e.frozen ? 1 : 0;
    out.write(&frozen, 1);
  }
  for (const MaskEntry& e : mask.entries) {
    std::vector<unsigned char> packed((e.pruned.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < e.pruned.size(); ++i)
      if (e.pruned[i]) packed[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

MaskFile load_mask(const std::string& path) {
  Reader reader{std::ifstream(path, std::ios::binary), path};
  if (!reader.in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  reader.raw(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kMaskMagic, sizeof magic) != 0)
    reader.fail("bad mask magic");
  const std::uint32_t version = reader.u32("version");
  if (version != kVersion)
    reader.fail("unsupported mask version " + std::to_string(version));
  MaskFile mask;
  char mode;
  reader.raw(&mode, 1, "mode");
  mask.component_mode = mode != 0;
  const std::uint32_t count = reader.u32("entry count");
  std::vector<std::uint64_t> sizes;
  for (std::uint32_t i = 0; i < count; ++i) {
    MaskEntry e;
    e.name = reader.str("entry name");
    sizes.push_back(reader.u64("unit count"));
    char frozen;
    reader.raw(&frozen, 1, "frozen flag");
    e.frozen = frozen != 0;
    mask.entries.push_back(std::move(e));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    std::vector<unsigned char> packed((sizes[i] + 7) / 8);
    reader.raw(packed.data(), packed.size(), "mask bits");
    mask.entries[i].pruned.resize(sizes[i]);
    for (std::uint64_t b = 0; b < sizes[i]; ++b)
      mask.entries[i].pruned[b] = (packed[b / 8] >> (b % 8)) & 1;
  }
  return mask;
}

}  // namespace algnn
