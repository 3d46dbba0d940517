#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "algnn/tape.hpp"

namespace algnn {

/// A differentiable scalar loss over a set of parameters. `build` must be a
/// pure function of the parameter values (fixed inputs captured in the
/// closure; any internal randomness fixed).
struct FragmentSpec {
  std::function<ValueId(Tape&, const std::vector<ValueId>&)> build;
  std::vector<AlgebraTensor> params;
};

struct GradCheckOptions {
  double step = 1e-6;
  /// A sampled point closer than this to a relu input or gate-mean kink is
  /// rejected so central differences stay valid.
  double kink_threshold = 1e-4;
  int max_resamples = 10;
};

/// Max over parameter components of
///   |analytic - central_difference| / max(1, |central_difference|),
/// central differences with the requested step in 64-bit arithmetic.
/// Returns nullopt when the point fails the kink exclusion. Throws
/// std::runtime_error naming the first offending node when the forward pass
/// produces non-finite values.
std::optional<double> grad_check_once(const FragmentSpec& spec,
                                      const GradCheckOptions& opts = {});

/// Draws fragments from `make` (seeded) until a sample passes the kink
/// exclusion, then runs the check. Throws after max_resamples rejections.
double grad_check(const std::function<FragmentSpec(Rng&)>& make,
                  std::uint64_t seed, const GradCheckOptions& opts = {});

}  // namespace algnn
