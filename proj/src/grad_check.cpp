#include "algnn/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace algnn {

namespace {

double eval_loss(const FragmentSpec& spec,
                 const std::vector<AlgebraTensor>& params) {
  Tape tape;
  std::vector<ValueId> ids;
  ids.reserve(params.size());
  for (const AlgebraTensor& p : params) ids.push_back(tape.input(p));
  const ValueId loss = spec.build(tape, ids);
  return tape.value(loss).values()[0];
}

}  // namespace

std::optional<double> grad_check_once(const FragmentSpec& spec,
                                      const GradCheckOptions& opts) {
  Tape tape;
  std::vector<ValueId> ids;
  ids.reserve(spec.params.size());
  for (const AlgebraTensor& p : spec.params) ids.push_back(tape.param(p));
  const ValueId loss = spec.build(tape, ids);

  if (auto bad = tape.first_nonfinite())
    throw std::runtime_error("grad_check: non-finite value at node " +
                             bad->second);
  if (tape.min_kink_distance() < opts.kink_threshold) return std::nullopt;

  tape.backward(loss);
  const GradientBundle analytic = collect_grads(tape, ids);

  std::vector<AlgebraTensor> work = spec.params;
  double worst = 0.0;
  for (std::size_t p = 0; p < work.size(); ++p) {
    for (std::size_t c = 0; c < work[p].size(); ++c) {
      const double saved = work[p].values()[c];
      const double hi = saved + opts.step;
      const double lo = saved - opts.step;
      work[p].values()[c] = hi;
      const double loss_hi = eval_loss(spec, work);
      work[p].values()[c] = lo;
      const double loss_lo = eval_loss(spec, work);
      work[p].values()[c] = saved;
      // Divide by the realized spread; exact for representable perturbations.
      const double fd = (loss_hi - loss_lo) / (hi - lo);
      const double analytic_g = analytic.grads[p].values()[c];
      const double err = std::abs(analytic_g - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

double grad_check(const std::function<FragmentSpec(Rng&)>& make,
                  std::uint64_t seed, const GradCheckOptions& opts) {
  for (int attempt = 0; attempt < opts.max_resamples; ++attempt) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * attempt);
    const FragmentSpec spec = make(rng);
    if (auto err = grad_check_once(spec, opts)) return *err;
  }
  throw std::runtime_error(
      "grad_check: no kink-free sample within resample budget");
}

}  // namespace algnn
