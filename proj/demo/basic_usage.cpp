// Draw a sample, fit it back, and print a few distributional quantities.
#include <cstdio>

#include "smptw/distribution.hpp"
#include "smptw/inference.hpp"
#include "smptw/sampler.hpp"

int main() {
  const smptw::SmptwParams p(1.5, 2.0);

  std::printf("median %.6f  mode %.6f\n", smptw::median(p), smptw::mode(p));
  const auto mv = smptw::mean_variance(p);
  std::printf("mean %.6f  variance %.6f\n", mv.mean, mv.variance);
  std::printf("hazard(1) %.6f  mrl(1) %.6f\n", smptw::hazard(p, 1.0), smptw::mean_residual_life(p, 1.0));

  const auto data = smptw::sample(p, 500, smptw::SeededStream(42, 0));
  const auto fit = smptw::fit_mle(data);
  for (std::size_t i = 0; i < fit.estimates.size(); ++i) {
    const auto ci = smptw::wald_interval(fit, i, 0.95);
    std::printf("%-6s %.4f  (%.4f, %.4f)\n", fit.param_names[i].c_str(), fit.estimates[i], ci.lower, ci.upper);
  }
  return 0;
}
