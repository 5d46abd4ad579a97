// One noisy realization of the Green's function problem: GCV against the
// best possible cut-off.

#include <cstdio>

#include "gcv/green.hpp"
#include "gcv/spectral.hpp"
#include "gcv/stochastics.hpp"

int main() {
  const std::size_t m = 256, bandwidth = 8192;
  const gcv::green::GreenModel model(m);
  const auto system = model.system();
  const auto source = gcv::green::sample_source(1.25, bandwidth, 7);
  const gcv::Vector g = gcv::green::exact_collocation_data(source, m);

  gcv::Stream noise(7, {gcv::stream_tag::noise});
  for (double snr : {1e2, 1e4, 1e6}) {
    const double delta = gcv::snr_to_delta(g, snr);
    const auto obs = gcv::project_observations(gcv::add_noise(g, delta, noise), system);
    const std::size_t k = gcv::select_gcv_index(obs);
    const auto projection = gcv::green::project_source(source, model);
    const auto errors = gcv::green::trial_error_profile(
        obs, model, projection, gcv::green::discretization_residual(source, model, projection));
    const std::size_t best = gcv::optimal_index(errors);
    std::printf("snr %8.0e  k_gcv %3zu  k_opt %3zu  rel err %.3e (best %.3e)\n", snr, k, best,
                errors[k] / source.norm(), errors[best] / source.norm());
  }
}
