#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "penning/model.hpp"

// Analytic-versus-oracle comparison for one parameter draw.

namespace penning {

struct OracleComparison {
  double correlators = 0.0;  // max abs error over one- and two-spin correlators
  double contrast = 0.0;
  double moments = 0.0;      // max abs error over means and variances
  double counting = 0.0;     // max abs probability error

  [[nodiscard]] double max() const;
};

// Draws J_bar in [-2e4, 2e4] rad/s, each rate in [0, 300] 1/s and tau in [0, 3 ms].
SpinEnsembleParams random_oracle_params(std::size_t n_ions, std::mt19937_64& rng);

// Compares at params.tau along the given directions (tomography angles and a
// general direction are typical).
OracleComparison compare_with_oracle(const SpinEnsembleParams& params, const std::vector<MeasurementDirection>& dirs);

}  // namespace penning
