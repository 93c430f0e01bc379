#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "penning/counting.hpp"
#include "penning/crystal.hpp"
#include "penning/dynamics.hpp"
#include "penning/model.hpp"

// Brute-force reference engines for small N: dense Lindblad propagation of the
// full density matrix, projective readout, and seeded Monte Carlo sampling.
//
// Basis state index a has bit j set when spin j is up (sigma^z_j = +1).

namespace penning {

inline constexpr std::size_t max_oracle_ions = 8;

struct DensityOperator {
  std::size_t n_ions = 0;
  Eigen::MatrixXcd rho;

  [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(rho.rows()); }
  // Throws InvariantError unless trace = 1 and Hermiticity hold to 1e-10 and
  // the smallest eigenvalue exceeds -1e-8.
  void check_invariants() const;
  [[nodiscard]] double purity() const;
};

// Product state with every spin along +x.
DensityOperator x_polarized_state(std::size_t n_ions);

struct OracleOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  bool check_invariants = true;
};

// Evolves the +x product state to each requested time (ascending, >= 0) under
// H = (1/N) sum_{i<j} J_ij sz_i sz_j with sigma^- at Gamma_ud, sigma^+ at
// Gamma_du and sigma^z at Gamma_el / 4 on every site. params.tau is unused.
std::vector<DensityOperator> lindblad_trajectory(const CouplingMatrix& j, const SpinEnsembleParams& params,
                                                 const std::vector<double>& times, const OracleOptions& options = {});
DensityOperator lindblad_propagate(const CouplingMatrix& j, const SpinEnsembleParams& params, double t,
                                   const OracleOptions& options = {});
// Uniform coupling params.j_bar, evolved to params.tau.
DensityOperator lindblad_propagate(const SpinEnsembleParams& params, const OracleOptions& options = {});

// Tr(rho O) for O a product of single-site operators on distinct sites.
enum class SiteOp { plus, minus, z };
struct SiteOperator {
  std::size_t site = 0;
  SiteOp op = SiteOp::z;
};
cplx oracle_expectation(const DensityOperator& rho, const std::vector<SiteOperator>& ops);

// (1/2) sum_i sigma^dir_i as a dense matrix.
Eigen::MatrixXcd collective_operator(std::size_t n_ions, const MeasurementDirection& dir);
SpinMoments oracle_spin_moments(const DensityOperator& rho, const MeasurementDirection& dir);

// P(n) = Tr(Pi_n rho), with n spins along +dir.
CountingDistribution oracle_counting(const DensityOperator& rho, const MeasurementDirection& dir);
// Tr(rho prod_j (cos q + i sin q sigma^dir_j)).
cplx oracle_characteristic(const DensityOperator& rho, const MeasurementDirection& dir, double q);

// exp(i theta S_y) rho exp(-i theta S_y), so that measuring the result along
// (0, sin psi, cos psi) equals measuring rho along rotated_tomography(psi, theta).
DensityOperator rotate_about_y(const DensityOperator& rho, double theta);

// Histogram of `trials` draws over n = 0..N; uses the discrete probabilities.
// Deterministic in (seed, stream); distinct streams give independent draws.
std::vector<std::uint64_t> sample_distribution(const CountingDistribution& dist, std::uint64_t trials,
                                               std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace penning
