#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "penning/crystal.hpp"
#include "penning/model.hpp"

// Exact dissipative Ising dynamics from the all-spins-along-+x product state.
//
// Conventions: sigma^+ = |up><down|, H = (1/N) sum_{i<j} J_ij sigma^z_i sigma^z_j,
// expectation values are Tr(rho O) at time params.tau. Jump operators are
// sigma^- at Gamma_ud, sigma^+ at Gamma_du and sigma^z at Gamma_el / 4.

namespace penning {

using cplx = std::complex<double>;

cplx phi(double j, double t, const SpinEnsembleParams& params);
cplx psi(double j, double t, const SpinEnsembleParams& params);

// z^k through exp(k log z), with 0^k = 0 for k > 0 and z^0 = 1.
cplx guarded_pow(cplx z, double k);

// Copy of params with a different interaction time.
SpinEnsembleParams at_time(SpinEnsembleParams params, double tau);

// <sigma^+_(n+) sigma^-_(n-) sigma^z_(nz)> on distinct spins, uniform coupling,
// at t = params.tau.
cplx correlator_uniform(std::size_t n_plus, std::size_t n_minus, std::size_t n_z, const SpinEnsembleParams& params);

// Uniform-coupling one- and two-spin correlators. The remaining combinations
// follow by conjugation and are exposed as accessors.
struct CorrelatorSet {
  cplx s_plus;       // <sigma^+>
  cplx s_z;          // <sigma^z>
  cplx plus_plus;    // <sigma^+ sigma^+>
  cplx plus_minus;   // <sigma^+ sigma^->
  cplx plus_z;       // <sigma^+ sigma^z>
  cplx z_z;          // <sigma^z sigma^z>
  double time = 0.0;

  [[nodiscard]] cplx s_minus() const { return std::conj(s_plus); }
  [[nodiscard]] cplx minus_minus() const { return std::conj(plus_plus); }
  [[nodiscard]] cplx minus_plus() const { return std::conj(plus_minus); }
  [[nodiscard]] cplx minus_z() const { return std::conj(plus_z); }
};

CorrelatorSet correlators_uniform(const SpinEnsembleParams& params);

// General (site-resolved) couplings. Matrices are indexed (j, k) with j the
// site carrying the first operator; diagonals are unused.
struct GeneralCorrelators {
  std::vector<cplx> s_plus;   // <sigma^+_j>
  cplx s_z;                   // <sigma^z_j>, site independent
  Eigen::MatrixXcd plus_plus;   // <sigma^+_j sigma^+_k>
  Eigen::MatrixXcd plus_minus;  // <sigma^+_j sigma^-_k>
  Eigen::MatrixXcd plus_z;      // <sigma^+_j sigma^z_k>
  cplx z_z;                     // <sigma^z_j sigma^z_k>, site independent
  double time = 0.0;

  [[nodiscard]] std::size_t size() const { return s_plus.size(); }
};

// Uses J_jk from the matrix; params.j_bar is ignored.
GeneralCorrelators correlators_general(const CouplingMatrix& j, const SpinEnsembleParams& params);

// Collective spin moments <S_dir>, Var(S_dir) with S_dir = (1/2) sum_i sigma^dir_i.
// bfield_variance applies the homogeneous-field dephasing factor exp(-d^2 v / 2)
// to correlators with d = n+ - n-.
struct SpinMoments {
  double mean = 0.0;
  double variance = 0.0;
};
SpinMoments spin_moments(const CorrelatorSet& c, std::size_t n_ions, const MeasurementDirection& dir,
                         double bfield_variance = 0.0);
SpinMoments spin_moments(const GeneralCorrelators& c, const MeasurementDirection& dir);

// |<S>| = N |<sigma^+>|.
double contrast(const SpinEnsembleParams& params);
double contrast(const GeneralCorrelators& c);
// exp(-Gamma tau) (N/2) cos(2 J tau / N)^(N-1).
double contrast_closed_form(const SpinEnsembleParams& params);

double transverse_variance(const SpinEnsembleParams& params, double psi_angle, double bfield_variance = 0.0);

struct SqueezingResult {
  double xi_r_squared = 0.0;
  double psi_min = 0.0;       // rad, in [0, pi)
  double variance_min = 0.0;
  double contrast = 0.0;
};

// Minimizes a pi-periodic function of psi on [0, pi): 1 degree grid then
// golden-section refinement to 1e-4 rad.
template <class F>
std::pair<double, double> minimize_over_psi(F&& f);

SqueezingResult squeezing_parameter(const SpinEnsembleParams& params, double bfield_variance = 0.0);

struct OptimalSqueezing {
  double xi_r_squared = 0.0;
  double tau = 0.0;
  double psi_min = 0.0;
};
// Minimum of xi_R^2 over interaction time, with the rates and coupling of params.
OptimalSqueezing optimal_squeezing(const SpinEnsembleParams& params);

// B_j = (2/N) sum_{i != j} J_ij <sigma^z_i>.
std::vector<double> mean_field_field(const CouplingMatrix& j, std::span<const double> sz_expectations);

}  // namespace penning

#include "penning/detail/psi_minimizer.hpp"
