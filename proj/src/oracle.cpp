#include "penning/oracle.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <random>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "penning/errors.hpp"

namespace penning {

namespace {

using State = std::vector<cplx>;
constexpr cplx I{0.0, 1.0};

void require_oracle_size(std::size_t n) {
  if (n == 0) throw ConfigError("oracle needs at least one ion");
  if (n > max_oracle_ions) {
    throw ConfigError("oracle supports at most " + std::to_string(max_oracle_ions) + " ions, got " + std::to_string(n));
  }
}

bool bit(std::size_t a, std::size_t j) { return ((a >> j) & 1U) != 0; }

// Lindblad right-hand side on rho stored column-major, rho(a, b) = x[a + D b].
class LindbladRhs {
 public:
  LindbladRhs(const CouplingMatrix& j, const SpinEnsembleParams& params)
      : n_(j.size()), dim_(std::size_t{1} << n_), energy_(dim_, 0.0), params_(params) {
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t a = 0; a < dim_; ++a) {
      double e = 0.0;
      for (std::size_t p = 0; p < n_; ++p) {
        for (std::size_t q = p + 1; q < n_; ++q) {
          const double sp = bit(a, p) ? 1.0 : -1.0;
          const double sq = bit(a, q) ? 1.0 : -1.0;
          e += j.j(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) * sp * sq;
        }
      }
      energy_[a] = e * inv_n;
    }
  }

  void operator()(const State& x, State& dxdt, double /*t*/) const {
    const double g_el = 0.25 * params_.gamma_el;
    const double g_ud = params_.gamma_ud;
    const double g_du = params_.gamma_du;
    for (std::size_t b = 0; b < dim_; ++b) {
      for (std::size_t a = 0; a < dim_; ++a) {
        const std::size_t idx = a + dim_ * b;
        const cplx r = x[idx];
        cplx d = -I * (energy_[a] - energy_[b]) * r;
        const std::size_t differ = a ^ b;
        d += -2.0 * g_el * static_cast<double>(std::popcount(differ)) * r;
        const double up = static_cast<double>(std::popcount(a) + std::popcount(b));
        const double down = static_cast<double>(2 * n_) - up;
        d += -0.5 * (g_ud * up + g_du * down) * r;
        // Feed terms: both indices must have site j in the same post-jump state.
        const std::size_t both_down = ~(a | b) & (dim_ - 1);
        const std::size_t both_up = a & b;
        for (std::size_t s = 0; s < n_; ++s) {
          const std::size_t m = std::size_t{1} << s;
          if (g_ud != 0.0 && (both_down & m)) d += g_ud * x[(a | m) + dim_ * (b | m)];
          if (g_du != 0.0 && (both_up & m)) d += g_du * x[(a & ~m) + dim_ * (b & ~m)];
        }
        dxdt[idx] = d;
      }
    }
  }

 private:
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> energy_;
  SpinEnsembleParams params_;
};

DensityOperator from_state(std::size_t n, const State& x) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  DensityOperator out;
  out.n_ions = n;
  out.rho = Eigen::Map<const Eigen::MatrixXcd>(x.data(), dim, dim);
  return out;
}

Eigen::Matrix2cd single_site(const MeasurementDirection& dir) {
  // Basis (down, up): sigma^z = diag(-1, 1), sigma^+ = |up><down|.
  Eigen::Matrix2cd m;
  m << cplx{-dir.c_z, 0.0}, cplx{dir.c_x, dir.c_y}, cplx{dir.c_x, -dir.c_y}, cplx{dir.c_z, 0.0};
  return m;
}

Eigen::MatrixXcd kron_power(const Eigen::Matrix2cd& u, std::size_t n) {
  // Site j is bit j, so site 0 is the fastest-varying (rightmost) factor.
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (std::size_t s = 0; s < n; ++s) {
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < 2; ++r) {
      for (Eigen::Index c = 0; c < 2; ++c) next.block(r * out.rows(), c * out.cols(), out.rows(), out.cols()) = u(r, c) * out;
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

void DensityOperator::check_invariants() const {
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > 1e-10) {
    throw InvariantError("density operator trace deviates from 1 by " + std::to_string(std::abs(tr - 1.0)));
  }
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) throw InvariantError("density operator is not Hermitian: " + std::to_string(herm));
  const Eigen::MatrixXcd sym = 0.5 * (rho + rho.adjoint());
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_eig < -1e-8) throw InvariantError("density operator has negative eigenvalue " + std::to_string(min_eig));
}

double DensityOperator::purity() const { return (rho * rho).trace().real(); }

DensityOperator x_polarized_state(std::size_t n_ions) {
  require_oracle_size(n_ions);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_ions);
  DensityOperator out;
  out.n_ions = n_ions;
  out.rho = Eigen::MatrixXcd::Constant(dim, dim, cplx{1.0 / static_cast<double>(dim), 0.0});
  return out;
}

std::vector<DensityOperator> lindblad_trajectory(const CouplingMatrix& j, const SpinEnsembleParams& params,
                                                 const std::vector<double>& times, const OracleOptions& options) {
  const std::size_t n = j.size();
  require_oracle_size(n);
  validate(params);
  double previous = 0.0;
  for (double t : times) {
    if (!(t >= previous) || !std::isfinite(t)) throw ConfigError("oracle times must be finite, >= 0 and ascending");
    previous = t;
  }

  namespace ode = boost::numeric::odeint;
  const LindbladRhs rhs(j, params);
  const DensityOperator initial = x_polarized_state(n);
  State x(initial.rho.data(), initial.rho.data() + initial.rho.size());
  auto stepper = ode::make_controlled(options.abs_tol, options.rel_tol, ode::runge_kutta_dopri5<State>());

  std::vector<DensityOperator> out;
  out.reserve(times.size());
  double t_now = 0.0;
  for (double t : times) {
    if (t > t_now) {
      const double rate = std::abs(params.j_bar) + j.j.cwiseAbs().maxCoeff() + params.gamma_el + params.gamma_ud +
                          params.gamma_du + 1.0;
      const double dt0 = std::min(t - t_now, 1e-2 / rate);
      try {
        ode::integrate_adaptive(stepper, rhs, x, t_now, t, dt0);
      } catch (const std::exception& e) {
        throw DomainError(std::string("oracle integration failed: ") + e.what());
      }
      t_now = t;
    }
    DensityOperator rho = from_state(n, x);
    if (options.check_invariants) rho.check_invariants();
    out.push_back(std::move(rho));
  }
  return out;
}

DensityOperator lindblad_propagate(const CouplingMatrix& j, const SpinEnsembleParams& params, double t,
                                   const OracleOptions& options) {
  return lindblad_trajectory(j, params, {t}, options).front();
}

DensityOperator lindblad_propagate(const SpinEnsembleParams& params, const OracleOptions& options) {
  require_oracle_size(params.n_ions);
  return lindblad_propagate(CouplingMatrix::uniform(params.n_ions, params.j_bar), params, params.tau, options);
}

cplx oracle_expectation(const DensityOperator& rho, const std::vector<SiteOperator>& ops) {
  std::size_t raise = 0;   // sites carrying sigma^+
  std::size_t lower = 0;   // sites carrying sigma^-
  std::size_t zmask = 0;
  for (const auto& o : ops) {
    if (o.site >= rho.n_ions) throw ConfigError("site index out of range");
    const std::size_t m = std::size_t{1} << o.site;
    if ((raise | lower | zmask) & m) throw ConfigError("operators must act on distinct sites");
    if (o.op == SiteOp::plus) raise |= m;
    if (o.op == SiteOp::minus) lower |= m;
    if (o.op == SiteOp::z) zmask |= m;
  }
  // Tr(rho O) = sum_b O_{ab} rho_{ba}; O maps b to a = b with raise bits set and lower bits cleared.
  cplx acc{0.0, 0.0};
  const std::size_t dim = rho.dimension();
  for (std::size_t b = 0; b < dim; ++b) {
    if ((b & raise) != 0 || (b & lower) != lower) continue;
    const std::size_t a = (b | raise) & ~lower;
    const int down_z = std::popcount(zmask & ~b);
    const double sign = (down_z % 2 == 0) ? 1.0 : -1.0;
    acc += sign * rho.rho(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
  }
  return acc;
}

Eigen::MatrixXcd collective_operator(std::size_t n_ions, const MeasurementDirection& dir) {
  require_oracle_size(n_ions);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_ions);
  const Eigen::Matrix2cd s = single_site(dir);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (std::size_t site = 0; site < n_ions; ++site) {
      const auto m = static_cast<Eigen::Index>(std::size_t{1} << site);
      const Eigen::Index ba = bit(static_cast<std::size_t>(a), site) ? 1 : 0;
      // Diagonal part and the flip of this site.
      out(a, a) += 0.5 * s(ba, ba);
      out(a ^ m, a) += 0.5 * s(1 - ba, ba);
    }
  }
  return out;
}

SpinMoments oracle_spin_moments(const DensityOperator& rho, const MeasurementDirection& dir) {
  const Eigen::MatrixXcd s = collective_operator(rho.n_ions, dir);
  const cplx mean = (rho.rho * s).trace();
  const cplx second = (rho.rho * s * s).trace();
  return {mean.real(), second.real() - mean.real() * mean.real()};
}

CountingDistribution oracle_counting(const DensityOperator& rho, const MeasurementDirection& dir) {
  validate(dir);
  // Rows of u are the sigma^dir eigenvectors (eigenvalue -1, +1), so u sigma^dir u^dag = sigma^z.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(single_site(dir));
  const Eigen::Matrix2cd u = eig.eigenvectors().adjoint();
  const Eigen::MatrixXcd big = kron_power(u, rho.n_ions);
  const Eigen::MatrixXcd rotated = big * rho.rho * big.adjoint();
  CountingDistribution out;
  out.n_ions = rho.n_ions;
  out.direction = dir;
  out.probabilities.assign(rho.n_ions + 1, 0.0);
  for (Eigen::Index a = 0; a < rotated.rows(); ++a) {
    out.probabilities[static_cast<std::size_t>(std::popcount(static_cast<std::size_t>(a)))] += rotated(a, a).real();
  }
  return out;
}

cplx oracle_characteristic(const DensityOperator& rho, const MeasurementDirection& dir, double q) {
  const Eigen::Matrix2cd site =
      std::cos(q) * Eigen::Matrix2cd::Identity() + I * std::sin(q) * single_site(dir);
  return (rho.rho * kron_power(site, rho.n_ions)).trace();
}

DensityOperator rotate_about_y(const DensityOperator& rho, double theta) {
  const Eigen::MatrixXcd sy = collective_operator(rho.n_ions, MeasurementDirection{0.0, 1.0, 0.0});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sy);
  const Eigen::VectorXcd phases = (I * theta * eig.eigenvalues().cast<cplx>()).array().exp();
  const Eigen::MatrixXcd r = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
  DensityOperator out;
  out.n_ions = rho.n_ions;
  out.rho = r * rho.rho * r.adjoint();
  return out;
}

std::vector<std::uint64_t> sample_distribution(const CountingDistribution& dist, std::uint64_t trials,
                                               std::uint64_t seed, std::uint64_t stream) {
  if (trials == 0) throw ConfigError("sampling needs at least one trial");
  if (dist.probabilities.empty()) throw ConfigError("cannot sample an empty distribution");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 engine(seq);
  std::discrete_distribution<std::size_t> pick(dist.probabilities.begin(), dist.probabilities.end());
  std::vector<std::uint64_t> counts(dist.probabilities.size(), 0);
  for (std::uint64_t t = 0; t < trials; ++t) ++counts[pick(engine)];
  return counts;
}

}  // namespace penning
