#include "penning/crystal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "penning/constants.hpp"
#include "penning/errors.hpp"

namespace penning {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::span<const double> as_span(const VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

MatrixXd planar_hessian(const VectorXd& u, double wall_ratio) {
  const Eigen::Index n = u.size() / 2;
  MatrixXd h = MatrixXd::Zero(u.size(), u.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    h(2 * i, 2 * i) += 1.0 + wall_ratio;
    h(2 * i + 1, 2 * i + 1) += 1.0 - wall_ratio;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::Vector2d r(u(2 * i) - u(2 * j), u(2 * i + 1) - u(2 * j + 1));
      const double d2 = r.squaredNorm();
      const double d = std::sqrt(d2);
      const double inv3 = 1.0 / (d2 * d);
      const Eigen::Matrix2d block = 3.0 * inv3 / d2 * (r * r.transpose()) - inv3 * Eigen::Matrix2d::Identity();
      h.block<2, 2>(2 * i, 2 * i) += block;
      h.block<2, 2>(2 * j, 2 * j) += block;
      h.block<2, 2>(2 * i, 2 * j) -= block;
      h.block<2, 2>(2 * j, 2 * i) -= block;
    }
  }
  return h;
}

// Limited-memory BFGS with Armijo backtracking. Stops once the gradient
// max-norm drops below switch_tolerance or the line search stalls.
void lbfgs_descent(VectorXd& u, double& energy, VectorXd& grad, double wall_ratio, double switch_tolerance,
                   int max_iterations, std::vector<double>& trace) {
  constexpr std::size_t history = 12;
  std::deque<VectorXd> s_hist;
  std::deque<VectorXd> y_hist;
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < switch_tolerance) return;

    VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = s_hist[k].dot(q) / y_hist[k].dot(s_hist[k]);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = y_hist[k].dot(q) / y_hist[k].dot(s_hist[k]);
      q += s_hist[k] * (alpha[k] - beta);
    }
    VectorXd dir = -q;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      dir = -grad;
      slope = grad.dot(dir);
    }

    // First step or reset: cap the displacement at 0.1 lattice units.
    double step = 1.0;
    const double max_move = dir.lpNorm<Eigen::Infinity>();
    if (s_hist.empty() && max_move > 0.1) step = 0.1 / max_move;

    VectorXd trial;
    double trial_energy = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = u + step * dir;
      trial_energy = planar_energy(as_span(trial), wall_ratio);
      if (std::isfinite(trial_energy) && trial_energy <= energy + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return;

    VectorXd trial_grad = planar_gradient(as_span(trial), wall_ratio);
    VectorXd s = trial - u;
    VectorXd y = trial_grad - grad;
    if (s.dot(y) > 1e-16 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      if (s_hist.size() > history) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    u = std::move(trial);
    energy = trial_energy;
    grad = std::move(trial_grad);
    trace.push_back(energy);
  }
}

// Newton iterations on the exact Hessian. Eigenvalues are floored in
// magnitude so the rigid-rotation zero mode (omega_q = 0) stays harmless.
bool newton_polish(VectorXd& u, double& energy, VectorXd& grad, double wall_ratio, double tolerance,
                   std::vector<double>& trace) {
  for (int iter = 0; iter < 200; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < tolerance) return true;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(planar_hessian(u, wall_ratio));
    const VectorXd& lambda = eig.eigenvalues();
    const double floor = 1e-10 * lambda.cwiseAbs().maxCoeff();
    VectorXd coeff = eig.eigenvectors().transpose() * grad;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) /= std::max(std::abs(lambda(k)), floor);
    const VectorXd dir = -(eig.eigenvectors() * coeff);

    // Near convergence energy differences sit at roundoff, so allow a slack
    // of a few ulps of the total energy.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(energy);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      VectorXd trial = u + step * dir;
      const double trial_energy = planar_energy(as_span(trial), wall_ratio);
      if (std::isfinite(trial_energy) && trial_energy <= energy + slack) {
        VectorXd trial_grad = planar_gradient(as_span(trial), wall_ratio);
        if (trial_energy < energy - slack ||
            trial_grad.lpNorm<Eigen::Infinity>() < grad.lpNorm<Eigen::Infinity>()) {
          u = std::move(trial);
          energy = std::min(trial_energy, energy);
          grad = std::move(trial_grad);
          trace.push_back(energy);
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) return grad.lpNorm<Eigen::Infinity>() < tolerance;
  }
  return grad.lpNorm<Eigen::Infinity>() < tolerance;
}

}  // namespace

double CrystalState::radius() const {
  double r = 0.0;
  for (const auto& p : positions) r = std::max(r, p.norm());
  return r;
}

CouplingMatrix CouplingMatrix::uniform(std::size_t n, double j_bar) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), j_bar);
  j.diagonal().setZero();
  return from_matrix(std::move(j));
}

CouplingMatrix CouplingMatrix::from_matrix(Eigen::MatrixXd j) {
  if (j.rows() != j.cols()) throw ConfigError("coupling matrix must be square");
  const Eigen::Index n = j.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (j(i, i) != 0.0) throw ConfigError("coupling matrix diagonal must be zero");
    for (Eigen::Index k = 0; k < i; ++k) {
      if (!std::isfinite(j(i, k)) || j(i, k) != j(k, i)) throw ConfigError("coupling matrix must be symmetric");
    }
  }
  CouplingMatrix out;
  out.j_bar_effective = n > 1 ? j.sum() / static_cast<double>(n * (n - 1)) : 0.0;
  out.j = std::move(j);
  return out;
}

double planar_energy(std::span<const double> coords, double wall_ratio) {
  const std::size_t n = coords.size() / 2;
  double trap = 0.0;
  double coulomb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = coords[2 * i];
    const double y = coords[2 * i + 1];
    trap += 0.5 * (x * x + y * y) + 0.5 * wall_ratio * (x * x - y * y);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x - coords[2 * j];
      const double dy = y - coords[2 * j + 1];
      coulomb += 1.0 / std::sqrt(dx * dx + dy * dy);
    }
  }
  return trap + coulomb;
}

Eigen::VectorXd planar_gradient(std::span<const double> coords, double wall_ratio) {
  const std::size_t n = coords.size() / 2;
  Eigen::VectorXd g(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < n; ++i) {
    g(2 * i) = (1.0 + wall_ratio) * coords[2 * i];
    g(2 * i + 1) = (1.0 - wall_ratio) * coords[2 * i + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = coords[2 * i] - coords[2 * j];
      const double dy = coords[2 * i + 1] - coords[2 * j + 1];
      const double d2 = dx * dx + dy * dy;
      const double inv3 = 1.0 / (d2 * std::sqrt(d2));
      g(2 * i) -= dx * inv3;
      g(2 * i + 1) -= dy * inv3;
      g(2 * j) += dx * inv3;
      g(2 * j + 1) += dy * inv3;
    }
  }
  return g;
}

std::vector<Eigen::Vector2d> triangular_seed(std::size_t n, double spacing) {
  std::vector<Eigen::Vector2d> sites;
  const int shells = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))) + 2;
  const Eigen::Vector2d a1(1.0, 0.0);
  const Eigen::Vector2d a2(0.5, std::sqrt(3.0) / 2.0);
  for (int i = -shells; i <= shells; ++i) {
    for (int j = -shells; j <= shells; ++j) sites.push_back(spacing * (i * a1 + j * a2));
  }
  std::stable_sort(sites.begin(), sites.end(), [](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
    const double rp = std::round(p.squaredNorm() * 1e9);
    const double rq = std::round(q.squaredNorm() * 1e9);
    if (rp != rq) return rp < rq;
    return std::atan2(p.y(), p.x()) < std::atan2(q.y(), q.x());
  });
  sites.resize(n);
  return sites;
}

CrystalState equilibrium_positions(const TrapConfig& trap, std::size_t n,
                                   std::optional<std::span<const Eigen::Vector2d>> seed_layout,
                                   const MinimizerOptions& options) {
  if (!(trap.radial_stiffness() > 0.0)) throw DomainError("no planar confinement (beta <= 0)");
  validate(trap);
  if (n == 0) throw ConfigError("crystal needs at least one ion");

  const double beta = trap.radial_stiffness();
  const double wall_ratio = trap.omega_q * trap.omega_q / beta;
  if (wall_ratio >= 1.0) throw DomainError("rotating wall overwhelms radial confinement");
  const double kq2 = constants::coulomb_k * trap.ion_charge * trap.ion_charge;
  const double l0 = std::cbrt(kq2 / (trap.ion_mass * beta));

  Eigen::VectorXd u(2 * static_cast<Eigen::Index>(n));
  if (seed_layout) {
    if (seed_layout->size() != n) throw ConfigError("seed layout size does not match ion count");
    for (std::size_t i = 0; i < n; ++i) u.segment<2>(2 * static_cast<Eigen::Index>(i)) = (*seed_layout)[i] / l0;
  } else {
    // Disk radius R = (3 pi n / 4)^(1/3) l0 and central areal density 3n / (2 pi R^2).
    const double radius = std::cbrt(0.75 * std::numbers::pi * static_cast<double>(n));
    const double density = 3.0 * static_cast<double>(n) / (2.0 * std::numbers::pi * radius * radius);
    const double spacing = std::sqrt(2.0 / (std::sqrt(3.0) * density));
    const auto sites = triangular_seed(n, spacing);
    std::mt19937_64 rng(options.jitter_seed);
    std::uniform_real_distribution<double> jitter(-options.jitter * spacing, options.jitter * spacing);
    for (std::size_t i = 0; i < n; ++i) {
      u(2 * static_cast<Eigen::Index>(i)) = sites[i].x() + (n > 1 ? jitter(rng) : 0.0);
      u(2 * static_cast<Eigen::Index>(i) + 1) = sites[i].y() + (n > 1 ? jitter(rng) : 0.0);
    }
  }

  CrystalState state;
  state.trap = trap;
  state.length_scale = l0;

  double energy = planar_energy(as_span(u), wall_ratio);
  if (!std::isfinite(energy)) throw ConfigError("seed layout has coincident ions");
  Eigen::VectorXd grad = planar_gradient(as_span(u), wall_ratio);
  state.energy_trace.push_back(energy);

  lbfgs_descent(u, energy, grad, wall_ratio, 1e-5, options.max_iterations, state.energy_trace);
  const bool converged = newton_polish(u, energy, grad, wall_ratio, options.gradient_tolerance, state.energy_trace);
  state.gradient_max_norm = grad.lpNorm<Eigen::Infinity>();
  if (!converged) {
    throw DomainError("crystal minimizer did not converge: gradient max-norm " +
                      std::to_string(state.gradient_max_norm));
  }

  state.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) state.positions[i] = l0 * u.segment<2>(2 * static_cast<Eigen::Index>(i));
  state.potential_energy = energy * trap.ion_mass * beta * l0 * l0;
  return state;
}

ModeSpectrum axial_modes(const CrystalState& crystal) {
  const auto n = static_cast<Eigen::Index>(crystal.size());
  if (n == 0) throw ConfigError("empty crystal");
  const TrapConfig& trap = crystal.trap;
  const double kq2_over_m = constants::coulomb_k * trap.ion_charge * trap.ion_charge / trap.ion_mass;
  const double wz2 = trap.omega_z * trap.omega_z;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double d = (crystal.positions[i] - crystal.positions[k]).norm();
      if (d <= 0.0) throw DomainError("coincident ions in crystal");
      const double kik = kq2_over_m / (d * d * d);
      a(i, k) = kik;
      a(k, i) = kik;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = wz2 - (a.row(i).sum());

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw InvariantError("axial eigen-decomposition failed");

  ModeSpectrum spectrum;
  spectrum.stiffness = a;
  spectrum.frequencies.resize(static_cast<std::size_t>(n));
  spectrum.eigenvectors.resize(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const Eigen::Index src = n - 1 - m;  // descending order
    const double w2 = eig.eigenvalues()(src);
    if (w2 <= 0.0) {
      throw DomainError("axial mode " + std::to_string(m) + " is unstable (omega^2 = " + std::to_string(w2) + ")");
    }
    spectrum.frequencies[static_cast<std::size_t>(m)] = std::sqrt(w2);
    Eigen::VectorXd b = eig.eigenvectors().col(src);
    if (b.sum() < 0.0) b = -b;
    spectrum.eigenvectors.col(m) = b;
  }
  return spectrum;
}

CouplingMatrix coupling_matrix(const ModeSpectrum& modes, const DriveConfig& drive, double ion_mass) {
  validate(drive);
  const auto n = static_cast<Eigen::Index>(modes.size());
  if (modes.eigenvectors.cols() != n) throw ConfigError("mode spectrum has mismatched eigenvectors");
  Eigen::VectorXd weight(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double w = modes.frequencies[static_cast<std::size_t>(m)];
    if (std::abs(drive.mu - w) / w <= 1e-6) {
      throw DomainError("beatnote mu is within the resonance guard of axial mode " + std::to_string(m));
    }
    weight(m) = 1.0 / (drive.mu * drive.mu - w * w);
  }
  // N counts ions, so a truncated spectrum (fewer modes) keeps the same prefactor.
  const double n_ions = static_cast<double>(modes.eigenvectors.rows());
  const double pref = drive.f0 * drive.f0 * n_ions / (2.0 * constants::hbar * ion_mass);
  const Eigen::MatrixXd& b = modes.eigenvectors;
  Eigen::MatrixXd j = pref * (b * weight.asDiagonal() * b.transpose());
  j = 0.5 * (j + j.transpose()).eval();
  j.diagonal().setZero();
  return CouplingMatrix::from_matrix(std::move(j));
}

DriveConfig drive_for_mean_coupling(const ModeSpectrum& modes, DriveConfig drive, double ion_mass,
                                    double target_j_bar) {
  const CouplingMatrix current = coupling_matrix(modes, drive, ion_mass);
  const double ratio = target_j_bar / current.j_bar_effective;
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw DomainError("target mean coupling has the wrong sign for this detuning");
  }
  drive.f0 *= std::sqrt(ratio);
  return drive;
}

PowerLawFit power_law_fit(const CouplingMatrix& coupling, const CrystalState& crystal) {
  return power_law_fit(coupling, std::span<const Eigen::Vector2d>(crystal.positions));
}

PowerLawFit power_law_fit(const CouplingMatrix& coupling, std::span<const Eigen::Vector2d> positions) {
  const std::size_t n = positions.size();
  if (n < 3) throw ConfigError("power-law fit needs at least three ions");
  if (coupling.size() != n) throw ConfigError("coupling matrix and crystal sizes differ");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const double d = (positions[i] - positions[k]).norm();
      if (!(d > 0.0)) throw DomainError("degenerate ion distances in power-law fit");
      const double jik = coupling.j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      if (!(jik > 0.0)) throw DomainError("power-law fit needs positive couplings");
      const double x = std::log(d);
      const double y = std::log(jik);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      count += 1.0;
    }
  }
  const double var = sxx - sx * sx / count;
  if (!(var > 1e-14 * sxx)) throw DomainError("degenerate ion distances in power-law fit");
  const double slope = (sxy - sx * sy / count) / var;
  const double intercept = (sy - slope * sx) / count;
  return {std::exp(intercept), -slope};
}

ThermalExtent thermal_extent(const ModeSpectrum& modes, double temperature, double delta_k, double ion_mass) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be >= 0");
  const auto n = static_cast<Eigen::Index>(modes.eigenvectors.rows());
  const auto n_modes = static_cast<Eigen::Index>(modes.size());
  if (modes.eigenvectors.cols() != n_modes) throw ConfigError("mode spectrum has mismatched eigenvectors");
  for (double w : modes.frequencies) {
    if (!(w > 0.0)) throw DomainError("unstable mode spectrum");
  }
  ThermalExtent out;
  out.z_rms.resize(static_cast<std::size_t>(n));
  out.dwf.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double z2 = 0.0;
    for (Eigen::Index m = 0; m < n_modes; ++m) {
      const double w = modes.frequencies[static_cast<std::size_t>(m)];
      const double nbar = constants::boltzmann * temperature / (constants::hbar * w);
      const double b = modes.eigenvectors(i, m);
      z2 += b * b * constants::hbar / (2.0 * ion_mass * w) * (2.0 * nbar + 1.0);
    }
    out.z_rms[static_cast<std::size_t>(i)] = std::sqrt(z2);
    out.dwf[static_cast<std::size_t>(i)] = std::exp(-0.5 * delta_k * delta_k * z2);
  }
  return out;
}

}  // namespace penning
