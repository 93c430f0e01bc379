#include "penning/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "penning/errors.hpp"

namespace penning {

namespace {

constexpr cplx I{0.0, 1.0};

// e^{-s} cos(x) and e^{-s} sinc(x), formed inside the exponent so that large
// decay factors never overflow the trig part.
void scaled_cos_sinc(cplx x, double s, cplx& cos_out, cplx& sinc_out) {
  const cplx ep = std::exp(I * x - s);
  const cplx em = std::exp(-I * x - s);
  cos_out = 0.5 * (ep + em);
  if (std::abs(x) < 1e-4) {
    const cplx x2 = x * x;
    sinc_out = std::exp(-s) * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
  } else {
    sinc_out = (ep - em) / (2.0 * I * x);
  }
}

struct PhiPsi {
  cplx phi;
  cplx psi;
};

PhiPsi phi_psi(double j, double t, const SpinEnsembleParams& p) {
  const double g_sum = p.gamma_ud + p.gamma_du;
  const double gamma = p.gamma_asym();
  const cplx z = 2.0 * I * gamma + 2.0 * j / static_cast<double>(p.n_ions);
  const cplx r = std::sqrt(z * z - p.gamma_ud * p.gamma_du);
  cplx c;
  cplx sc;
  scaled_cos_sinc(t * r, 0.5 * g_sum * t, c, sc);
  return {c + 0.5 * g_sum * t * sc, (I * z - 2.0 * gamma) * t * sc};
}

double imag_tolerance(double scale) { return 1e-10 * std::max(1.0, scale); }

double checked_real(cplx value, double scale, const char* what) {
  if (std::abs(value.imag()) > imag_tolerance(scale)) {
    throw InvariantError(std::string(what) + " has imaginary residue " + std::to_string(value.imag()));
  }
  return value.real();
}

// Sum of logs with an explicit zero flag, so products of many small factors
// neither underflow early nor lose the exact-zero case.
struct LogProduct {
  cplx log_sum{0.0, 0.0};
  bool zero = false;
  void multiply(cplx factor) {
    if (factor == cplx{0.0, 0.0}) {
      zero = true;
    } else {
      log_sum += std::log(factor);
    }
  }
  [[nodiscard]] cplx value() const { return zero ? cplx{0.0, 0.0} : std::exp(log_sum); }
};

}  // namespace

cplx phi(double j, double t, const SpinEnsembleParams& params) { return phi_psi(j, t, params).phi; }

cplx psi(double j, double t, const SpinEnsembleParams& params) { return phi_psi(j, t, params).psi; }

cplx guarded_pow(cplx z, double k) {
  if (k == 0.0) return {1.0, 0.0};
  if (z == cplx{0.0, 0.0}) return {0.0, 0.0};
  return std::exp(k * std::log(z));
}

SpinEnsembleParams at_time(SpinEnsembleParams params, double tau) {
  params.tau = tau;
  return params;
}

cplx correlator_uniform(std::size_t n_plus, std::size_t n_minus, std::size_t n_z, const SpinEnsembleParams& params) {
  const std::size_t n = n_plus + n_minus + n_z;
  if (n > params.n_ions) throw ConfigError("correlator uses more spins than the ensemble holds");
  const double t = params.tau;
  const double d = static_cast<double>(n_plus) - static_cast<double>(n_minus);
  const PhiPsi pp = phi_psi(d * params.j_bar, t, params);
  const double transverse = static_cast<double>(n_plus + n_minus);
  const cplx prefactor = std::exp(-transverse * (params.gamma_total() * t + std::log(2.0)));
  return prefactor * guarded_pow(pp.psi, static_cast<double>(n_z)) *
         guarded_pow(pp.phi, static_cast<double>(params.n_ions - n));
}

CorrelatorSet correlators_uniform(const SpinEnsembleParams& params) {
  validate(params);
  CorrelatorSet c;
  c.time = params.tau;
  c.s_plus = correlator_uniform(1, 0, 0, params);
  c.s_z = correlator_uniform(0, 0, 1, params);
  if (params.n_ions >= 2) {
    c.plus_plus = correlator_uniform(2, 0, 0, params);
    c.plus_minus = correlator_uniform(1, 1, 0, params);
    c.plus_z = correlator_uniform(1, 0, 1, params);
    c.z_z = correlator_uniform(0, 0, 2, params);
  }
  return c;
}

GeneralCorrelators correlators_general(const CouplingMatrix& j, const SpinEnsembleParams& params) {
  validate(params);
  const std::size_t n = params.n_ions;
  if (j.size() != n) throw ConfigError("coupling matrix size does not match n_ions");
  const double t = params.tau;
  const double decay = std::exp(-params.gamma_total() * t);
  const auto ni = static_cast<Eigen::Index>(n);

  GeneralCorrelators out;
  out.time = t;
  // Populations relax independently of the Ising term, so <sigma^z> and
  // <sigma^z sigma^z> are the single-spin values for any coupling matrix.
  out.s_z = psi(0.0, t, params);
  out.z_z = out.s_z * out.s_z;

  // log Phi(J_jl, t) and Phi values reused by <sigma^+_j> and <sigma^+_j sigma^z_k>.
  Eigen::MatrixXcd log_phi(ni, ni);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> phi_zero(ni, ni);
  Eigen::MatrixXcd psi_jk(ni, ni);
  for (Eigen::Index a = 0; a < ni; ++a) {
    for (Eigen::Index b = 0; b < ni; ++b) {
      if (a == b) {
        log_phi(a, b) = 0.0;
        phi_zero(a, b) = false;
        psi_jk(a, b) = 0.0;
        continue;
      }
      const PhiPsi v = phi_psi(j.j(a, b), t, params);
      phi_zero(a, b) = (v.phi == cplx{0.0, 0.0});
      log_phi(a, b) = phi_zero(a, b) ? cplx{0.0, 0.0} : std::log(v.phi);
      psi_jk(a, b) = v.psi;
    }
  }

  out.s_plus.resize(n);
  for (Eigen::Index a = 0; a < ni; ++a) {
    bool zero = false;
    cplx s{0.0, 0.0};
    for (Eigen::Index b = 0; b < ni; ++b) {
      if (b == a) continue;
      zero = zero || phi_zero(a, b);
      s += log_phi(a, b);
    }
    out.s_plus[static_cast<std::size_t>(a)] = zero ? cplx{0.0, 0.0} : 0.5 * decay * std::exp(s);
  }

  out.plus_plus = Eigen::MatrixXcd::Zero(ni, ni);
  out.plus_minus = Eigen::MatrixXcd::Zero(ni, ni);
  out.plus_z = Eigen::MatrixXcd::Zero(ni, ni);
  for (Eigen::Index a = 0; a < ni; ++a) {
    for (Eigen::Index b = 0; b < ni; ++b) {
      if (a == b) continue;
      LogProduct sz_rest;
      for (Eigen::Index l = 0; l < ni; ++l) {
        if (l == a || l == b) continue;
        if (phi_zero(a, l)) {
          sz_rest.zero = true;
        } else {
          sz_rest.log_sum += log_phi(a, l);
        }
      }
      out.plus_z(a, b) = 0.5 * decay * psi_jk(a, b) * sz_rest.value();
      if (b < a) continue;
      LogProduct same;
      LogProduct opposite;
      for (Eigen::Index l = 0; l < ni; ++l) {
        if (l == a || l == b) continue;
        same.multiply(phi(j.j(a, l) + j.j(b, l), t, params));
        opposite.multiply(phi(j.j(a, l) - j.j(b, l), t, params));
      }
      const cplx pp = 0.25 * decay * decay * same.value();
      const cplx pm = 0.25 * decay * decay * opposite.value();
      out.plus_plus(a, b) = pp;
      out.plus_plus(b, a) = pp;
      out.plus_minus(a, b) = pm;
      out.plus_minus(b, a) = std::conj(pm);
    }
  }
  return out;
}

SpinMoments spin_moments(const CorrelatorSet& c, std::size_t n_ions, const MeasurementDirection& dir,
                         double bfield_variance) {
  const cplx a_plus{dir.c_x, -dir.c_y};
  const cplx a_minus{dir.c_x, dir.c_y};
  const double cz = dir.c_z;
  const double n = static_cast<double>(n_ions);
  const double f1 = std::exp(-0.5 * bfield_variance);
  const double f2 = std::exp(-2.0 * bfield_variance);

  const cplx sp = f1 * c.s_plus;
  const cplx one = a_plus * sp + a_minus * std::conj(sp) + cz * c.s_z;
  const double mean_single = checked_real(one, 1.0, "<sigma^dir>");

  const cplx pp = f2 * c.plus_plus;
  const cplx pz = f1 * c.plus_z;
  const cplx pair = a_plus * a_plus * pp + a_minus * a_minus * std::conj(pp) +
                    a_plus * a_minus * (c.plus_minus + std::conj(c.plus_minus)) +
                    2.0 * cz * (a_plus * pz + a_minus * std::conj(pz)) + cz * cz * c.z_z;
  const double pair_real = n_ions >= 2 ? checked_real(pair, 1.0, "<sigma^dir sigma^dir>") : 0.0;

  SpinMoments m;
  m.mean = 0.5 * n * mean_single;
  const double second = 0.25 * n + 0.25 * n * (n - 1.0) * pair_real;
  m.variance = second - m.mean * m.mean;
  return m;
}

SpinMoments spin_moments(const GeneralCorrelators& c, const MeasurementDirection& dir) {
  const cplx a_plus{dir.c_x, -dir.c_y};
  const cplx a_minus{dir.c_x, dir.c_y};
  const double cz = dir.c_z;
  const auto ni = static_cast<Eigen::Index>(c.size());
  const double n = static_cast<double>(ni);

  cplx mean{0.0, 0.0};
  for (const cplx& sp : c.s_plus) mean += a_plus * sp + a_minus * std::conj(sp) + cz * c.s_z;
  mean *= 0.5;

  cplx pairs{0.0, 0.0};
  for (Eigen::Index a = 0; a < ni; ++a) {
    for (Eigen::Index b = 0; b < ni; ++b) {
      if (a == b) continue;
      const cplx pp = c.plus_plus(a, b);
      const cplx pm = c.plus_minus(a, b);
      pairs += a_plus * a_plus * pp + a_minus * a_minus * std::conj(pp) + a_plus * a_minus * (pm + std::conj(pm)) +
               cz * (a_plus * c.plus_z(a, b) + a_minus * std::conj(c.plus_z(a, b))) +
               cz * (a_plus * c.plus_z(b, a) + a_minus * std::conj(c.plus_z(b, a))) + cz * cz * c.z_z;
    }
  }
  SpinMoments m;
  m.mean = checked_real(mean, n, "<S_dir>");
  const double second = 0.25 * n + 0.25 * checked_real(pairs, n * n, "sum <sigma^dir sigma^dir>");
  m.variance = second - m.mean * m.mean;
  return m;
}

double contrast(const SpinEnsembleParams& params) {
  validate(params);
  return static_cast<double>(params.n_ions) * std::abs(correlator_uniform(1, 0, 0, params));
}

double contrast(const GeneralCorrelators& c) {
  cplx total{0.0, 0.0};
  for (const cplx& sp : c.s_plus) total += sp;
  return std::abs(total);
}

double contrast_closed_form(const SpinEnsembleParams& params) {
  validate(params);
  const double n = static_cast<double>(params.n_ions);
  const double cosine = std::cos(2.0 * params.j_bar * params.tau / n);
  return std::exp(-params.gamma_total() * params.tau) * 0.5 * n * std::pow(cosine, n - 1.0);
}

double transverse_variance(const SpinEnsembleParams& params, double psi_angle, double bfield_variance) {
  const CorrelatorSet c = correlators_uniform(params);
  return spin_moments(c, params.n_ions, MeasurementDirection::tomography(psi_angle), bfield_variance).variance;
}

SqueezingResult squeezing_parameter(const SpinEnsembleParams& params, double bfield_variance) {
  const CorrelatorSet c = correlators_uniform(params);
  SqueezingResult out;
  out.contrast = static_cast<double>(params.n_ions) * std::abs(c.s_plus) * std::exp(-0.5 * bfield_variance);
  if (!(out.contrast > 0.0) || !std::isfinite(out.contrast)) {
    throw DomainError("squeezing parameter undefined at zero contrast");
  }
  const auto [psi_min, var_min] = minimize_over_psi([&](double angle) {
    return spin_moments(c, params.n_ions, MeasurementDirection::tomography(angle), bfield_variance).variance;
  });
  out.psi_min = psi_min;
  out.variance_min = var_min;
  out.xi_r_squared = static_cast<double>(params.n_ions) * var_min / (out.contrast * out.contrast);
  if (!std::isfinite(out.xi_r_squared)) throw DomainError("squeezing parameter undefined at zero contrast");
  return out;
}

OptimalSqueezing optimal_squeezing(const SpinEnsembleParams& params) {
  validate(params);
  if (!(params.j_bar > 0.0)) throw ConfigError("optimal squeezing scan needs j_bar > 0");
  const double n = static_cast<double>(params.n_ions);
  // Scan the twisting angle x = 2 J tau / N around the coherent optimum ~ N^(-2/3).
  const double scale = std::pow(n, -2.0 / 3.0);
  const double x_lo = 1e-3 * scale;
  const double x_hi = std::min(1.5, 30.0 * scale);
  const auto tau_of = [&](double x) { return x * n / (2.0 * params.j_bar); };
  const auto xi_at = [&](double x) {
    try {
      return squeezing_parameter(at_time(params, tau_of(x))).xi_r_squared;
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  constexpr int points = 240;
  const double ratio = std::pow(x_hi / x_lo, 1.0 / (points - 1));
  double best_x = x_lo;
  double best = xi_at(x_lo);
  for (int k = 1; k < points; ++k) {
    const double x = x_lo * std::pow(ratio, k);
    const double v = xi_at(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  // Golden section in log x on the bracketing grid cell pair.
  constexpr double inv_phi = 0.6180339887498949;
  double a = std::log(best_x / ratio);
  double b = std::log(best_x * ratio);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = xi_at(std::exp(c));
  double fd = xi_at(std::exp(d));
  while (b - a > 1e-7) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = xi_at(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = xi_at(std::exp(d));
    }
  }
  const double x_opt = std::exp(0.5 * (a + b));
  OptimalSqueezing out;
  const double refined = xi_at(x_opt);
  const double x_final = refined <= best ? x_opt : best_x;
  const SqueezingResult r = squeezing_parameter(at_time(params, tau_of(x_final)));
  out.xi_r_squared = r.xi_r_squared;
  out.tau = tau_of(x_final);
  out.psi_min = r.psi_min;
  return out;
}

std::vector<double> mean_field_field(const CouplingMatrix& j, std::span<const double> sz_expectations) {
  const std::size_t n = j.size();
  if (sz_expectations.size() != n) throw ConfigError("sigma^z vector length does not match coupling matrix");
  std::vector<double> field(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != a) sum += j.j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) * sz_expectations[i];
    }
    field[a] = 2.0 / static_cast<double>(n) * sum;
  }
  return field;
}

}  // namespace penning
