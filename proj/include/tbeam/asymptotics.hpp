#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "tbeam/error.hpp"
#include "tbeam/params.hpp"

namespace tbeam {

struct GammaCoefficients {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
};

inline GammaCoefficients gamma_coefficients(const BeamParams& p) {
  require_unit_speed_ratio(p);
  constexpr double pi = std::numbers::pi;
  const double b = p.b, k1 = p.k1, k2 = p.k2, k3 = p.k3, k4 = p.k4;
  const double sb = std::sqrt(b);
  GammaCoefficients g;
  g.gamma1 = (b + 4.0 * (k1 + k3)) / (4.0 * pi);
  g.gamma2 = (-8.0 * b + b * b + 8.0 * b * k1 + 8.0 * b * k3 + 64.0 * k1 * k3 +
              8.0 * b * std::cos(sb) + 16.0 * sb * (k1 - k3) * std::sin(sb)) /
             (64.0 * pi * pi);
  g.gamma3 = b * (k1 * k2 + k3 * k4) + 8.0 * k1 * k3 * (k2 + k4) +
             2.0 * sb * (k1 * k2 - k3 * k4) * std::sin(sb);
  return g;
}

/// gamma1^2 - 4 gamma2 written as a sum of squares; it vanishes exactly on
/// the degenerate set k1 == k3, sqrt(b) in 2 pi N*.
inline double discriminant_completed_square(const BeamParams& p) {
  constexpr double pi = std::numbers::pi;
  const double sb = std::sqrt(p.b);
  const double c = std::cos(sb);
  const double shift = p.k1 - p.k3 - 0.5 * sb * std::sin(sb);
  return (2.0 * shift * shift + 0.5 * p.b * (1.0 - c) * (1.0 - c)) / (2.0 * pi * pi);
}

/// Closed form of gamma1^2 - 4 gamma2 before completing the square.
inline double discriminant_closed_form(const BeamParams& p) {
  constexpr double pi = std::numbers::pi;
  const double sb = std::sqrt(p.b);
  const double dk = p.k1 - p.k3;
  return (p.b + 2.0 * dk * dk - p.b * std::cos(sb) - 2.0 * sb * dk * std::sin(sb)) / (2.0 * pi * pi);
}

struct AlphaPair {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

/// Roots of a^2 - gamma1 a + gamma2 = 0, alpha1 <= alpha2. A discriminant
/// within rounding of zero is clamped; a clearly negative one is a bug.
inline AlphaPair alpha_coefficients(double gamma1, double gamma2) {
  double disc = gamma1 * gamma1 - 4.0 * gamma2;
  const double scale = std::max(gamma1 * gamma1, std::abs(4.0 * gamma2));
  if (disc < 0.0) {
    if (disc < -1e-12 * std::max(1.0, scale))
      throw Error(ErrorCode::NegativeDiscriminant, "gamma1^2 - 4 gamma2 < 0");
    disc = 0.0;
  }
  const double r = std::sqrt(disc);
  return {(gamma1 - r) / 2.0, (gamma1 + r) / 2.0};
}

struct OmegaBeta {
  std::complex<double> omega1;
  std::complex<double> omega2;
  double beta = 0.0;
};

/// Second-order data for family j (1 or 2) under condition C1.
inline OmegaBeta omega_beta(const BeamParams& p, double alpha_j) {
  constexpr double pi = std::numbers::pi;
  if (!condition_c1(p)) throw Error(ErrorCode::ZeroOmega1, "omega1 vanishes when C1 fails");
  const auto g = gamma_coefficients(p);
  const double damping_moment = p.k1 * p.k2 + p.k3 * p.k4;
  OmegaBeta ob;
  ob.omega1 = std::complex<double>(0.0, -(p.b + 4.0 * p.k1 + 4.0 * p.k3 - 8.0 * alpha_j * pi) / (4.0 * pi));
  // Sign chosen so that Re(lambda_k^j) ~ -beta_j / k^2 with beta_j = omega2/omega1.
  ob.omega2 = std::complex<double>(0.0, (8.0 * pi * damping_moment * alpha_j - g.gamma3) / (8.0 * pi * pi * pi));
  if (std::abs(ob.omega1) == 0.0) throw Error(ErrorCode::ZeroOmega1, "omega1 == 0");
  ob.beta = (ob.omega2 / ob.omega1).real();
  return ob;
}

struct A3Pair {
  double a31 = 0.0;
  double a32 = 0.0;
};

/// Third-order coefficients of the k1 == k3, b = 4 p^2 pi^2 expansions.
inline A3Pair special_a3(const BeamParams& p) {
  constexpr double pi = std::numbers::pi;
  if (condition_c1(p))
    throw Error(ErrorCode::RegimeMismatch, "a3 coefficients need k1 == k3 and b = 4 p^2 pi^2");
  const double k1 = p.k1;
  const double q = static_cast<double>(degenerate_order(p)) * pi;  // p pi
  const double q2 = q * q;
  const double radicand = 4.0 * k1 * k1 * k1 * k1 - 43.0 * k1 * k1 * q2 - 4.0 * k1 * q2 * q2 + q2 * q2 * q2;
  if (radicand < 0.0) throw Error(ErrorCode::NegativeRadicand, "a3 radicand is negative");
  const double base = -24.0 * k1 * k1 - 8.0 * k1 * k1 * k1 - 36.0 * k1 * q2 + 9.0 * q2 * q2;
  const double spread = 12.0 * q * std::sqrt(radicand);
  return {base - spread, base + spread};
}

/// All asymptotic data for one parameter set. For the degenerate regimes
/// `beta` holds the effective -k^2 Re(lambda) limits and omega is unset.
struct AsymptoticCoefficients {
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0;
  std::array<std::complex<double>, 2> omega1{};
  std::array<std::complex<double>, 2> omega2{};
  std::array<double, 2> beta{};
  bool omega_defined = false;
  Regime regime = Regime::generic;
};

inline AsymptoticCoefficients asymptotic_coefficients(const BeamParams& p) {
  constexpr double pi = std::numbers::pi;
  AsymptoticCoefficients c;
  const auto g = gamma_coefficients(p);
  c.gamma1 = g.gamma1;
  c.gamma2 = g.gamma2;
  c.gamma3 = g.gamma3;
  const auto al = alpha_coefficients(g.gamma1, g.gamma2);
  c.alpha1 = al.alpha1;
  c.alpha2 = al.alpha2;
  c.regime = classify_regime(p);
  if (c.regime == Regime::generic) {
    const std::array<double, 2> alphas{al.alpha1, al.alpha2};
    for (int j = 0; j < 2; ++j) {
      const auto ob = omega_beta(p, alphas[j]);
      c.omega1[j] = ob.omega1;
      c.omega2[j] = ob.omega2;
      c.beta[j] = ob.beta;
    }
    c.omega_defined = true;
  } else {
    c.alpha1 = c.alpha2 = (2.0 * p.k1 + std::pow(degenerate_order(p) * pi, 2)) / (2.0 * pi);
    c.beta[0] = p.k1 * p.k2 / (pi * pi);
    c.beta[1] = p.k1 * p.k4 / (pi * pi);
  }
  return c;
}

inline constexpr int kDefaultPredictionKMin = 5;

/// Asymptotic eigenvalue for index k (|k| >= k_min) and family j. The
/// conservative variant predicts for the twin operator with k2 = k4 = 0.
inline std::complex<double> predict_eigenvalue(int k, int j, const BeamParams& p, Variant variant,
                                               int k_min = kDefaultPredictionKMin) {
  constexpr double pi = std::numbers::pi;
  using C = std::complex<double>;
  require_unit_speed_ratio(p);
  if (j != 1 && j != 2) throw Error(ErrorCode::InvalidConfig, "family must be 1 or 2");
  if (std::abs(k) < k_min) throw Error(ErrorCode::InvalidConfig, "|k| below k_min");
  if (variant == Variant::dissipative && p.conservative())
    throw Error(ErrorCode::RegimeMismatch, "dissipative prediction requested with k2 = k4 = 0");
  const BeamParams q = variant == Variant::conservative ? p.conservative_twin() : p;
  const double kk = static_cast<double>(k);
  const C base(0.0, kk * pi);

  switch (classify_regime(q)) {
    case Regime::generic: {
      const auto g = gamma_coefficients(q);
      const auto al = alpha_coefficients(g.gamma1, g.gamma2);
      const double alpha = j == 1 ? al.alpha1 : al.alpha2;
      C lam = base + C(0.0, alpha / kk);
      if (variant == Variant::dissipative) lam -= omega_beta(q, alpha).beta / (kk * kk);
      return lam;
    }
    case Regime::case1: {
      const double pp = static_cast<double>(degenerate_order(q));
      const double gain = j == 1 ? q.k2 : q.k4;
      return base + C(0.0, (2.0 * q.k1 + pp * pp * pi * pi) / (2.0 * kk * pi)) -
             q.k1 * gain / (kk * kk * pi * pi);
    }
    case Regime::case2: {
      const double pp = static_cast<double>(degenerate_order(q));
      const auto a3 = special_a3(q);
      const double a3j = j == 1 ? a3.a31 : a3.a32;
      return base + C(0.0, (2.0 * q.k1 + pp * pp * pi * pi) / (2.0 * kk * pi)) -
             q.k1 * q.k2 / (kk * kk * pi * pi) +
             C(0.0, (a3j - 24.0 * q.k1 * q.k2 * q.k2) / (24.0 * kk * kk * kk * pi * pi * pi));
    }
    case Regime::case3: {
      const double pp = static_cast<double>(degenerate_order(q));
      const auto a3 = special_a3(q);
      const double a3j = j == 1 ? a3.a31 : a3.a32;
      return base + C(0.0, (2.0 * q.k1 + pp * pp * pi * pi) / (2.0 * kk * pi)) +
             C(0.0, a3j / (24.0 * kk * kk * kk * pi * pi * pi));
    }
  }
  return base;
}

/// Prediction up to order 1/k, shared by both families in every regime's
/// generic part; used to seed searches when higher-order data is unavailable.
inline std::complex<double> predict_first_order(int k, int j, const BeamParams& p) {
  constexpr double pi = std::numbers::pi;
  const auto g = gamma_coefficients(p);
  const auto al = alpha_coefficients(g.gamma1, g.gamma2);
  const double kk = static_cast<double>(k);
  return {0.0, kk * pi + (j == 1 ? al.alpha1 : al.alpha2) / kk};
}

}  // namespace tbeam
