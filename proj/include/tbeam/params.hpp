#pragma once

#include <cmath>
#include <numbers>
#include <string_view>

#include "tbeam/error.hpp"

namespace tbeam {

/// Physical and feedback constants of the beam with tip body.
///
/// `a` is the wave-speed ratio, `b` the shear coupling, `k1`/`k3` the tip
/// stiffness gains and `k2`/`k4` the tip damping gains. `k2 == k4 == 0`
/// describes the conservative operator.
struct BeamParams {
  double a = 1.0;
  double b = 1.0;
  double k1 = 1.0;
  double k2 = 0.0;
  double k3 = 1.0;
  double k4 = 0.0;

  bool conservative() const { return k2 == 0.0 && k4 == 0.0; }

  BeamParams conservative_twin() const {
    BeamParams p = *this;
    p.k2 = 0.0;
    p.k4 = 0.0;
    return p;
  }

  /// Weight of |eta|^2 in the energy norm.
  double eta_weight() const { return 1.0 / k1; }

  /// Weight of |gamma|^2 in the energy norm. The tip moment law
  /// `y_tt(1) + k3 y_x(1) = -k4 y_t(1)` balances the bending flux
  /// `(a/b) y_x(1)` only with this weight; it reduces to 1/k3 when a == b.
  double gamma_weight() const { return a / (b * k3); }

  /// Coefficient of |gamma|^2 in Re<AU,U> = -(k2/k1)|eta|^2 - c|gamma|^2.
  double gamma_dissipation() const { return k4 * gamma_weight(); }
};

enum class Variant { dissipative, conservative };

constexpr std::string_view to_string(Variant v) {
  return v == Variant::dissipative ? "dissipative" : "conservative";
}

/// High-frequency asymptotic regime. `generic` is the case where the
/// eigenvalue families separate at order 1/k; the three degenerate cases
/// have k1 == k3 and sqrt(b) an integer multiple of 2*pi.
enum class Regime { generic, case1, case2, case3 };

constexpr std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::generic: return "generic";
    case Regime::case1: return "case1";
    case Regime::case2: return "case2";
    case Regime::case3: return "case3";
  }
  return "unknown";
}

namespace detail {

inline constexpr double kDegenerateTol = 1e-12;

inline bool nearly_equal(double x, double y, double rel) {
  return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y));
}

/// sqrt(b)/(2 pi) and the nearest positive integer.
inline std::pair<double, long> harmonic_index(double b) {
  const double q = std::sqrt(b) / (2.0 * std::numbers::pi);
  long p = std::lround(q);
  if (p < 1) p = 1;
  return {q, p};
}

}  // namespace detail

/// True iff k1 != k3 or sqrt(b) is not a positive integer multiple of 2*pi.
inline bool condition_c1(const BeamParams& p) {
  if (!detail::nearly_equal(p.k1, p.k3, detail::kDegenerateTol)) return true;
  const auto [q, n] = detail::harmonic_index(p.b);
  return std::abs(q - static_cast<double>(n)) > detail::kDegenerateTol * q;
}

/// Integer p with b = 4 p^2 pi^2 (only meaningful when C1 fails).
inline long degenerate_order(const BeamParams& p) { return detail::harmonic_index(p.b).second; }

inline Regime classify_regime(const BeamParams& p) {
  if (condition_c1(p)) return Regime::generic;
  if (p.conservative()) return Regime::case3;
  if (detail::nearly_equal(p.k2, p.k4, detail::kDegenerateTol)) return Regime::case2;
  return Regime::case1;
}

struct ParamReport {
  BeamParams params;
  bool conservative = false;
  Regime regime = Regime::generic;
  /// Set when the parameters sit within 1e-6 of the degenerate set but are
  /// routed to the generic formulas.
  bool near_degenerate = false;
};

/// Validates six raw constants. `spectral` requests the checks needed by the
/// spectral modules (a == 1).
inline ParamReport validate_params(double a, double b, double k1, double k2, double k3, double k4,
                                   bool spectral = true) {
  if (!(a > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "a must be > 0");
  if (!(b > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "b must be > 0");
  if (!(k1 > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "k1 must be > 0");
  if (!(k3 > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "k3 must be > 0");
  if (!(k2 >= 0.0)) throw Error(ErrorCode::NegativeDamping, "k2 must be >= 0");
  if (!(k4 >= 0.0)) throw Error(ErrorCode::NegativeDamping, "k4 must be >= 0");
  if (spectral && a != 1.0)
    throw Error(ErrorCode::UnsupportedSpeedRatio, "spectral modules require a == 1");

  ParamReport r;
  r.params = BeamParams{a, b, k1, k2, k3, k4};
  r.conservative = r.params.conservative();
  r.regime = classify_regime(r.params);
  if (r.regime == Regime::generic && detail::nearly_equal(k1, k3, 1e-6)) {
    const auto [q, n] = detail::harmonic_index(b);
    r.near_degenerate = std::abs(q - static_cast<double>(n)) <= 1e-6 * q;
  }
  return r;
}

inline void require_unit_speed_ratio(const BeamParams& p) {
  if (p.a != 1.0) throw Error(ErrorCode::UnsupportedSpeedRatio, "spectral modules require a == 1");
}

}  // namespace tbeam
