#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "tbeam/error.hpp"
#include "tbeam/params.hpp"

namespace tbeam {

template <class Real>
using Complex = std::complex<Real>;

/// The four roots of r^4 - 2 lambda^2 r^2 + lambda^2 (lambda^2 + b) = 0.
template <class Real>
struct BranchRoots {
  Complex<Real> t1, t2, t3, t4;

  Complex<Real> operator[](int i) const {
    switch (i) {
      case 0: return t1;
      case 1: return t2;
      case 2: return t3;
      default: return t4;
    }
  }
};

/// Branch roots with t1 ~ lambda + i sqrt(b)/2 and t3 ~ lambda - i sqrt(b)/2.
///
/// t1 = lambda * sqrt(1 + i sqrt(b)/lambda) carries its branch cut on the
/// imaginary segment [-i sqrt(b), 0] and t3 on [0, i sqrt(b)], so both are
/// analytic on the open left half-plane. The value squares to
/// lambda (lambda +/- i sqrt(b)) and agrees with sqrt(lambda) sqrt(lambda +/- i sqrt(b))
/// up to sign; see branch_roots_principal().
namespace detail {

/// Principal square root, with arguments that sit on the negative real axis
/// up to rounding sent to the upper side. Keeps the sign of t_i independent of
/// the working precision for eigenvalues on the imaginary segment.
template <class Real>
Complex<Real> sqrt_upper(Complex<Real> w) {
  const Real eps = std::numeric_limits<Real>::epsilon();
  if (w.real() < Real(0) && std::abs(w.imag()) <= Real(64) * eps * std::abs(w))
    w = Complex<Real>(w.real(), Real(0));
  return std::sqrt(w);
}

}  // namespace detail

template <class Real>
BranchRoots<Real> branch_roots(Complex<Real> lambda, Real b) {
  if (lambda == Complex<Real>(0)) throw Error(ErrorCode::ZeroLambda, "branch roots at lambda = 0");
  const Complex<Real> isb(0, std::sqrt(b));
  const Complex<Real> one(1);
  const Complex<Real> t1 = lambda * detail::sqrt_upper(one + isb / lambda);
  const Complex<Real> t3 = lambda * detail::sqrt_upper(one - isb / lambda);
  return {t1, -t1, t3, -t3};
}

/// Literal composition sqrt(lambda) * sqrt(+/- i sqrt(b) + lambda) with
/// principal roots on each factor.
template <class Real>
BranchRoots<Real> branch_roots_principal(Complex<Real> lambda, Real b) {
  if (lambda == Complex<Real>(0)) throw Error(ErrorCode::ZeroLambda, "branch roots at lambda = 0");
  const Complex<Real> isb(0, std::sqrt(b));
  const Complex<Real> sl = std::sqrt(lambda);
  const Complex<Real> t1 = sl * std::sqrt(isb + lambda);
  const Complex<Real> t3 = sl * std::sqrt(-isb + lambda);
  return {t1, -t1, t3, -t3};
}

/// lambda^2 - t_i^2 for each branch, evaluated without cancellation:
/// t1^2 = lambda^2 + i sqrt(b) lambda and t3^2 = lambda^2 - i sqrt(b) lambda.
template <class Real>
std::array<Complex<Real>, 4> shear_defects(Complex<Real> lambda, Real b) {
  const Complex<Real> r = Complex<Real>(0, -std::sqrt(b)) * lambda;
  return {r, r, -r, -r};
}

/// Couplings d_i with y = sum c_i d_i exp(t_i x).
template <class Real>
std::array<Complex<Real>, 4> mode_couplings(Complex<Real> lambda, const BranchRoots<Real>& t,
                                            Real b) {
  const Real guard = Real(1e-12);
  if (std::abs(t.t1) < guard || std::abs(t.t3) < guard)
    throw Error(ErrorCode::BranchRootNearZero, "|t1| or |t3| below 1e-12");
  const auto rho = shear_defects(lambda, b);
  const Complex<Real> d1 = rho[0] / t.t1;
  const Complex<Real> d3 = rho[2] / t.t3;
  return {d1, -d1, d3, -d3};
}

template <class Real>
struct GValues {
  Complex<Real> g1, g2, g3;
};

/// Boundary functions exactly as written, with lambda^2 - t^2 formed directly.
template <class Real>
GValues<Real> g_functions(Complex<Real> t, Complex<Real> lambda, const BeamParams& p) {
  if (t == Complex<Real>(0) || lambda == Complex<Real>(0))
    throw Error(ErrorCode::ZeroDenominator, "g-functions need t != 0 and lambda != 0");
  const Real k1 = p.k1, k2 = p.k2, k3 = p.k3, k4 = p.k4;
  const Complex<Real> l2 = lambda * lambda;
  GValues<Real> g;
  g.g1 = -t + l2 / t;
  g.g2 = (k2 * t + (k1 + t) * lambda) / (lambda * t);
  g.g3 = (-t * t + l2) * (k3 * t + lambda * (k4 + lambda)) / (l2 * t);
  return g;
}

/// Same functions, given rho = lambda^2 - t^2 from shear_defects().
template <class Real>
GValues<Real> g_functions_stable(Complex<Real> t, Complex<Real> rho, Complex<Real> lambda,
                                 const BeamParams& p) {
  const Real k1 = p.k1, k2 = p.k2, k3 = p.k3, k4 = p.k4;
  GValues<Real> g;
  g.g1 = rho / t;
  g.g2 = Real(1) + Real(k1) / t + Real(k2) / lambda;
  g.g3 = rho * (Real(k3) * t + lambda * (Real(k4) + lambda)) / (lambda * lambda * t);
  return g;
}

template <class Real>
using Matrix4c = Eigen::Matrix<Complex<Real>, 4, 4>;

template <class Real>
struct CharMatrix {
  Matrix4c<Real> m;
  Complex<Real> lambda;
  BeamParams params;
};

/// Boundary matrix with rows (1; g1(t_i); e^{t_i} g2(t_i); e^{t_i} g3(t_i)).
template <class Real>
CharMatrix<Real> boundary_matrix(Complex<Real> lambda, const BeamParams& p) {
  const Real b = p.b;
  const auto t = branch_roots(lambda, b);
  const auto rho = shear_defects(lambda, b);
  CharMatrix<Real> cm{Matrix4c<Real>{}, lambda, p};
  for (int i = 0; i < 4; ++i) {
    const Complex<Real> ti = t[i];
    if (ti == Complex<Real>(0)) throw Error(ErrorCode::ZeroDenominator, "t_i vanishes");
    const auto g = g_functions_stable(ti, rho[i], lambda, p);
    const Complex<Real> e = std::exp(ti);
    cm.m(0, i) = Complex<Real>(1);
    cm.m(1, i) = g.g1;
    cm.m(2, i) = e * g.g2;
    cm.m(3, i) = e * g.g3;
  }
  return cm;
}

template <class Real>
Complex<Real> determinant(const Matrix4c<Real>& m) {
  return m.partialPivLu().determinant();
}

/// f(lambda) = -det M(lambda) / (16 b).
template <class Real>
Complex<Real> char_fn(Complex<Real> lambda, const BeamParams& p) {
  const auto cm = boundary_matrix(lambda, p);
  return -determinant<Real>(cm.m) / Complex<Real>(Real(16) * Real(p.b));
}

/// f(lambda) t1 t3 / lambda^2. Flipping the sign of t1 (or t3) swaps two
/// columns of M, so this product is single valued across the branch cuts of
/// t1 and t3 and is analytic around the imaginary segment [-i sqrt(b), i sqrt(b)].
/// It has the same zeros as f away from 0 and +/- i sqrt(b), and tends to f
/// for large |lambda|.
template <class Real>
Complex<Real> char_fn_regularized(Complex<Real> lambda, const BeamParams& p) {
  const auto t = branch_roots(lambda, Real(p.b));
  return char_fn(lambda, p) * (t.t1 * t.t3) / (lambda * lambda);
}

/// Central difference along the real direction with step 1e-7 max(1,|lambda|).
template <class Real>
Complex<Real> char_fn_derivative(Complex<Real> lambda, const BeamParams& p) {
  const Real sb = std::sqrt(Real(p.b));
  const Real guard = Real(1e-6);
  if (std::abs(lambda) < guard || std::abs(lambda - Complex<Real>(0, sb)) < guard ||
      std::abs(lambda + Complex<Real>(0, sb)) < guard)
    throw Error(ErrorCode::NearBranchPoint, "derivative requested near 0 or +/- i sqrt(b)");
  const Real delta = Real(1e-7) * std::max(Real(1), std::abs(lambda));
  return (char_fn(lambda + delta, p) - char_fn(lambda - delta, p)) / (Real(2) * delta);
}

/// Terms of f = f0 + f1/lambda + f2/lambda^2 + f3/lambda^3 + O(lambda^-4).
template <class Real>
struct ExpansionTerms {
  Complex<Real> f0, f1, f2, f3;
};

template <class Real>
ExpansionTerms<Real> f_expansion_terms(Complex<Real> lambda, const BeamParams& p) {
  using C = Complex<Real>;
  const auto t = branch_roots(lambda, Real(p.b));
  const Real b = p.b, k1 = p.k1, k2 = p.k2, k3 = p.k3, k4 = p.k4;
  const Real sb = std::sqrt(b);
  const C I(0, 1);
  const C ep = std::exp(t.t1 + t.t3);
  const C em = std::exp(-t.t1 - t.t3);
  const C dp = std::exp(t.t1 - t.t3);
  const C dm = std::exp(-t.t1 + t.t3);

  ExpansionTerms<Real> e;
  e.f0 = Real(0.25) * em * (ep - Real(1)) * (ep - Real(1));
  e.f1 = Real(-0.25) *
         (Real(2) * (k2 + k4) - ep * (k1 + k2 + k3 + k4) + em * (k1 + k3 - k2 - k4));
  e.f2 = Real(-1) / Real(16) *
         (Real(-4) * (b + 2 * k1 * k3 - 2 * k2 * k4) +
          (3 * b - 4 * k1 * k3 - 4 * k2 * k3 - 4 * k1 * k4 - 4 * k2 * k4) * ep +
          (3 * b - 4 * k1 * k3 + 4 * k2 * k3 + 4 * k1 * k4 - 4 * k2 * k4) * em +
          (C(-b) + Real(2) * I * sb * k1 - Real(2) * I * sb * k3) * dp +
          (C(-b) - Real(2) * I * sb * k1 + Real(2) * I * sb * k3) * dm);
  e.f3 = Real(-1) / Real(16) *
         (C(-4 * b * (k2 + k4)) + Real(0.5) * b * (7 * k1 + 6 * k2 + 3 * k3 + 6 * k4) * ep -
          Real(0.5) * b * (7 * k1 - 6 * k2 + 3 * k3 - 6 * k4) * em +
          (C(-b * k2) - Real(2) * I * sb * k2 * k3 - b * k4 + Real(2) * I * sb * k1 * k4) * dp +
          (C(-b * k2) + Real(2) * I * sb * k2 * k3 - b * k4 - Real(2) * I * sb * k1 * k4) * dm);
  return e;
}

template <class Real>
Complex<Real> f_expansion_sum(Complex<Real> lambda, const ExpansionTerms<Real>& e) {
  const Complex<Real> inv = Real(1) / lambda;
  return e.f0 + inv * (e.f1 + inv * (e.f2 + inv * e.f3));
}

}  // namespace tbeam
