#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "tbeam/charfn.hpp"
#include "tbeam/error.hpp"
#include "tbeam/grid.hpp"
#include "tbeam/params.hpp"
#include "tbeam/spectrum.hpp"

namespace tbeam {

using cd = std::complex<double>;

/// Eigenfunction u = sum c_i e^{t_i x}, y = sum c_i d_i e^{t_i x} together with
/// its tip traces eta = lambda u(1) and gamma = lambda y(1).
struct ModeShape {
  cd lambda;
  std::array<cd, 4> coeffs{};
  BranchRoots<double> roots{};
  std::array<cd, 4> couplings{};
  double hnorm = 0.0;
  cd tip_eta;
  cd tip_gamma;
  Variant variant = Variant::dissipative;
  BeamParams params;

  cd u(double x) const { return sum(x, 0, false); }
  cd ux(double x) const { return sum(x, 1, false); }
  cd uxx(double x) const { return sum(x, 2, false); }
  cd y(double x) const { return sum(x, 0, true); }
  cd yx(double x) const { return sum(x, 1, true); }
  cd yxx(double x) const { return sum(x, 2, true); }

 private:
  cd sum(double x, int order, bool shear) const {
    cd s = 0.0;
    for (int i = 0; i < 4; ++i) {
      const cd t = roots[i];
      cd term = coeffs[i] * std::exp(t * x);
      if (shear) term *= couplings[i];
      for (int o = 0; o < order; ++o) term *= t;
      s += term;
    }
    return s;
  }
};

/// Unit null vector of M(lambda) scaled so that its largest entry is 1.
inline std::array<cd, 4> nullspace_coeffs(cd lambda, const BeamParams& p) {
  using LD = long double;
  require_unit_speed_ratio(p);
  // The stored eigenvalue is rounded to double; near-double roots need the
  // extended-precision location for a clean singular-value gap.
  Complex<LD> z(lambda.real(), lambda.imag());
  const LD scale = std::max(LD(1), std::abs(z));
  for (int it = 0; it < 3; ++it) {
    const Complex<LD> F = char_fn_regularized<LD>(z, p);
    const Complex<LD> dF = detail::regularized_derivative<LD>(z, p);
    if (F == Complex<LD>(0) || dF == Complex<LD>(0)) break;
    const Complex<LD> step = F / dF;
    if (std::abs(step) > LD(1e-12) * scale) break;
    z -= step;
  }
  const auto cm = boundary_matrix<LD>(z, p);
  Eigen::JacobiSVD<Matrix4c<LD>> svd(cm.m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s[2] <= LD(1e-12) * s[0])
    throw Error(ErrorCode::RankDeficiencyTwo, "M(lambda) has a two-dimensional kernel");
  if (s[3] > LD(1e-6) * s[2]) throw Error(ErrorCode::NotAnEigenvalue, "M(lambda) is not singular");
  const auto v = svd.matrixV().col(3);
  int imax = 0;
  for (int i = 1; i < 4; ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  std::array<cd, 4> c{};
  for (int i = 0; i < 4; ++i) {
    const Complex<LD> ci = v[i] / v[imax];
    c[i] = cd(static_cast<double>(ci.real()), static_cast<double>(ci.imag()));
  }
  return c;
}

inline double matrix_residual(cd lambda, const std::array<cd, 4>& c, const BeamParams& p) {
  const auto cm = boundary_matrix<double>(lambda, p);
  Eigen::Vector4cd cv(c[0], c[1], c[2], c[3]);
  return (cm.m * cv).norm();
}

namespace detail {

/// (e^s - 1)/s; the sinh form keeps full relative accuracy near s = 0.
inline cd exp_mean(cd s) {
  if (std::abs(s) < 1e-6) return 1.0 + s / 2.0 + s * s / 6.0;
  const cd h = 0.5 * s;
  return std::exp(h) * std::sinh(h) / h;
}

/// Coefficients of each energy component along e^{t_i x}.
struct EnergyTerms {
  std::array<cd, 4> t, v, z, yx, shear;
};

inline EnergyTerms energy_terms(const ModeShape& m) {
  EnergyTerms e;
  for (int i = 0; i < 4; ++i) {
    const cd t = m.roots[i];
    const cd c = m.coeffs[i];
    const cd d = m.couplings[i];
    e.t[i] = t;
    e.v[i] = m.lambda * c;
    e.z[i] = m.lambda * c * d;
    e.yx[i] = c * d * t;
    e.shear[i] = c * (t + d);
  }
  return e;
}

}  // namespace detail

/// Energy inner product of two modes, every integral in closed form.
inline cd gram_inner_product(const ModeShape& m1, const ModeShape& m2, const BeamParams& p) {
  const auto a = detail::energy_terms(m1);
  const auto b = detail::energy_terms(m2);
  cd s = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const cd w = detail::exp_mean(a.t[i] + std::conj(b.t[j]));
      s += w * (a.v[i] * std::conj(b.v[j]) + a.z[i] * std::conj(b.z[j]) / p.b +
                (p.a / p.b) * a.yx[i] * std::conj(b.yx[j]) + a.shear[i] * std::conj(b.shear[j]));
    }
  }
  return s + p.eta_weight() * m1.tip_eta * std::conj(m2.tip_eta) +
         p.gamma_weight() * m1.tip_gamma * std::conj(m2.tip_gamma);
}

inline ModeShape build_mode(cd lambda, const std::array<cd, 4>& c, const BeamParams& p) {
  require_unit_speed_ratio(p);
  ModeShape m;
  m.lambda = lambda;
  m.coeffs = c;
  m.roots = branch_roots<double>(lambda, p.b);
  m.couplings = mode_couplings<double>(lambda, m.roots, p.b);
  m.params = p;
  m.variant = p.conservative() ? Variant::conservative : Variant::dissipative;
  m.tip_eta = lambda * m.u(1.0);
  m.tip_gamma = lambda * m.y(1.0);
  m.hnorm = std::sqrt(std::max(0.0, gram_inner_product(m, m, p).real()));
  return m;
}

inline ModeShape normalize(const ModeShape& m, const BeamParams& p) {
  if (!(m.hnorm > 0.0)) throw Error(ErrorCode::ZeroMode, "mode has zero energy norm");
  ModeShape n = m;
  for (auto& c : n.coeffs) c /= m.hnorm;
  n.tip_eta = m.tip_eta / m.hnorm;
  n.tip_gamma = m.tip_gamma / m.hnorm;
  n.hnorm = std::sqrt(std::max(0.0, gram_inner_product(n, n, p).real()));
  return n;
}

/// Normalized eigenfunction at a located eigenvalue.
inline ModeShape eigenmode(cd lambda, const BeamParams& p) {
  return normalize(build_mode(lambda, nullspace_coeffs(lambda, p), p), p);
}

/// Interior residuals are maxima over Chebyshev points of (0, 1).
struct EigenResiduals {
  double interior_u = 0.0;  // u'' + y' - lambda^2 u
  double interior_y = 0.0;  // a y'' - b u' - b y - lambda^2 y
  double clamp_u = 0.0;
  double clamp_y = 0.0;
  double tip_force = 0.0;
  double tip_moment = 0.0;

  double max() const {
    return std::max({interior_u, interior_y, clamp_u, clamp_y, tip_force, tip_moment});
  }
};

inline EigenResiduals eigen_residuals(const ModeShape& m, const BeamParams& p, int points = 20) {
  EigenResiduals r;
  const cd l = m.lambda;
  const cd l2 = l * l;
  for (int n = 0; n < points; ++n) {
    const double x = 0.5 - 0.5 * std::cos(std::numbers::pi * (n + 0.5) / points);
    r.interior_u = std::max(r.interior_u, std::abs(m.uxx(x) + m.yx(x) - l2 * m.u(x)));
    r.interior_y =
        std::max(r.interior_y, std::abs(p.a * m.yxx(x) - p.b * m.ux(x) - p.b * m.y(x) - l2 * m.y(x)));
  }
  r.clamp_u = std::abs(m.u(0.0));
  r.clamp_y = std::abs(m.y(0.0));
  r.tip_force = std::abs(l2 * m.u(1.0) + p.k1 * (m.ux(1.0) + m.y(1.0)) + p.k2 * l * m.u(1.0));
  r.tip_moment = std::abs(l2 * m.y(1.0) + p.k3 * m.yx(1.0) + p.k4 * l * m.y(1.0));
  return r;
}

/// Re(lambda) + (k2/k1)|eta|^2 + (a k4/(b k3))|gamma|^2 for a unit mode.
inline double dissipation_defect(const ModeShape& m, const BeamParams& p) {
  return m.lambda.real() + (p.k2 / p.k1) * std::norm(m.tip_eta) +
         p.gamma_dissipation() * std::norm(m.tip_gamma);
}

/// Samples a mode as the state (u, lambda u, y, lambda y, eta, gamma).
inline GridState sample_mode(const ModeShape& m, int N) {
  GridState s(N);
  for (int i = 0; i <= N; ++i) {
    const double x = s.x(i);
    s.u[i] = m.u(x);
    s.y[i] = m.y(x);
    s.v[i] = m.lambda * s.u[i];
    s.z[i] = m.lambda * s.y[i];
  }
  s.eta = m.tip_eta;
  s.gamma = m.tip_gamma;
  return s;
}

inline Eigen::MatrixXcd gram_matrix(const std::vector<ModeShape>& modes, const BeamParams& p) {
  const int n = static_cast<int>(modes.size());
  Eigen::MatrixXcd G(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      G(i, j) = gram_inner_product(modes[i], modes[j], p);
      G(j, i) = std::conj(G(i, j));
    }
  }
  return G;
}

inline double condition_number(const Eigen::MatrixXcd& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.size() == 0) return 1.0;
  const double lo = ev.minCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / lo;
}

/// Normalized modes for the n records of smallest nonnegative imaginary part.
inline std::vector<ModeShape> lowest_modes(const std::vector<EigenvalueRecord>& records, int n,
                                           const BeamParams& p) {
  std::vector<ModeShape> out;
  for (const auto& r : records) {
    if (static_cast<int>(out.size()) >= n) break;
    if (r.lambda.imag() < 0.0) continue;
    out.push_back(eigenmode(r.lambda, p));
  }
  return out;
}

struct RieszEntry {
  int k = 0;
  int family = 0;
  cd lambda;
  cd lambda0;
  double closeness = 0.0;
  double alpha = 0.0;
  double eta_abs = 0.0;
  double gamma_abs = 0.0;
  double pairing_gap = 0.0;
  double family_gap = 0.0;
};

struct RieszDiagnostics {
  std::vector<RieszEntry> entries;
  /// partial_sums[i] is the sum of closeness terms with k <= partial_k[i].
  std::vector<int> partial_k;
  std::vector<double> partial_sums;
};

/// Pairs dissipative and conservative modes by (k, family) for k_min <= k <= K.
inline RieszDiagnostics riesz_closeness(int K, const SpectrumResult& dissipative,
                                        const SpectrumResult& conservative, const BeamParams& p) {
  const BeamParams p0 = p.conservative_twin();
  std::map<std::pair<int, int>, cd> diss, cons;
  for (const auto& r : dissipative.records)
    if (r.k_index && *r.k_index > 0 && *r.k_index <= K && r.family > 0) diss[{*r.k_index, r.family}] = r.lambda;
  for (const auto& r : conservative.records)
    if (r.k_index && *r.k_index > 0 && *r.k_index <= K && r.family > 0) cons[{*r.k_index, r.family}] = r.lambda;
  if (diss.size() != cons.size()) throw Error(ErrorCode::UnpairedFamily, "family labels differ between variants");

  RieszDiagnostics out;
  double running = 0.0;
  int last_k = -1;
  for (const auto& [key, lam] : diss) {
    const auto it = cons.find(key);
    const auto other = cons.find({key.first, 3 - key.second});
    if (it == cons.end() || other == cons.end())
      throw Error(ErrorCode::UnpairedFamily, "no conservative partner for k = " + std::to_string(key.first));
    const ModeShape psi = eigenmode(lam, p);
    const ModeShape phi = eigenmode(it->second, p0);
    // Phase of psi chosen so that <psi, phi> is real and nonnegative.
    const cd overlap = gram_inner_product(psi, phi, p);
    RieszEntry e;
    e.k = key.first;
    e.family = key.second;
    e.lambda = lam;
    e.lambda0 = it->second;
    e.alpha = std::abs(overlap);
    e.closeness = std::max(0.0, psi.hnorm * psi.hnorm + phi.hnorm * phi.hnorm - 2.0 * e.alpha);
    e.eta_abs = std::abs(psi.tip_eta);
    e.gamma_abs = std::abs(psi.tip_gamma);
    e.pairing_gap = std::abs(other->second - lam);
    e.family_gap = std::abs(it->second - lam);
    if (e.k != last_k && last_k >= 0) {
      out.partial_k.push_back(last_k);
      out.partial_sums.push_back(running);
    }
    running += e.closeness;
    last_k = e.k;
    out.entries.push_back(e);
  }
  if (last_k >= 0) {
    out.partial_k.push_back(last_k);
    out.partial_sums.push_back(running);
  }
  return out;
}

inline RieszDiagnostics riesz_closeness(int K, const BeamParams& p, const SpectrumOptions& opt = {}) {
  const int k_max = std::max(K, 10);
  const auto d = spectrum_in_strip(p, k_max, Variant::dissipative, opt);
  const auto c = spectrum_in_strip(p, k_max, Variant::conservative, opt);
  return riesz_closeness(K, d, c, p);
}

}  // namespace tbeam
