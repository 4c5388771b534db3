#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

#include "tbeam/error.hpp"
#include "tbeam/params.hpp"

namespace tbeam {

/// State (u, v, y, z, eta, gamma) sampled at x_m = m/N, m = 0..N.
struct GridState {
  int N = 0;
  Eigen::VectorXcd u, v, y, z;
  std::complex<double> eta{0.0, 0.0};
  std::complex<double> gamma{0.0, 0.0};

  GridState() = default;
  explicit GridState(int n)
      : N(n),
        u(Eigen::VectorXcd::Zero(n + 1)),
        v(Eigen::VectorXcd::Zero(n + 1)),
        y(Eigen::VectorXcd::Zero(n + 1)),
        z(Eigen::VectorXcd::Zero(n + 1)) {}

  double h() const { return 1.0 / N; }
  double x(int m) const { return static_cast<double>(m) / N; }
};

using GridFn = std::function<std::complex<double>(double)>;

/// Samples four profiles; the tip values default to v(1) and z(1).
inline GridState sample_state(int N, const GridFn& u, const GridFn& v, const GridFn& y,
                              const GridFn& z) {
  GridState s(N);
  for (int m = 0; m <= N; ++m) {
    const double x = s.x(m);
    s.u[m] = u(x);
    s.v[m] = v(x);
    s.y[m] = y(x);
    s.z[m] = z(x);
  }
  s.eta = s.v[N];
  s.gamma = s.z[N];
  return s;
}

namespace grid {

inline void require_resolution(int N) {
  if (N < 6) throw Error(ErrorCode::GridMismatch, "grid needs N >= 6");
}

/// Fourth-order first derivative: five-point central stencil in the interior,
/// one-sided five-point stencils at the two nodes nearest each end.
inline Eigen::VectorXcd d1(const Eigen::VectorXcd& f, double h) {
  const int N = static_cast<int>(f.size()) - 1;
  require_resolution(N);
  Eigen::VectorXcd d(N + 1);
  const double s = 1.0 / (12.0 * h);
  d[0] = s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
  d[1] = s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
  for (int m = 2; m <= N - 2; ++m) d[m] = s * (f[m - 2] - 8.0 * f[m - 1] + 8.0 * f[m + 1] - f[m + 2]);
  d[N - 1] = -s * (-3.0 * f[N] - 10.0 * f[N - 1] + 18.0 * f[N - 2] - 6.0 * f[N - 3] + f[N - 4]);
  d[N] = -s * (-25.0 * f[N] + 48.0 * f[N - 1] - 36.0 * f[N - 2] + 16.0 * f[N - 3] - 3.0 * f[N - 4]);
  return d;
}

/// Fourth-order second derivative with six-point one-sided end stencils.
inline Eigen::VectorXcd d2(const Eigen::VectorXcd& f, double h) {
  const int N = static_cast<int>(f.size()) - 1;
  require_resolution(N);
  Eigen::VectorXcd d(N + 1);
  const double s = 1.0 / (12.0 * h * h);
  auto left0 = [&](auto g) {
    return s * (45.0 * g(0) - 154.0 * g(1) + 214.0 * g(2) - 156.0 * g(3) + 61.0 * g(4) - 10.0 * g(5));
  };
  auto left1 = [&](auto g) {
    return s * (10.0 * g(0) - 15.0 * g(1) - 4.0 * g(2) + 14.0 * g(3) - 6.0 * g(4) + g(5));
  };
  auto fwd = [&](int i) { return f[i]; };
  auto bwd = [&](int i) { return f[N - i]; };
  d[0] = left0(fwd);
  d[1] = left1(fwd);
  for (int m = 2; m <= N - 2; ++m)
    d[m] = s * (-f[m - 2] + 16.0 * f[m - 1] - 30.0 * f[m] + 16.0 * f[m + 1] - f[m + 2]);
  d[N - 1] = left1(bwd);
  d[N] = left0(bwd);
  return d;
}

/// Composite Simpson weights on N + 1 nodes (N even).
inline Eigen::VectorXd simpson_weights(int N, double h) {
  if (N < 2 || N % 2 != 0) throw Error(ErrorCode::GridMismatch, "Simpson quadrature needs even N");
  Eigen::VectorXd w(N + 1);
  for (int m = 0; m <= N; ++m) w[m] = (m == 0 || m == N) ? 1.0 : (m % 2 == 1 ? 4.0 : 2.0);
  return w * (h / 3.0);
}

/// C[m] = integral of f over [0, x_m], fourth order. Each cell uses the
/// cubic through four neighbouring nodes, shifted one-sided at the ends.
inline Eigen::VectorXcd cumulative_integral(const Eigen::VectorXcd& f, double h) {
  const int N = static_cast<int>(f.size()) - 1;
  require_resolution(N);
  Eigen::VectorXcd c(N + 1);
  const double s = h / 24.0;
  c[0] = 0.0;
  c[1] = s * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
  for (int m = 1; m <= N - 2; ++m)
    c[m + 1] = c[m] + s * (-f[m - 1] + 13.0 * f[m] + 13.0 * f[m + 1] - f[m + 2]);
  c[N] = c[N - 1] + s * (f[N - 3] - 5.0 * f[N - 2] + 19.0 * f[N - 1] + 9.0 * f[N]);
  return c;
}

inline void require_same_grid(const GridState& a, const GridState& b) {
  if (a.N != b.N || a.u.size() != a.N + 1 || b.u.size() != b.N + 1)
    throw Error(ErrorCode::GridMismatch, "states live on different grids");
}

}  // namespace grid

/// Energy inner product, linear in the first argument. Integrals by composite
/// Simpson, derivatives by fourth-order differences.
inline std::complex<double> grid_inner_product(const GridState& U, const GridState& W,
                                               const BeamParams& p) {
  grid::require_same_grid(U, W);
  const double h = U.h();
  const auto w = grid::simpson_weights(U.N, h);
  const Eigen::VectorXcd uy = grid::d1(U.u, h) + U.y;
  const Eigen::VectorXcd wy = grid::d1(W.u, h) + W.y;
  const Eigen::VectorXcd yx = grid::d1(U.y, h);
  const Eigen::VectorXcd wyx = grid::d1(W.y, h);
  std::complex<double> sum = 0.0;
  for (int m = 0; m <= U.N; ++m) {
    const std::complex<double> integrand = U.v[m] * std::conj(W.v[m]) +
                                           U.z[m] * std::conj(W.z[m]) / p.b +
                                           (p.a / p.b) * yx[m] * std::conj(wyx[m]) +
                                           uy[m] * std::conj(wy[m]);
    sum += w[m] * integrand;
  }
  return sum + p.eta_weight() * U.eta * std::conj(W.eta) +
         p.gamma_weight() * U.gamma * std::conj(W.gamma);
}

inline double grid_norm(const GridState& U, const BeamParams& p) {
  return std::sqrt(std::max(0.0, grid_inner_product(U, U, p).real()));
}

/// The evolution operator applied with fourth-order differences; tip rows use
/// the stored eta and gamma.
inline GridState apply_operator(const GridState& U, const BeamParams& p) {
  const double h = U.h();
  const Eigen::VectorXcd ux = grid::d1(U.u, h);
  const Eigen::VectorXcd yx = grid::d1(U.y, h);
  const Eigen::VectorXcd uxx = grid::d2(U.u, h);
  const Eigen::VectorXcd yxx = grid::d2(U.y, h);
  GridState r(U.N);
  r.u = U.v;
  r.v = uxx + yx;
  r.y = U.z;
  r.z = p.a * yxx - p.b * (ux + U.y);
  const int N = U.N;
  r.eta = -p.k1 * (ux[N] + U.y[N]) - p.k2 * U.eta;
  r.gamma = -p.k3 * yx[N] - p.k4 * U.gamma;
  return r;
}

/// Solves A U = f by the constructive inversion: v = f1, z = f3, then the two
/// tip equations fix the integration constants a1 and a2.
inline GridState solve_static(const GridState& f, const BeamParams& p) {
  const int N = f.N;
  const double h = f.h();
  grid::require_resolution(N);
  constexpr double kMaxCondition = 1e12;
  if (1.0 / p.k1 > kMaxCondition || 1.0 / p.k3 > kMaxCondition || 1.0 / p.a > kMaxCondition)
    throw Error(ErrorCode::DegenerateBoundarySystem, "boundary equations are ill-conditioned");

  GridState U(N);
  U.v = f.u;
  U.z = f.y;
  U.eta = f.u[N];
  U.gamma = f.y[N];

  const Eigen::VectorXcd F2 = grid::cumulative_integral(f.v, h);
  const Eigen::VectorXcd G2x = grid::cumulative_integral(F2, h);
  const Eigen::VectorXcd G2 = grid::cumulative_integral(G2x, h);
  const Eigen::VectorXcd G4x = grid::cumulative_integral(f.z, h);
  const Eigen::VectorXcd G4 = grid::cumulative_integral(G4x, h);

  const std::complex<double> a1 = -(f.eta + p.k2 * U.eta) / p.k1 - F2[N];
  const std::complex<double> a2 = -(f.gamma + p.k4 * U.gamma) / p.k3 - G4x[N] / p.a -
                                  (p.b / p.a) * G2x[N] - (p.b / p.a) * a1;

  for (int m = 0; m <= N; ++m) {
    const double x = U.x(m);
    U.y[m] = G4[m] / p.a + (p.b / p.a) * G2[m] + (p.b / p.a) * a1 * (x * x / 2.0) + a2 * x;
  }
  const Eigen::VectorXcd shear = F2 - U.y;
  U.u = grid::cumulative_integral(shear, h);
  for (int m = 0; m <= N; ++m) U.u[m] += a1 * U.x(m);
  return U;
}

}  // namespace tbeam
