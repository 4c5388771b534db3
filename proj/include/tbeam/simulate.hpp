#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tbeam/error.hpp"
#include "tbeam/grid.hpp"
#include "tbeam/modes.hpp"
#include "tbeam/params.hpp"

namespace tbeam {

/// Finite-difference semi-discretization on nodes x_j = j h, j = 1..N.
///
/// Potential V = 1/2 sum_j h (s_j^2 + (a/b) w_j^2) with cell shear
/// s_j = (u_j - u_{j-1})/h + (y_j + y_{j-1})/2 and bending w_j = (y_j - y_{j-1})/h.
/// Node masses are h (u) and h/b (y), half of that at x = 1 plus the tip
/// inertias 1/k1 and a/(b k3). Tip damping acts on v_N and z_N only, so
/// eta = v_N and gamma = z_N. The state is (u, v, y, z), each block of length N.
struct DiscreteGenerator {
  int N = 0;
  double h = 0.0;
  BeamParams params;
  /// Interleaved configuration (u_1, y_1, u_2, y_2, ...).
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;
  Eigen::VectorXd damping;

  int dim() const { return 4 * N; }
  static int qi(int node, bool shear) { return 2 * (node - 1) + (shear ? 1 : 0); }

  /// Generator as a dense matrix in (u, v, y, z) block order.
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim(), dim());
    const Eigen::MatrixXd K(stiffness);
    for (int j = 1; j <= N; ++j) {
      for (int s = 0; s < 2; ++s) {
        const int pos = position(j, s == 1, false);
        const int vel = position(j, s == 1, true);
        A(pos, vel) = 1.0;
        const int r = qi(j, s == 1);
        for (int l = 1; l <= N; ++l) {
          for (int t = 0; t < 2; ++t) {
            const double kv = K(r, qi(l, t == 1));
            if (kv != 0.0) A(vel, position(l, t == 1, false)) = -kv / mass[r];
          }
        }
        A(vel, vel) -= damping[r] / mass[r];
      }
    }
    return A;
  }

  /// Index in the (u, v, y, z) layout.
  int position(int node, bool shear, bool velocity) const {
    const int block = shear ? (velocity ? 3 : 2) : (velocity ? 1 : 0);
    return block * N + node - 1;
  }

  Eigen::VectorXd configuration(const Eigen::VectorXd& X) const {
    Eigen::VectorXd q(2 * N);
    for (int j = 1; j <= N; ++j) {
      q[qi(j, false)] = X[position(j, false, false)];
      q[qi(j, true)] = X[position(j, true, false)];
    }
    return q;
  }

  Eigen::VectorXd velocity(const Eigen::VectorXd& X) const {
    Eigen::VectorXd p(2 * N);
    for (int j = 1; j <= N; ++j) {
      p[qi(j, false)] = X[position(j, false, true)];
      p[qi(j, true)] = X[position(j, true, true)];
    }
    return p;
  }

  Eigen::VectorXd assemble(const Eigen::VectorXd& q, const Eigen::VectorXd& p) const {
    Eigen::VectorXd X(dim());
    for (int j = 1; j <= N; ++j) {
      X[position(j, false, false)] = q[qi(j, false)];
      X[position(j, true, false)] = q[qi(j, true)];
      X[position(j, false, true)] = p[qi(j, false)];
      X[position(j, true, true)] = p[qi(j, true)];
    }
    return X;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& X) const {
    const Eigen::VectorXd q = configuration(X);
    const Eigen::VectorXd p = velocity(X);
    const Eigen::VectorXd force = -(stiffness * q) - damping.cwiseProduct(p);
    return assemble(p, force.cwiseQuotient(mass));
  }

  /// Discrete energy inner product Y^T W X with W = diag(K, M).
  double inner(const Eigen::VectorXd& X, const Eigen::VectorXd& Y) const {
    const Eigen::VectorXd qx = configuration(X), qy = configuration(Y);
    const Eigen::VectorXd px = velocity(X), py = velocity(Y);
    return qy.dot(stiffness * qx) + py.dot(mass.cwiseProduct(px));
  }

  double energy(const Eigen::VectorXd& X) const { return 0.5 * inner(X, X); }
};

inline DiscreteGenerator assemble_generator(const BeamParams& p, int N) {
  if (N < 16) throw Error(ErrorCode::ResolutionTooLow, "generator needs N >= 16");
  DiscreteGenerator g;
  g.N = N;
  g.h = 1.0 / N;
  g.params = p;
  const double h = g.h;
  const double ab = p.a / p.b;
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 1; j <= N; ++j) {
    // s_j and w_j as sparse rows over the configuration.
    std::vector<std::pair<int, double>> s, w;
    s.push_back({DiscreteGenerator::qi(j, false), 1.0 / h});
    s.push_back({DiscreteGenerator::qi(j, true), 0.5});
    w.push_back({DiscreteGenerator::qi(j, true), 1.0 / h});
    if (j > 1) {
      s.push_back({DiscreteGenerator::qi(j - 1, false), -1.0 / h});
      s.push_back({DiscreteGenerator::qi(j - 1, true), 0.5});
      w.push_back({DiscreteGenerator::qi(j - 1, true), -1.0 / h});
    }
    for (const auto& [r, a] : s)
      for (const auto& [c, b] : s) trip.emplace_back(r, c, h * a * b);
    for (const auto& [r, a] : w)
      for (const auto& [c, b] : w) trip.emplace_back(r, c, h * ab * a * b);
  }
  g.stiffness.resize(2 * N, 2 * N);
  g.stiffness.setFromTriplets(trip.begin(), trip.end());
  g.mass.resize(2 * N);
  g.damping = Eigen::VectorXd::Zero(2 * N);
  for (int j = 1; j <= N; ++j) {
    const double share = j == N ? 0.5 : 1.0;
    g.mass[DiscreteGenerator::qi(j, false)] = share * h;
    g.mass[DiscreteGenerator::qi(j, true)] = share * h / p.b;
  }
  g.mass[DiscreteGenerator::qi(N, false)] += p.eta_weight();
  g.mass[DiscreteGenerator::qi(N, true)] += p.gamma_weight();
  g.damping[DiscreteGenerator::qi(N, false)] = p.k2 / p.k1;
  g.damping[DiscreteGenerator::qi(N, true)] = p.gamma_dissipation();
  return g;
}

/// Real and imaginary parts of a grid state as discrete states.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> to_discrete(const DiscreteGenerator& g, const GridState& U) {
  if (U.N != g.N) throw Error(ErrorCode::GridMismatch, "state and generator resolutions differ");
  Eigen::VectorXd re(g.dim()), im(g.dim());
  for (int j = 1; j <= g.N; ++j) {
    const std::array<std::pair<bool, bool>, 4> slots{{{false, false}, {false, true}, {true, false}, {true, true}}};
    for (const auto& [shear, vel] : slots) {
      const cd val = shear ? (vel ? U.z[j] : U.y[j]) : (vel ? U.v[j] : U.u[j]);
      re[g.position(j, shear, vel)] = val.real();
      im[g.position(j, shear, vel)] = val.imag();
    }
  }
  return {re, im};
}

inline GridState to_grid(const DiscreteGenerator& g, const Eigen::VectorXd& re, const Eigen::VectorXd& im) {
  GridState U(g.N);
  for (int j = 1; j <= g.N; ++j) {
    U.u[j] = cd(re[g.position(j, false, false)], im[g.position(j, false, false)]);
    U.v[j] = cd(re[g.position(j, false, true)], im[g.position(j, false, true)]);
    U.y[j] = cd(re[g.position(j, true, false)], im[g.position(j, true, false)]);
    U.z[j] = cd(re[g.position(j, true, true)], im[g.position(j, true, true)]);
  }
  U.eta = U.v[g.N];
  U.gamma = U.z[g.N];
  return U;
}

enum class EigenMethod { automatic, dense, shift_invert };

namespace detail {

inline std::vector<cd> select_low(std::vector<cd> ev, int m) {
  std::vector<cd> up;
  for (const auto& z : ev)
    if (z.imag() >= -1e-12 * std::max(1.0, std::abs(z))) up.push_back({z.real(), std::max(0.0, z.imag())});
  std::sort(up.begin(), up.end(), [](const cd& a, const cd& b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  if (static_cast<int>(up.size()) > m) up.resize(m);
  return up;
}

/// Arnoldi on A^{-1}; returns Ritz values of A whose residual is converged.
inline std::vector<cd> shift_invert_eigs(const DiscreteGenerator& g, int wanted) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> K(g.stiffness);
  if (K.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFailure, "stiffness factorization failed");
  auto apply_inverse = [&](const Eigen::VectorXd& B) {
    const Eigen::VectorXd bq = g.configuration(B);
    const Eigen::VectorXd bp = g.velocity(B);
    const Eigen::VectorXd p = bq;
    const Eigen::VectorXd q = K.solve(-(g.mass.cwiseProduct(bp)) - g.damping.cwiseProduct(p));
    return g.assemble(q, p);
  };
  const int n = g.dim();
  for (int kdim = std::min(n, std::max(80, 3 * wanted + 20));; kdim = std::min(n, 2 * kdim)) {
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, kdim + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(kdim + 1, kdim);
    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0[i] = 1.0 + 0.5 * std::sin(1.0 + 3.7 * i);
    V.col(0) = v0.normalized();
    int built = kdim;
    for (int j = 0; j < kdim; ++j) {
      Eigen::VectorXd w = apply_inverse(V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd c = V.leftCols(j + 1).transpose() * w;
        w -= V.leftCols(j + 1) * c;
        H.col(j).head(j + 1) += c;
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) < 1e-14) {
        built = j + 1;
        break;
      }
      V.col(j + 1) = w / H(j + 1, j);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(built, built));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFailure, "Hessenberg eigensolve failed");
    const Eigen::VectorXcd theta = es.eigenvalues();
    const Eigen::MatrixXcd Y = es.eigenvectors();
    std::vector<std::pair<double, cd>> ritz;
    for (int i = 0; i < built; ++i) {
      const double mag = std::abs(theta[i]);
      if (mag == 0.0) continue;
      const double res = built < kdim ? 0.0 : std::abs(H(built, built - 1) * Y(built - 1, i));
      ritz.push_back({res / mag, 1.0 / theta[i]});
    }
    std::sort(ritz.begin(), ritz.end(), [](const auto& a, const auto& b) {
      return std::abs(a.second) < std::abs(b.second);
    });
    std::vector<cd> out;
    int converged = 0;
    for (const auto& [rel, lam] : ritz) {
      if (rel > 1e-10) break;
      out.push_back(lam);
      ++converged;
    }
    if (converged >= 2 * wanted + 2 || kdim == n || built < kdim) return out;
  }
}

}  // namespace detail

/// The m eigenvalues with Im >= 0 closest to the real axis. The Krylov path
/// searches the neighbourhood of 0, which holds the low-frequency spectrum.
inline std::vector<cd> generator_spectrum(const DiscreteGenerator& g, int m,
                                          EigenMethod method = EigenMethod::automatic) {
  if (m > g.dim()) throw Error(ErrorCode::InvalidConfig, "more eigenvalues requested than the dimension");
  if (method == EigenMethod::automatic) method = g.dim() <= 400 ? EigenMethod::dense : EigenMethod::shift_invert;
  std::vector<cd> ev;
  if (method == EigenMethod::dense) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(g.dense(), false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFailure, "dense eigensolve failed");
    for (int i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()[i]);
  } else {
    ev = detail::shift_invert_eigs(g, m);
  }
  auto low = detail::select_low(std::move(ev), m);
  if (static_cast<int>(low.size()) < m) throw Error(ErrorCode::EigensolveFailure, "too few converged eigenvalues");
  return low;
}

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energies;
  double fitted_exponent = 0.0;
  double fitted_constant = 0.0;
};

/// Implicit midpoint rule. The update reduces to one SPD solve per step with
/// M + dt^2/4 K + dt/2 D, factored once.
inline EnergyTrace integrate(const DiscreteGenerator& g, const GridState& U0, double T, double dt,
                             GridState* final_state = nullptr) {
  if (!(dt > 0.0) || dt > 0.5 * g.h * (1.0 + 1e-12))
    throw Error(ErrorCode::InvalidConfig, "time step must satisfy 0 < dt <= h/2");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidConfig, "horizon must be positive");
  const auto [re, im] = to_discrete(g, U0);
  Eigen::MatrixXd q(2 * g.N, 2), p(2 * g.N, 2);
  q.col(0) = g.configuration(re);
  q.col(1) = g.configuration(im);
  p.col(0) = g.velocity(re);
  p.col(1) = g.velocity(im);

  Eigen::SparseMatrix<double> S = (0.25 * dt * dt) * g.stiffness;
  for (int i = 0; i < 2 * g.N; ++i) S.coeffRef(i, i) += g.mass[i] + 0.5 * dt * g.damping[i];
  S.makeCompressed();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(S);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::SingularSolve, "midpoint system is singular");

  auto energy = [&]() {
    double e = 0.0;
    for (int c = 0; c < 2; ++c)
      e += 0.5 * (q.col(c).dot(g.stiffness * q.col(c)) + p.col(c).dot(g.mass.cwiseProduct(p.col(c))));
    return e;
  };
  const long steps = std::lround(std::ceil(T / dt - 1e-9));
  const long every = std::max(1L, static_cast<long>(T / (1000.0 * dt)));
  EnergyTrace tr;
  tr.times.push_back(0.0);
  tr.energies.push_back(energy());
  const Eigen::VectorXd lumped = g.mass - 0.5 * dt * g.damping;
  for (long n = 1; n <= steps; ++n) {
    const Eigen::MatrixXd Kq = g.stiffness * q;
    const Eigen::MatrixXd Kp = g.stiffness * p;
    const Eigen::MatrixXd rhs = lumped.asDiagonal() * p - (0.25 * dt * dt) * Kp - dt * Kq;
    const Eigen::MatrixXd p1 = solver.solve(rhs);
    q += (0.5 * dt) * (p + p1);
    p = p1;
    if (n % every == 0 || n == steps) {
      tr.times.push_back(n * dt);
      tr.energies.push_back(energy());
    }
  }
  if (final_state) {
    *final_state = to_grid(g, g.assemble(q.col(0), p.col(0)), g.assemble(q.col(1), p.col(1)));
  }
  return tr;
}

struct DecayFit {
  double exponent = 0.0;
  double constant = 0.0;
  double sup_tE = 0.0;
  int samples = 0;
};

/// Least-squares slope of log E against log t over [w0 T, w1 T].
inline DecayFit fit_decay(const EnergyTrace& tr, double w0 = 0.25, double w1 = 1.0) {
  if (tr.times.empty() || !(w0 >= 0.0) || !(w1 > w0))
    throw Error(ErrorCode::WindowTooShort, "empty trace or invalid window");
  const double T = tr.times.back();
  std::vector<double> lx, ly;
  DecayFit f;
  for (size_t i = 0; i < tr.times.size(); ++i) {
    const double t = tr.times[i];
    if (t <= 0.0 || t < w0 * T - 1e-12 || t > w1 * T + 1e-12) continue;
    if (!(tr.energies[i] > 0.0)) continue;
    lx.push_back(std::log(t));
    ly.push_back(std::log(tr.energies[i]));
    f.sup_tE = std::max(f.sup_tE, t * tr.energies[i]);
  }
  f.samples = static_cast<int>(lx.size());
  if (f.samples < 3) throw Error(ErrorCode::WindowTooShort, "fewer than three samples in the window");
  Eigen::MatrixXd X(f.samples, 2);
  Eigen::VectorXd Y(f.samples);
  for (int i = 0; i < f.samples; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = lx[i];
    Y[i] = ly[i];
  }
  const Eigen::Vector2d c = X.colPivHouseholderQr().solve(Y);
  f.exponent = c[1];
  f.constant = std::exp(c[0]);
  return f;
}

inline double sup_tE(const EnergyTrace& tr, double t0, double t1) {
  double s = 0.0;
  for (size_t i = 0; i < tr.times.size(); ++i)
    if (tr.times[i] >= t0 - 1e-12 && tr.times[i] <= t1 + 1e-12) s = std::max(s, tr.times[i] * tr.energies[i]);
  return s;
}

struct SpectralExpansion {
  std::vector<ModeShape> modes;
  Eigen::VectorXcd coeffs;
  double gram_condition = 0.0;
};

/// Least-squares coefficients of U0 in the span of the given unit modes.
inline SpectralExpansion spectral_expansion(const GridState& U0, std::vector<ModeShape> modes,
                                            const BeamParams& p) {
  SpectralExpansion ex;
  const int n = static_cast<int>(modes.size());
  const Eigen::MatrixXcd G = gram_matrix(modes, p);
  ex.gram_condition = condition_number(G);
  if (!(ex.gram_condition <= 1e8)) throw Error(ErrorCode::IllConditionedGram, "mode Gram matrix is ill-conditioned");
  Eigen::VectorXcd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = grid_inner_product(U0, sample_mode(modes[i], U0.N), p);
  // G(i, j) = <psi_i, psi_j>; the normal equations use its transpose.
  ex.coeffs = G.transpose().ldlt().solve(rhs);
  ex.modes = std::move(modes);
  return ex;
}

/// sum_l c_l e^{lambda_l t} psi_l sampled on N + 1 nodes.
inline GridState spectral_solution(const SpectralExpansion& ex, double t, int N) {
  GridState U(N);
  for (size_t l = 0; l < ex.modes.size(); ++l) {
    const cd w = ex.coeffs[static_cast<int>(l)] * std::exp(ex.modes[l].lambda * t);
    const GridState s = sample_mode(ex.modes[l], N);
    U.u += w * s.u;
    U.v += w * s.v;
    U.y += w * s.y;
    U.z += w * s.z;
    U.eta += w * s.eta;
    U.gamma += w * s.gamma;
  }
  return U;
}

inline GridState spectral_solution(const GridState& U0, std::vector<ModeShape> modes, double t,
                                   const BeamParams& p) {
  return spectral_solution(spectral_expansion(U0, std::move(modes), p), t, U0.N);
}

/// Smooth deterministic right-hand side with a few random Fourier components.
inline GridState smooth_random_state(int N, unsigned seed, int terms = 4) {
  std::vector<double> c;
  unsigned s = seed * 2654435761u + 12345u;
  auto next = [&]() {
    s = s * 1664525u + 1013904223u;
    return (static_cast<double>(s >> 8) / 16777216.0) * 2.0 - 1.0;
  };
  for (int i = 0; i < 6 * terms; ++i) c.push_back(next());
  GridState f(N);
  for (int m = 0; m <= N; ++m) {
    const double x = f.x(m);
    cd a[4] = {0.0, 0.0, 0.0, 0.0};
    for (int t = 0; t < terms; ++t) {
      const double w = std::numbers::pi * (t + 0.5);
      for (int comp = 0; comp < 4; ++comp) a[comp] += c[6 * t + comp] * std::sin(w * x) / (1.0 + t);
    }
    f.u[m] = a[0];
    f.v[m] = a[1];
    f.y[m] = a[2];
    f.z[m] = a[3];
  }
  f.eta = c[4];
  f.gamma = c[5];
  return f;
}

/// Initial data in the operator domain: A^{-1} applied to a smooth state.
inline GridState domain_initial_data(int N, const BeamParams& p, unsigned seed = 1) {
  return solve_static(smooth_random_state(N, seed), p);
}

}  // namespace tbeam
