#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "tbeam/charfn.hpp"
#include "tbeam/spectrum.hpp"

using namespace tbeam;
using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;
const BeamParams kGeneric{1, 2, 1, 2, 3, 2};
const BeamParams kDegenerate{1, 4 * pi * pi, 2, 1, 2, 5};

std::vector<cd> strip_points(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> re(-4.0, -0.05), im(-60.0, 60.0);
  std::vector<cd> z;
  for (int i = 0; i < n; ++i) z.emplace_back(re(rng), im(rng));
  return z;
}

double rel(cd a, cd b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST_CASE("branch roots square to the quadratic factors") {
  const auto t = branch_roots<double>(cd(0, 1), 1.0);
  CHECK(std::abs(t.t1 * t.t1 + 2.0) < 1e-14);
  for (const cd l : strip_points(100, 1)) {
    for (double b : {2.0, 4 * pi * pi}) {
      const auto r = branch_roots<double>(l, b);
      CHECK(r.t2 == -r.t1);
      CHECK(r.t4 == -r.t3);
      const cd isb(0, std::sqrt(b));
      CHECK(rel(r.t1 * r.t1, l * (isb + l)) < 1e-14);
      CHECK(rel(r.t3 * r.t3, l * (-isb + l)) < 1e-14);
      CHECK(rel(r.t1 * r.t1 - r.t3 * r.t3, 2.0 * l * isb) < 1e-12);
    }
  }
  CHECK_THROWS_AS(branch_roots<double>(cd(0.0), 1.0), Error);
}

TEST_CASE("branch roots follow the large-frequency expansion") {
  const double b = 2.0;
  double worst = 0.0;
  for (int k = 100; k <= 1000; k += 100) {
    const cd l(0, k * pi);
    const auto r = branch_roots<double>(l, b);
    const cd approx = l + cd(0, std::sqrt(b) / 2) + b / (8.0 * l);
    worst = std::max(worst, std::abs(r.t1 - approx) * std::norm(l));
  }
  CHECK(worst < 2.0);
}

TEST_CASE("branch roots are conjugate symmetric in the left strip") {
  for (const cd l : strip_points(100, 2)) {
    const auto a = branch_roots<double>(std::conj(l), 2.0);
    const auto b = branch_roots<double>(l, 2.0);
    CHECK(rel(a.t1, std::conj(b.t3)) < 1e-14);
  }
}

TEST_CASE("principal composition agrees up to sign") {
  for (const cd l : strip_points(50, 3)) {
    const auto a = branch_roots<double>(l, 2.0);
    const auto p = branch_roots_principal<double>(l, 2.0);
    CHECK(std::min(rel(a.t1, p.t1), rel(a.t1, -p.t1)) < 1e-14);
    CHECK(std::min(rel(a.t3, p.t3), rel(a.t3, -p.t3)) < 1e-14);
  }
}

TEST_CASE("mode couplings") {
  for (const cd l : strip_points(50, 4)) {
    const auto t = branch_roots<double>(l, 2.0);
    const auto d = mode_couplings<double>(l, t, 2.0);
    CHECK(d[0] + d[1] == cd(0.0));
    CHECK(d[2] + d[3] == cd(0.0));
    CHECK(rel(d[0], cd(0, -1) * l * std::sqrt(2.0) / t.t1) < 1e-14);
    CHECK(rel(d[0], (l * l - t.t1 * t.t1) / t.t1) < 1e-10);
    // u = e^{t x}, y = d e^{t x} in u'' + y' - lambda^2 u.
    for (int i = 0; i < 4; ++i) {
      for (double x : {0.0, 0.3, 0.8, 1.0}) {
        const cd e = std::exp(t[i] * x);
        const cd res = t[i] * t[i] * e + d[i] * t[i] * e - l * l * e;
        CHECK(std::abs(res) < 1e-10 * std::max(1.0, std::norm(l) * std::abs(e)));
      }
    }
  }
  const cd bp(0, std::sqrt(2.0));
  CHECK_THROWS_AS(mode_couplings<double>(bp, branch_roots<double>(bp, 2.0), 2.0), Error);
}

TEST_CASE("boundary functions") {
  const cd l(-0.3, 5.0);
  CHECK(std::abs(g_functions<double>(l, l, kGeneric).g1) < 1e-15);
  const BeamParams c = kGeneric.conservative_twin();
  for (const cd t : {cd(0.4, 2.0), cd(-1.0, 3.0)}) {
    const auto g = g_functions<double>(t, l, c);
    CHECK(rel(g.g2, (c.k1 + t) / t) < 1e-14);
    CHECK(rel(g.g3, (-t * t + l * l) * (c.k3 * t + l * l) / (l * l * t)) < 1e-14);
  }
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-3, 3), kk(0.1, 4);
  for (int i = 0; i < 100; ++i) {
    const cd lam(u(rng) - 3.5, 3 * u(rng));
    const cd t(u(rng), u(rng));
    const BeamParams p{1, kk(rng), kk(rng), kk(rng), kk(rng), kk(rng)};
    const auto g = g_functions<double>(t, lam, p);
    const cd rho = lam * lam - t * t;
    const auto s = g_functions_stable<double>(t, rho, lam, p);
    CHECK(rel(g.g1, s.g1) < 1e-13);
    CHECK(rel(g.g2, s.g2) < 1e-13);
    CHECK(rel(g.g3, s.g3) < 1e-13);
  }
  CHECK_THROWS_AS(g_functions<double>(cd(0.0), l, kGeneric), Error);
  CHECK_THROWS_AS(g_functions<double>(l, cd(0.0), kGeneric), Error);
}

TEST_CASE("boundary matrix structure and conjugation") {
  for (const cd l : strip_points(40, 6)) {
    const auto a = boundary_matrix<double>(l, kGeneric);
    const auto b = boundary_matrix<double>(std::conj(l), kGeneric);
    for (int i = 0; i < 4; ++i) CHECK(a.m(0, i) == cd(1.0));
    const int swap[4] = {2, 3, 0, 1};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        CHECK(std::abs(b.m(r, c) - std::conj(a.m(r, swap[c]))) <= 1e-12 * std::max(1.0, std::abs(a.m(r, swap[c]))));
    const cd det = determinant<double>(a.m);
    CHECK(rel(det, -16.0 * kGeneric.b * char_fn<double>(l, kGeneric)) < 1e-13);
  }
}

TEST_CASE("characteristic function is conjugate symmetric") {
  for (const BeamParams& p : {kGeneric, kDegenerate}) {
    for (const cd l : strip_points(100, 7)) {
      const cd a = char_fn<double>(std::conj(l), p);
      const cd b = std::conj(char_fn<double>(l, p));
      CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("characteristic function matches its expansion to fourth order") {
  for (const BeamParams& p : {kGeneric, kDegenerate}) {
    double worst = 0.0;
    for (int k = 50; k <= 500; k += 10) {
      const cd l(-0.1, k * pi);
      const auto e = f_expansion_terms<double>(l, p);
      worst = std::max(worst, std::abs(char_fn<double>(l, p) - f_expansion_sum<double>(l, e)) * std::pow(std::abs(l), 4));
    }
    CHECK(worst < 1e4);
  }
}

TEST_CASE("regularized function is single valued across the branch segment") {
  for (double h : {0.3, 0.9, 1.3}) {
    const cd left(-1e-9, h), right(1e-9, h);
    const cd a = char_fn_regularized<double>(left, kGeneric);
    const cd b = char_fn_regularized<double>(right, kGeneric);
    CHECK(std::abs(a - b) < 1e-6 * std::abs(a));
  }
}

TEST_CASE("derivative") {
  for (const cd l : strip_points(20, 8)) {
    const cd d = char_fn_derivative<double>(l, kGeneric);
    const cd dc = char_fn_derivative<double>(std::conj(l), kGeneric);
    CHECK(std::abs(dc - std::conj(d)) <= 1e-6 * std::max(1.0, std::abs(d)));
    const double delta = 1e-8 * std::max(1.0, std::abs(l));
    const cd secant = (char_fn<double>(l + delta, kGeneric) - char_fn<double>(l - delta, kGeneric)) / (2 * delta);
    CHECK(std::abs(secant - d) <= 1e-6 * std::max(1.0, std::abs(d)));
  }
  CHECK_THROWS_AS(char_fn_derivative<double>(cd(0, std::sqrt(2.0)), kGeneric), Error);
  CHECK_THROWS_AS(char_fn_derivative<double>(cd(1e-8, 0), kGeneric), Error);
}

TEST_CASE("argument principle on a zero-free box") {
  const Rect right{0.2, 1.0, 10.0, 12.0};
  CHECK(std::abs(contour_integral_count(right, kGeneric)) < 0.05);
}
