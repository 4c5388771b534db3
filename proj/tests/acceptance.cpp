// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "tbeam/asymptotics.hpp"
#include "tbeam/charfn.hpp"
#include "tbeam/modes.hpp"
#include "tbeam/simulate.hpp"
#include "tbeam/spectrum.hpp"

using namespace tbeam;

namespace {

constexpr double pi = std::numbers::pi;
const BeamParams kGeneric{1, 2, 1, 2, 3, 2};
const BeamParams kDegenerate{1, 4 * pi * pi, 2, 1, 2, 5};

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[320];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const EigenvalueRecord* find_record(const SpectrumResult& s, int k, int j) {
  for (const auto& r : s.records)
    if (r.k_index && *r.k_index == k && r.family == j) return &r;
  return nullptr;
}

struct Shared {
  SpectrumResult degenerate;
  double degenerate_seconds = 0.0;
  SpectrumResult generic;
  SpectrumResult generic_cons;
  SpectrumResult degenerate_cons;
};

void degenerate_values(const Shared& s) {
  const int ks[5] = {200, 400, 600, 800, 1000};
  bool ok = s.degenerate_seconds < 60.0;
  std::string detail;
  for (int k : ks) {
    const auto* r1 = find_record(s.degenerate, k, 1);
    const auto* r2 = find_record(s.degenerate, k, 2);
    if (!r1 || !r2) {
      ok = false;
      detail += " k=" + std::to_string(k) + " missing";
      continue;
    }
    const double kk = k;
    const double v1 = kk * kk * r1->lambda.real(), v2 = kk * kk * r2->lambda.real();
    ok = ok && v1 >= -0.2032 && v1 <= -0.2021 && v2 >= -1.0140 && v2 <= -1.0125;
    detail += " k=" + std::to_string(k) + fmt(" (%.6f, %.5f)", v1, v2);
  }
  report(1, "degenerate-case values", ok, fmt("%.1f s;", s.degenerate_seconds) + detail);
}

void asymptotic_limits(const Shared& s) {
  const auto* r1 = find_record(s.degenerate, 1000, 1);
  const auto* r2 = find_record(s.degenerate, 1000, 2);
  if (!r1 || !r2) return report(2, "asymptotic limits", false, "k=1000 records missing");
  const double l1 = -kDegenerate.k1 * kDegenerate.k2 / (pi * pi), l2 = -kDegenerate.k1 * kDegenerate.k4 / (pi * pi);
  const double e1 = std::abs(1e6 * r1->lambda.real() / l1 - 1.0);
  const double e2 = std::abs(1e6 * r2->lambda.real() / l2 - 1.0);
  report(2, "asymptotic limits", e1 < 1e-3 && e2 < 1e-3, fmt("rel err %.3e, %.3e (limit 1e-3)", e1, e2));
}

void generic_convergence(const Shared& s) {
  const auto c = asymptotic_coefficients(kGeneric);
  const double alpha[2] = {c.alpha1, c.alpha2};
  bool ok = c.beta[0] > 0.0 && c.beta[1] > 0.0;
  std::string detail;
  for (int j = 1; j <= 2; ++j) {
    const auto* r = find_record(s.generic, 500, j);
    if (!r) {
      ok = false;
      detail += " j=" + std::to_string(j) + " missing";
      continue;
    }
    const double k = 500.0;
    const double ea = std::abs(k * (r->lambda.imag() - k * pi) / alpha[j - 1] - 1.0);
    const double eb = std::abs(-k * k * r->lambda.real() / c.beta[j - 1] - 1.0);
    ok = ok && ea < 1e-2 && eb < 5e-2;
    detail += " j=" + std::to_string(j) + fmt(": alpha err %.2e, beta err %.2e, beta=%.5f;", ea, eb, c.beta[j - 1]);
  }
  report(3, "generic-regime convergence", ok, detail);
}

void identity_suite() {
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  double vieta_sum = 0.0, vieta_prod = 0.0, disc = 0.0, omega = 0.0, beta0 = 0.0, printed_gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    const BeamParams p{1, 8 * u(rng), u(rng), u(rng), u(rng), u(rng)};
    const auto g = gamma_coefficients(p);
    const auto a = alpha_coefficients(g.gamma1, g.gamma2);
    const double scale = std::max(1.0, g.gamma1 * g.gamma1);
    vieta_sum = std::max(vieta_sum, std::abs(a.alpha1 + a.alpha2 - g.gamma1) / std::max(1.0, std::abs(g.gamma1)));
    vieta_prod = std::max(vieta_prod, std::abs(a.alpha1 * a.alpha2 - g.gamma2) / scale);
    disc = std::max(disc, std::abs(g.gamma1 * g.gamma1 - 4 * g.gamma2 - discriminant_completed_square(p)) / scale);
    const double sb = std::sqrt(p.b), c = std::cos(sb), shift = p.k1 - p.k3 - 0.5 * sb * std::sin(sb);
    const double printed = (2 * shift * shift + 0.25 * p.b * (c * c - 4 * c + 3)) / (2 * pi * pi);
    printed_gap = std::max(printed_gap, std::abs(g.gamma1 * g.gamma1 - 4 * g.gamma2 - printed) / scale);
    if (condition_c1(p)) {
      const auto c = asymptotic_coefficients(p);
      const double root = std::sqrt(g.gamma1 * g.gamma1 - 4 * g.gamma2);
      omega = std::max(omega, std::abs(c.omega1[0] - std::complex<double>(0, -root)) / std::max(1.0, root));
      omega = std::max(omega, std::abs(c.omega1[1] - std::complex<double>(0, root)) / std::max(1.0, root));
    }
    const BeamParams q = p.conservative_twin();
    const auto c0 = asymptotic_coefficients(q);
    if (gamma_coefficients(q).gamma3 != 0.0) beta0 = std::max(beta0, 1.0);
    beta0 = std::max({beta0, std::abs(c0.beta[0]), std::abs(c0.beta[1])});
  }
  const bool ok = vieta_sum <= 1e-13 && vieta_prod <= 1e-13 && disc <= 1e-12 && omega <= 1e-12 && beta0 == 0.0;
  char buf[320];
  std::snprintf(buf, sizeof buf, "100 draws; vieta %.1e/%.1e, discriminant %.1e, omega1 %.1e, conservative beta %.1e; "
                "with b/4 (cos^2 - 4 cos + 3) tail %.1e",
                vieta_sum, vieta_prod, disc, omega, beta0, printed_gap);
  report(4, "identity suite", ok, buf);
}

double remainder(double k, const BeamParams& p) {
  using LD = long double;
  const std::complex<LD> l(-0.05L, static_cast<LD>(k) * std::numbers::pi_v<LD>);
  const auto e = f_expansion_terms<LD>(l, p);
  return static_cast<double>(std::pow(static_cast<LD>(k), 4) * std::abs(char_fn<LD>(l, p) - f_expansion_sum<LD>(l, e)));
}

void expansion_bound() {
  bool ok = true;
  std::string detail;
  for (const BeamParams& p : {kGeneric, kDegenerate}) {
    // Sups over the dyadic windows [100,200], [200,400], [400,800], [800,1000].
    const int edges[5] = {100, 200, 400, 800, 1000};
    double w[4] = {0, 0, 0, 0};
    double noise = 0.0, prev = remainder(800, p);
    for (int d = 0; d < 4; ++d)
      for (int k = edges[d]; k <= edges[d + 1]; ++k) w[d] = std::max(w[d], remainder(k, p));
    // Rounding jitter between consecutive k in the last window.
    for (int k = 801; k <= 1000; ++k) {
      const double r = remainder(k, p);
      noise = std::max(noise, std::abs(r - prev));
      prev = r;
    }
    bool local = std::isfinite(w[0]);
    for (int d = 1; d < 4; ++d) local = local && std::isfinite(w[d]) && w[d] <= w[d - 1] + noise;
    ok = ok && local;
    char buf[200];
    std::snprintf(buf, sizeof buf, " b=%.4g: %.9g %.9g %.9g %.9g (jitter %.1e);", p.b, w[0], w[1], w[2], w[3], noise);
    detail += buf;
  }
  report(5, "expansion bound", ok, detail);
}

void eigenpair_residuals(const Shared& s) {
  double mres = 0.0, sys = 0.0, diss = 0.0, literal = 0.0;
  int count = 0;
  for (const auto* sp : {&s.generic, &s.degenerate}) {
    const BeamParams& p = sp == &s.generic ? kGeneric : kDegenerate;
    for (const auto& r : sp->records) {
      const auto m = eigenmode(r.lambda, p);
      mres = std::max(mres, matrix_residual(r.lambda, nullspace_coeffs(r.lambda, p), p));
      sys = std::max(sys, eigen_residuals(m, p).max());
      diss = std::max(diss, std::abs(dissipation_defect(m, p)));
      literal = std::max(literal, std::abs(m.lambda.real() + (p.k2 / p.k1) * std::norm(m.tip_eta) +
                                           (p.k4 / p.k3) * std::norm(m.tip_gamma)));
      ++count;
    }
  }
  const bool ok = mres <= 1e-9 && sys <= 1e-8 && diss <= 1e-8;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%d modes; |M c| %.2e, six residuals %.2e, dissipation %.2e (weight a k4/(b k3)); with k4/k3 weight %.2e",
                count, mres, sys, diss, literal);
  report(6, "eigenpair residuals", ok, buf);
}

double fd_error(const BeamParams& p, const SpectrumResult& ref, int N) {
  double e = 0.0;
  for (const auto& z : generator_spectrum(assemble_generator(p, N), 10)) {
    double d = 1e300;
    for (const auto& r : ref.records) d = std::min(d, std::abs(r.lambda - z));
    e = std::max(e, d);
  }
  return e;
}

void oracle_equivalence(const Shared& s) {
  bool ok = true;
  std::string detail;
  for (const auto* sp : {&s.generic, &s.degenerate}) {
    const BeamParams& p = sp == &s.generic ? kGeneric : kDegenerate;
    const double e200 = fd_error(p, *sp, 200), e400 = fd_error(p, *sp, 400);
    ok = ok && e400 > 0.0 && e200 / e400 >= 3.5;
    detail += fmt(" b=%.4g: err %.3e -> %.3e,", p.b, e200, e400) + fmt(" ratio %.3f;", e200 / e400);
  }
  report(7, "oracle equivalence", ok, detail);
}

void spectral_completeness(const Shared& s) {
  int boxes = 0, mismatched = 0, right_half = 0;
  double cons_re = 0.0;
  for (const auto* sp : {&s.generic, &s.degenerate}) {
    for (const auto& b : sp->report.boxes) {
      if (!b.k_index || std::abs(*b.k_index) < 8 || std::abs(*b.k_index) > 200) continue;
      ++boxes;
      if (b.count != b.recovered) ++mismatched;
    }
    for (const auto& r : sp->records)
      if (r.lambda.real() >= 0.0) ++right_half;
  }
  for (const auto* sp : {&s.generic_cons, &s.degenerate_cons})
    for (const auto& r : sp->records) cons_re = std::max(cons_re, std::abs(r.lambda.real()));
  const bool ok = boxes == 2 * (200 - 8 + 1) && mismatched == 0 && right_half == 0 && cons_re <= 1e-9;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d boxes, %d mismatched, %d roots with Re >= 0, conservative max |Re| %.2e", boxes,
                mismatched, right_half, cons_re);
  report(8, "spectral completeness", ok, buf);
}

void riesz_diagnostics(const Shared& s) {
  const auto d = riesz_closeness(300, s.generic, s.generic_cons, kGeneric);
  double lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  for (const auto& e : d.entries) {
    const double k = e.k;
    double* w = e.k <= 150 ? lo : hi;
    w[0] = std::max(w[0], k * k * e.closeness);
    w[1] = std::max(w[1], k * e.eta_abs);
    w[2] = std::max(w[2], k * e.gamma_abs);
  }
  bool ok = d.entries.size() == 2 * (300 - 8 + 1);
  for (int i = 0; i < 3; ++i) ok = ok && std::isfinite(hi[i]) && hi[i] <= 1.25 * lo[i];
  double worst = 0.0;
  for (int K = 10; K <= 100; K += 10) {
    const double c = condition_number(gram_matrix(lowest_modes(s.generic.records, 2 * K, kGeneric), kGeneric));
    worst = std::max(worst, c);
  }
  ok = ok && worst < 100.0;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "sup k<=150 / 150<k<=300: k^2 dist^2 %.3e / %.3e, k|eta| %.4f / %.4f, k|gamma| %.4f / %.4f; max Gram "
                "cond K<=100 %.3f",
                lo[0], hi[0], lo[1], hi[1], lo[2], hi[2], worst);
  report(9, "Riesz diagnostics", ok, buf);
}

void polynomial_decay() {
  const int N = 400;
  const auto g = assemble_generator(kGeneric, N);
  const auto U0 = domain_initial_data(N, kGeneric, 1);
  const auto t200 = integrate(g, U0, 200.0, 0.5 * g.h);
  bool monotone = true;
  for (size_t i = 1; i < t200.energies.size(); ++i) monotone = monotone && t200.energies[i] <= t200.energies[i - 1];
  const auto fit = fit_decay(t200, 0.25, 1.0);
  const auto t400 = integrate(g, U0, 400.0, 0.5 * g.h);
  const double s200 = sup_tE(t200, 50.0, 200.0);
  const double s400 = sup_tE(t400, 50.0, 400.0);
  const double growth = s400 / s200 - 1.0;

  const BeamParams q = kGeneric.conservative_twin();
  const auto g0 = assemble_generator(q, N);
  const auto c = integrate(g0, domain_initial_data(N, q, 1), 200.0, 0.5 * g0.h);
  const double drift = std::abs(c.energies.back() - c.energies.front()) / c.energies.front();

  const bool ok = monotone && fit.exponent <= -0.9 && growth < 0.1 && drift <= 1e-10;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "monotone=%s, slope on [50,200] %.3f, sup tE %.5g -> %.5g (growth %.2f%%), conservative drift %.2e",
                monotone ? "yes" : "no", fit.exponent, s200, s400, 100.0 * growth, drift);
  report(10, "polynomial decay", ok, buf);
}

template <class F>
void guarded(int id, const char* name, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    report(id, name, false, "error " + std::string(to_string(e.code())) + ": " + e.what());
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  Shared s;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    s.degenerate = spectrum_in_strip(kDegenerate, 1000, Variant::dissipative);
    s.degenerate_seconds = seconds_since(t0);
    s.generic = spectrum_in_strip(kGeneric, 500, Variant::dissipative);
    s.generic_cons = spectrum_in_strip(kGeneric, 300, Variant::conservative);
    s.degenerate_cons = spectrum_in_strip(kDegenerate, 200, Variant::conservative);
  } catch (const Error& e) {
    std::printf("FAIL spectra could not be computed: %s\n", e.what());
    return 1;
  }

  guarded(1, "degenerate-case values", [&] { degenerate_values(s); });
  guarded(2, "asymptotic limits", [&] { asymptotic_limits(s); });
  guarded(3, "generic-regime convergence", [&] { generic_convergence(s); });
  guarded(4, "identity suite", [&] { identity_suite(); });
  guarded(5, "expansion bound", [&] { expansion_bound(); });
  guarded(6, "eigenpair residuals", [&] { eigenpair_residuals(s); });
  guarded(7, "oracle equivalence", [&] { oracle_equivalence(s); });
  guarded(8, "spectral completeness", [&] { spectral_completeness(s); });
  guarded(9, "Riesz diagnostics", [&] { riesz_diagnostics(s); });
  guarded(10, "polynomial decay", [&] { polynomial_decay(); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
