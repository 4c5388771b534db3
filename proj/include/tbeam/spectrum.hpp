#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tbeam/asymptotics.hpp"
#include "tbeam/charfn.hpp"
#include "tbeam/error.hpp"
#include "tbeam/params.hpp"

namespace tbeam {

struct Rect {
  double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;

  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  double diameter() const { return std::hypot(width(), height()); }
  std::complex<double> center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  bool contains(std::complex<double> z, double margin = 0.0) const {
    return z.real() >= re_min - margin && z.real() <= re_max + margin && z.imag() >= im_min - margin &&
           z.imag() <= im_max + margin;
  }
};

struct EigenvalueRecord {
  std::complex<double> lambda;
  std::optional<int> k_index;
  int family = 0;  // 1, 2 or 0 when unassigned
  double residual = 0.0;
  int multiplicity = 1;
  Variant variant = Variant::dissipative;
  int iterations = 0;
};

struct BoxRecord {
  Rect rect;
  int count = 0;
  int recovered = 0;
  std::optional<int> k_index;
};

struct RootSearchReport {
  std::vector<BoxRecord> boxes;
  std::vector<int> newton_iterations;
  int k0_effective = 0;
  int duplicates_merged = 0;
  std::vector<BoxRecord> incomplete;
  int origin_winding = 0;
  std::vector<std::string> notes;
};

struct SpectrumResult {
  std::vector<EigenvalueRecord> records;
  RootSearchReport report;
};

struct SpectrumOptions {
  int k_min = 8;
  double newton_tol = 1e-12;
  double accept_tol = 1e-10;
  double dedupe_rel = 1e-12;
  /// Strip offset below the real axis for the low-frequency rectangle.
  double axis_offset = 1e-3;
  bool strict = false;
};

namespace detail {

inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  while (a > pi) a -= 2.0 * pi;
  while (a <= -pi) a += 2.0 * pi;
  return a;
}

struct ContourTracker {
  const BeamParams& p;
  double max_step_angle;
  int evaluations = 0;

  std::complex<double> F(std::complex<double> z) {
    ++evaluations;
    return char_fn_regularized<double>(z, p);
  }

  /// Argument increment of F along [z0, z1], bisecting until every step is
  /// below max_step_angle. Segments hugging the real axis, where the real
  /// roots and the double pole at 0 live, are also cut to a length of at
  /// most four times their distance from it.
  double segment(std::complex<double> z0, std::complex<double> f0, std::complex<double> z1,
                 std::complex<double> f1, int depth) {
    const double d = wrap_angle(std::arg(f1) - std::arg(f0));
    const double axis = std::min(std::abs(z0.imag()), std::abs(z1.imag()));
    const bool near_axis = z0.imag() * z1.imag() > 0.0 && axis < 0.1 && std::abs(z1 - z0) > 4.0 * axis;
    if (std::abs(d) <= max_step_angle && !near_axis) return d;
    if (depth > 48 || std::abs(z1 - z0) < 1e-10 * (1.0 + std::abs(z0)))
      throw Error(ErrorCode::BoundaryTooCloseToRoot, "contour passes too close to a root");
    const std::complex<double> zm = 0.5 * (z0 + z1);
    const std::complex<double> fm = F(zm);
    if (std::abs(fm) < 1e-6 * std::max(std::abs(f0), std::abs(f1)))
      throw Error(ErrorCode::BoundaryTooCloseToRoot, "|F| dips on the contour");
    return segment(z0, f0, zm, fm, depth + 1) + segment(zm, fm, z1, f1, depth + 1);
  }

  double loop(const Rect& r, int points_per_edge) {
    const std::array<std::complex<double>, 5> corners{
        std::complex<double>(r.re_min, r.im_min), std::complex<double>(r.re_max, r.im_min),
        std::complex<double>(r.re_max, r.im_max), std::complex<double>(r.re_min, r.im_max),
        std::complex<double>(r.re_min, r.im_min)};
    double total = 0.0;
    std::complex<double> z_prev = corners[0];
    std::complex<double> f_prev = F(z_prev);
    if (f_prev == 0.0) throw Error(ErrorCode::BoundaryTooCloseToRoot, "root on a corner");
    for (int e = 0; e < 4; ++e) {
      for (int i = 1; i <= points_per_edge; ++i) {
        const double s = static_cast<double>(i) / points_per_edge;
        const std::complex<double> z = corners[e] + s * (corners[e + 1] - corners[e]);
        const std::complex<double> fz = F(z);
        if (std::abs(fz) < 1e-6 * std::abs(f_prev))
          throw Error(ErrorCode::BoundaryTooCloseToRoot, "|F| dips on the contour");
        total += segment(z_prev, f_prev, z, fz, 0);
        z_prev = z;
        f_prev = fz;
      }
    }
    return total / (2.0 * std::numbers::pi);
  }
};

/// Zeros minus poles of the regularized characteristic function inside r,
/// by tracking its argument along the boundary at two resolutions.
inline int winding_number(const Rect& r, const BeamParams& p, int points_per_edge = 64) {
  constexpr double pi = std::numbers::pi;
  ContourTracker coarse{p, pi / 4.0};
  const double w1 = coarse.loop(r, points_per_edge);
  ContourTracker fine{p, pi / 8.0};
  const double w2 = fine.loop(r, points_per_edge);
  const long n1 = std::lround(w1);
  const long n2 = std::lround(w2);
  if (n1 != n2 || std::abs(w1 - static_cast<double>(n1)) > 0.05)
    throw Error(ErrorCode::NonConvergentContour, "winding estimates disagree");
  return static_cast<int>(n1);
}

template <class Real>
Complex<Real> regularized_derivative(Complex<Real> lambda, const BeamParams& p) {
  const Real delta = Real(1e-7) * std::max(Real(1), std::abs(lambda));
  return (char_fn_regularized<Real>(lambda + delta, p) - char_fn_regularized<Real>(lambda - delta, p)) /
         (Real(2) * delta);
}

inline double dedupe_distance(std::complex<double> z, double rel) {
  return rel * std::max(1.0, std::abs(z));
}

}  // namespace detail

/// Number of eigenvalues inside r. The rectangle is enlarged by up to 1% when
/// its boundary passes too close to a root.
inline int count_roots_in_rect(const Rect& rect, const BeamParams& p) {
  require_unit_speed_ratio(p);
  Rect r = rect;
  for (int attempt = 0; attempt < 5; ++attempt) {
    try {
      return detail::winding_number(r, p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BoundaryTooCloseToRoot) throw;
      const double grow = 0.002 * (attempt + 1);
      r.re_min = rect.re_min - grow * rect.width();
      r.re_max = rect.re_max + grow * rect.width() * 0.7;
      r.im_min = rect.im_min - grow * rect.height() * 0.9;
      r.im_max = rect.im_max + grow * rect.height() * 0.6;
    }
  }
  throw Error(ErrorCode::BoundaryTooCloseToRoot, "perturbation failed five times");
}

/// Trapezoid rule for (1/2 pi i) times the contour integral of f'/f, with the
/// derivative from char_fn_derivative.
inline double contour_integral_count(const Rect& r, const BeamParams& p, int points_per_edge = 2048) {
  const std::array<std::complex<double>, 5> c{
      std::complex<double>(r.re_min, r.im_min), std::complex<double>(r.re_max, r.im_min),
      std::complex<double>(r.re_max, r.im_max), std::complex<double>(r.re_min, r.im_max),
      std::complex<double>(r.re_min, r.im_min)};
  std::complex<double> sum = 0.0;
  for (int e = 0; e < 4; ++e) {
    const std::complex<double> dz = (c[e + 1] - c[e]) / static_cast<double>(points_per_edge);
    for (int i = 0; i <= points_per_edge; ++i) {
      const std::complex<double> z = c[e] + static_cast<double>(i) * dz;
      const double w = (i == 0 || i == points_per_edge) ? 0.5 : 1.0;
      sum += w * char_fn_derivative<double>(z, p) / char_fn<double>(z, p) * dz;
    }
  }
  return (sum / std::complex<double>(0.0, 2.0 * std::numbers::pi)).real();
}

/// Newton iteration in extended precision on the regularized characteristic
/// function, optionally deflated by previously found roots. Stops once
/// |f| <= tol max(1,|lambda|) and the step has stalled.
inline EigenvalueRecord refine_root(std::complex<double> seed, const BeamParams& p, double tol,
                                    double max_distance, const std::vector<std::complex<double>>& deflate) {
  using LD = long double;
  using CL = std::complex<LD>;
  require_unit_speed_ratio(p);
  if (tol < 1e-13) throw Error(ErrorCode::InvalidConfig, "Newton tolerance below 1e-13");
  CL z(seed.real(), seed.imag());
  const CL s0 = z;
  int it = 0;
  for (; it < 50; ++it) {
    const CL F = char_fn_regularized<LD>(z, p);
    const CL dF = detail::regularized_derivative<LD>(z, p);
    if (F == CL(0)) break;
    CL log_derivative = dF / F;
    for (const auto& r : deflate) log_derivative -= LD(1) / (z - CL(r.real(), r.imag()));
    if (log_derivative == CL(0)) break;
    const CL step = LD(1) / log_derivative;
    z -= step;
    if (std::abs(z - s0) > max_distance)
      throw Error(ErrorCode::BasinEscape, "Newton left the seed neighbourhood");
    const LD scale = std::max(LD(1), std::abs(z));
    const bool small_residual = std::abs(char_fn<LD>(z, p)) <= LD(tol) * scale;
    if (small_residual && std::abs(step) <= LD(1e-16) * scale) {
      ++it;
      break;
    }
  }
  const std::complex<double> root(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  const double res = static_cast<double>(std::abs(char_fn<LD>(z, p)));
  if (!(res <= tol * std::max(1.0, std::abs(root))))
    throw Error(ErrorCode::NoConvergence, "Newton did not reach the residual tolerance");
  EigenvalueRecord rec;
  rec.lambda = root;
  rec.residual = res;
  rec.iterations = it;
  rec.variant = p.conservative() ? Variant::conservative : Variant::dissipative;
  return rec;
}

inline EigenvalueRecord refine_root(std::complex<double> seed, const BeamParams& p, double tol = 1e-12,
                                    double max_distance = 0.5) {
  return refine_root(seed, p, tol, max_distance, {});
}

namespace detail {

/// Seed for index k and family j: the regime's prediction, or its
/// second-order truncation when the third-order coefficients are complex.
inline std::complex<double> seed_prediction(int k, int j, const BeamParams& q, Variant v) {
  try {
    return predict_eigenvalue(k, j, q, v, 1);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NegativeRadicand) throw;
  }
  constexpr double pi = std::numbers::pi;
  const double kk = k;
  const double pp = static_cast<double>(degenerate_order(q));
  std::complex<double> lam(0.0, kk * pi + (2.0 * q.k1 + pp * pp * pi * pi) / (2.0 * kk * pi));
  if (v == Variant::dissipative) lam -= q.k1 * (j == 1 ? q.k2 : q.k4) / (kk * kk * pi * pi);
  return lam;
}

class StripSearch {
 public:
  StripSearch(const BeamParams& q, const SpectrumOptions& opt, RootSearchReport& report)
      : q_(q), opt_(opt), report_(report) {}

  /// Recursive subdivision of r, known to hold `count` roots.
  std::vector<EigenvalueRecord> subdivide(const Rect& r, int count, int depth = 0) {
    std::vector<EigenvalueRecord> out;
    if (count <= 0) return out;
    const double diam = r.diameter();
    if (count == 1 && diam <= 0.5) {
      try {
        auto rec = refine_root(r.center(), q_, opt_.newton_tol, std::max(0.5, diam));
        if (r.contains(rec.lambda, 1e-12 * std::max(1.0, std::abs(rec.lambda)))) {
          report_.newton_iterations.push_back(rec.iterations);
          out.push_back(rec);
          return out;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::BasinEscape) throw;
      }
    }
    if (diam < 1e-6 || depth > 60) {
      auto rec = refine_root(r.center(), q_, opt_.newton_tol, 1.0);
      rec.multiplicity = count;
      report_.newton_iterations.push_back(rec.iterations);
      out.push_back(rec);
      return out;
    }
    static constexpr std::array<double, 5> fractions{0.5, 0.4871, 0.5129, 0.4617, 0.5383};
    for (double frac : fractions) {
      Rect a = r, b = r;
      if (r.width() >= r.height()) {
        const double cut = r.re_min + frac * r.width();
        a.re_max = cut;
        b.re_min = cut;
      } else {
        const double cut = r.im_min + frac * r.height();
        a.im_max = cut;
        b.im_min = cut;
      }
      int ca = 0, cb = 0;
      try {
        ca = winding_number(a, q_);
        cb = winding_number(b, q_);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BoundaryTooCloseToRoot && e.code() != ErrorCode::NonConvergentContour)
          throw;
        continue;
      }
      if (ca + cb != count) continue;
      auto ra = subdivide(a, ca, depth + 1);
      auto rb = subdivide(b, cb, depth + 1);
      out.insert(out.end(), ra.begin(), ra.end());
      out.insert(out.end(), rb.begin(), rb.end());
      return out;
    }
    throw Error(ErrorCode::NonConvergentContour, "no admissible split of a search cell");
  }

 private:
  const BeamParams& q_;
  const SpectrumOptions& opt_;
  RootSearchReport& report_;
};

inline int multiplicity_sum(const std::vector<EigenvalueRecord>& v) {
  int n = 0;
  for (const auto& r : v) n += r.multiplicity;
  return n;
}

/// Merges records closer than the dedupe tolerance; returns the merge count.
inline int dedupe(std::vector<EigenvalueRecord>& recs, double rel) {
  std::vector<EigenvalueRecord> kept;
  int merged = 0;
  for (const auto& r : recs) {
    bool dup = false;
    for (auto& k : kept) {
      if (std::abs(k.lambda - r.lambda) <= dedupe_distance(r.lambda, rel)) {
        dup = true;
        if (r.residual < k.residual) {
          const int m = std::max(k.multiplicity, r.multiplicity);
          k = r;
          k.multiplicity = m;
        }
        break;
      }
    }
    if (dup)
      ++merged;
    else
      kept.push_back(r);
  }
  recs = std::move(kept);
  return merged;
}

}  // namespace detail

/// All eigenvalues with |Im lambda| < (k_max + 1/2) pi. The conservative
/// variant searches the operator with k2 = k4 = 0.
inline SpectrumResult spectrum_in_strip(const BeamParams& p, int k_max, Variant variant,
                                        const SpectrumOptions& opt = {}) {
  constexpr double pi = std::numbers::pi;
  require_unit_speed_ratio(p);
  if (k_max < 10) throw Error(ErrorCode::InvalidConfig, "k_max must be >= 10");
  if (opt.k_min < 2 || opt.k_min > k_max) throw Error(ErrorCode::InvalidConfig, "k_min out of range");
  if (variant == Variant::dissipative && p.conservative())
    throw Error(ErrorCode::RegimeMismatch, "dissipative spectrum requested with k2 = k4 = 0");
  const BeamParams q = variant == Variant::conservative ? p.conservative_twin() : p;

  SpectrumResult result;
  RootSearchReport& rep = result.report;
  detail::StripSearch search(q, opt, rep);
  const double re_min = q.conservative() ? -1.0 : -(q.k2 + q.k4) - 1.0;
  const double re_max = 0.5;
  const double d = opt.axis_offset;
  std::vector<EigenvalueRecord> found;

  {
    const Rect origin{-2.0 * d, 2.0 * d, -2.0 * d, 2.0 * d};
    rep.origin_winding = count_roots_in_rect(origin, q);
    if (rep.origin_winding != -2)
      rep.notes.push_back("winding around the origin is " + std::to_string(rep.origin_winding));
  }

  // Low band: a thin box around the negative real axis and the region above it.
  const std::array<Rect, 2> low{Rect{re_min, -2.0 * d, -d, d},
                                Rect{re_min, re_max, d, (opt.k_min - 0.5) * pi}};
  for (const Rect& r : low) {
    const int c = count_roots_in_rect(r, q);
    auto recs = search.subdivide(r, c);
    BoxRecord box{r, c, detail::multiplicity_sum(recs), std::nullopt};
    rep.boxes.push_back(box);
    if (box.count != box.recovered) rep.incomplete.push_back(box);
    found.insert(found.end(), recs.begin(), recs.end());
  }

  int last_fallback = opt.k_min - 1;
  for (int k = opt.k_min; k <= k_max; ++k) {
    const Rect r{re_min, re_max, (k - 0.5) * pi, (k + 0.5) * pi};
    const int c = count_roots_in_rect(r, q);
    std::vector<EigenvalueRecord> recs;
    std::array<std::complex<double>, 2> seeds{};
    for (int j = 1; j <= 2; ++j) {
      seeds[j - 1] = detail::seed_prediction(k, j, q, variant);
      try {
        auto rec = refine_root(seeds[j - 1], q, opt.newton_tol);
        if (r.contains(rec.lambda)) {
          rep.newton_iterations.push_back(rec.iterations);
          recs.push_back(rec);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::BasinEscape) throw;
      }
    }
    rep.duplicates_merged += detail::dedupe(recs, opt.dedupe_rel);
    // Nearly coincident families: deflate the roots already found.
    for (int attempt = 0; attempt < 4 && !recs.empty() && detail::multiplicity_sum(recs) < c; ++attempt) {
      std::vector<std::complex<double>> known;
      for (const auto& rec : recs) known.push_back(rec.lambda);
      const double nudge = 1e-3 / (k * k) * (attempt + 1);
      const std::complex<double> start = seeds[attempt % 2] + std::complex<double>(0.0, attempt < 2 ? nudge : -nudge);
      try {
        auto rec = refine_root(start, q, opt.newton_tol, 0.5, known);
        if (r.contains(rec.lambda)) {
          rep.newton_iterations.push_back(rec.iterations);
          recs.push_back(rec);
          rep.duplicates_merged += detail::dedupe(recs, opt.dedupe_rel);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::BasinEscape) throw;
      }
    }
    if (detail::multiplicity_sum(recs) != c) {
      last_fallback = k;
      recs = search.subdivide(r, c);
      rep.duplicates_merged += detail::dedupe(recs, opt.dedupe_rel);
    }
    // Family labels by the cheaper of the two pairings with the seeds.
    if (recs.size() == 2) {
      const double direct = std::abs(recs[0].lambda - seeds[0]) + std::abs(recs[1].lambda - seeds[1]);
      const double swapped = std::abs(recs[0].lambda - seeds[1]) + std::abs(recs[1].lambda - seeds[0]);
      recs[0].family = direct <= swapped ? 1 : 2;
      recs[1].family = direct <= swapped ? 2 : 1;
    } else {
      for (auto& rec : recs)
        rec.family = std::abs(rec.lambda - seeds[0]) <= std::abs(rec.lambda - seeds[1]) ? 1 : 2;
    }
    for (auto& rec : recs) rec.k_index = k;
    BoxRecord box{r, c, detail::multiplicity_sum(recs), k};
    rep.boxes.push_back(box);
    if (box.count != box.recovered) rep.incomplete.push_back(box);
    found.insert(found.end(), recs.begin(), recs.end());
  }
  rep.k0_effective = last_fallback + 1;

  for (auto& rec : found) {
    rec.variant = variant;
    if (std::abs(rec.lambda.imag()) <= 1e-12 * std::max(1.0, std::abs(rec.lambda)))
      rec.lambda = {rec.lambda.real(), 0.0};
  }
  rep.duplicates_merged += detail::dedupe(found, opt.dedupe_rel);
  std::vector<EigenvalueRecord> all;
  for (const auto& rec : found) {
    if (rec.lambda.imag() < 0.0) continue;
    all.push_back(rec);
    if (rec.lambda.imag() > 0.0) {
      EigenvalueRecord mirror = rec;
      mirror.lambda = std::conj(rec.lambda);
      if (rec.k_index) mirror.k_index = -*rec.k_index;
      all.push_back(mirror);
    }
  }
  std::sort(all.begin(), all.end(), [](const EigenvalueRecord& a, const EigenvalueRecord& b) {
    if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
    return a.family < b.family;
  });
  for (const auto& rec : all) {
    if (rec.residual > opt.accept_tol * std::max(1.0, std::abs(rec.lambda)))
      rep.notes.push_back("residual above acceptance at " + std::to_string(rec.lambda.imag()));
  }
  result.records = std::move(all);
  if (opt.strict && !rep.incomplete.empty())
    throw Error(ErrorCode::IncompleteBox, "argument-principle count differs from recovered roots");
  return result;
}

struct ImaginaryAxisCheck {
  bool ok = false;
  double min_abs_re = 0.0;
  std::complex<double> closest{};
  double min_abs_f = 0.0;
  double h_at_min = 0.0;
};

/// Checks that no computed root lies on the imaginary axis and samples |f(ih)|
/// on [0.01, h_max].
inline ImaginaryAxisCheck verify_no_imaginary_roots(const BeamParams& p, double h_max,
                                                    const SpectrumOptions& opt = {}) {
  constexpr double pi = std::numbers::pi;
  const int k_max = std::max(10, static_cast<int>(std::ceil(h_max / pi)) + 1);
  const Variant v = p.conservative() ? Variant::conservative : Variant::dissipative;
  const auto spec = spectrum_in_strip(p, k_max, v, opt);
  ImaginaryAxisCheck out;
  out.min_abs_re = std::numeric_limits<double>::infinity();
  for (const auto& r : spec.records) {
    if (std::abs(r.lambda.imag()) > h_max) continue;
    if (std::abs(r.lambda.real()) < out.min_abs_re) {
      out.min_abs_re = std::abs(r.lambda.real());
      out.closest = r.lambda;
    }
  }
  out.min_abs_f = std::numeric_limits<double>::infinity();
  const int samples = std::max(1000, static_cast<int>(200.0 * h_max));
  for (int i = 0; i <= samples; ++i) {
    const double h = 0.01 + (h_max - 0.01) * i / samples;
    if (std::abs(h - std::sqrt(p.b)) < 1e-9) continue;
    const double fa = std::abs(char_fn_regularized<double>({0.0, h}, p));
    if (fa < out.min_abs_f) {
      out.min_abs_f = fa;
      out.h_at_min = h;
    }
  }
  bool roots_off_axis = true;
  for (const auto& r : spec.records) {
    if (std::abs(r.lambda.imag()) > h_max) continue;
    if (std::abs(r.lambda.real()) <= 1e-9 * std::max(1.0, std::abs(r.lambda))) roots_off_axis = false;
  }
  out.ok = roots_off_axis && out.min_abs_f > 0.0;
  return out;
}

}  // namespace tbeam
