#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tbeam/asymptotics.hpp"
#include "tbeam/error.hpp"
#include "tbeam/modes.hpp"
#include "tbeam/params.hpp"
#include "tbeam/simulate.hpp"
#include "tbeam/spectrum.hpp"

namespace tbeam::cli {

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"spectrum", "predict", "modes", "riesz", "decay", "table", "plot"};
  return c;
}

struct RunConfig {
  std::string command;
  BeamParams params{1.0, 2.0, 1.0, 2.0, 3.0, 2.0};
  int k_max = 50;
  int grid_n = 400;
  double horizon = 200.0;
  double dt = 0.0;  // 0 selects h/2
  int riesz_k = 50;
  int mode_count = 10;
  unsigned seed = 1;
  bool conservative = false;
  double tolerance = 1e-12;
  int width = 800;
  int height = 800;
  std::string out;
};

/// Formats with 17 significant digits.
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string num6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string params_string(const BeamParams& p) {
  return num(p.a) + "," + num(p.b) + "," + num(p.k1) + "," + num(p.k2) + "," + num(p.k3) + "," + num(p.k4);
}

inline BeamParams parse_params(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad number in params: '" + item + "'");
    }
  }
  if (v.size() != 6) throw Error(ErrorCode::InvalidConfig, "params needs six values a,b,k1,k2,k3,k4");
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

/// Ordered key/value view of a configuration, used for file headers.
inline std::map<std::string, std::string> config_entries(const RunConfig& c) {
  return {{"command", c.command},
          {"params", params_string(c.params)},
          {"kmax", std::to_string(c.k_max)},
          {"grid-n", std::to_string(c.grid_n)},
          {"horizon", num(c.horizon)},
          {"dt", num(c.dt)},
          {"riesz-k", std::to_string(c.riesz_k)},
          {"modes", std::to_string(c.mode_count)},
          {"seed", std::to_string(c.seed)},
          {"conservative", c.conservative ? "true" : "false"},
          {"tolerance", num(c.tolerance)},
          {"width", std::to_string(c.width)},
          {"height", std::to_string(c.height)}};
}

inline int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "bad integer for " + key + ": '" + v + "'");
  }
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "bad number for " + key + ": '" + v + "'");
  }
}

inline void apply_entry(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "params") c.params = parse_params(value);
  else if (key == "a") c.params.a = parse_double(key, value);
  else if (key == "b") c.params.b = parse_double(key, value);
  else if (key == "k1") c.params.k1 = parse_double(key, value);
  else if (key == "k2") c.params.k2 = parse_double(key, value);
  else if (key == "k3") c.params.k3 = parse_double(key, value);
  else if (key == "k4") c.params.k4 = parse_double(key, value);
  else if (key == "kmax") c.k_max = parse_int(key, value);
  else if (key == "grid-n") c.grid_n = parse_int(key, value);
  else if (key == "horizon") c.horizon = parse_double(key, value);
  else if (key == "dt") c.dt = parse_double(key, value);
  else if (key == "riesz-k") c.riesz_k = parse_int(key, value);
  else if (key == "modes") c.mode_count = parse_int(key, value);
  else if (key == "seed") c.seed = static_cast<unsigned>(parse_int(key, value));
  else if (key == "tolerance") c.tolerance = parse_double(key, value);
  else if (key == "width") c.width = parse_int(key, value);
  else if (key == "height") c.height = parse_int(key, value);
  else if (key == "out") c.out = value;
  else if (key == "command") c.command = value;
  else if (key == "conservative") {
    if (value == "true" || value == "1") c.conservative = true;
    else if (value == "false" || value == "0") c.conservative = false;
    else throw Error(ErrorCode::InvalidConfig, "conservative must be true or false");
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
}

/// Flat key=value text; '#' starts a comment.
inline void apply_config_text(RunConfig& c, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + " is not key=value");
    apply_entry(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(c, buf.str());
}

inline void validate(const RunConfig& c) {
  if (std::find(commands().begin(), commands().end(), c.command) == commands().end())
    throw Error(ErrorCode::InvalidConfig, "unknown command '" + c.command + "'");
  const auto& p = c.params;
  validate_params(p.a, p.b, p.k1, p.k2, p.k3, p.k4, c.command != "decay");
  if (c.k_max < 10) throw Error(ErrorCode::InvalidConfig, "kmax must be >= 10");
  if (c.grid_n < 16) throw Error(ErrorCode::ResolutionTooLow, "grid-n must be >= 16");
  if (c.grid_n % 2 != 0) throw Error(ErrorCode::GridMismatch, "grid-n must be even");
  if (!(c.horizon > 0.0)) throw Error(ErrorCode::InvalidConfig, "horizon must be positive");
  if (c.dt < 0.0) throw Error(ErrorCode::InvalidConfig, "dt must be positive");
  if (c.riesz_k < 8) throw Error(ErrorCode::InvalidConfig, "riesz-k must be >= 8");
  if (c.mode_count < 1) throw Error(ErrorCode::InvalidConfig, "modes must be >= 1");
  if (c.tolerance < 1e-13) throw Error(ErrorCode::InvalidConfig, "tolerance below 1e-13");
  if (c.width < 100 || c.height < 100) throw Error(ErrorCode::InvalidConfig, "plot size below 100");
}

/// Named output files of a run, in emission order.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;  // suffix, content
  std::string stdout_text;
};

inline std::string csv_header(const RunConfig& c) {
  std::string h;
  for (const auto& [k, v] : config_entries(c)) h += "# " + k + "=" + v + "\n";
  return h;
}

inline nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  for (const auto& [k, v] : config_entries(c)) j[k] = v;
  return j;
}

inline Variant variant_of(const RunConfig& c) {
  return c.conservative || c.params.conservative() ? Variant::conservative : Variant::dissipative;
}

inline SpectrumOptions options_of(const RunConfig& c) {
  SpectrumOptions o;
  o.newton_tol = c.tolerance;
  o.accept_tol = std::max(1e-10, c.tolerance);
  return o;
}

inline std::string k_text(const std::optional<int>& k) { return k ? std::to_string(*k) : ""; }

inline Artifacts run_spectrum(const RunConfig& c) {
  const auto res = spectrum_in_strip(c.params, c.k_max, variant_of(c), options_of(c));
  std::string csv = csv_header(c) + "k,j,re,im,residual,multiplicity\n";
  for (const auto& r : res.records)
    csv += k_text(r.k_index) + "," + std::to_string(r.family) + "," + num(r.lambda.real()) + "," +
           num(r.lambda.imag()) + "," + num(r.residual) + "," + std::to_string(r.multiplicity) + "\n";
  nlohmann::json rep;
  rep["config"] = config_json(c);
  rep["k0_effective"] = res.report.k0_effective;
  rep["duplicates_merged"] = res.report.duplicates_merged;
  rep["origin_winding"] = res.report.origin_winding;
  rep["records"] = res.records.size();
  rep["notes"] = res.report.notes;
  rep["regime"] = std::string(to_string(classify_regime(variant_of(c) == Variant::conservative
                                                            ? c.params.conservative_twin()
                                                            : c.params)));
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : res.report.boxes) {
    nlohmann::json jb;
    jb["rect"] = {b.rect.re_min, b.rect.re_max, b.rect.im_min, b.rect.im_max};
    jb["count"] = b.count;
    jb["recovered"] = b.recovered;
    if (b.k_index) jb["k"] = *b.k_index;
    boxes.push_back(jb);
  }
  rep["boxes"] = boxes;
  rep["incomplete"] = res.report.incomplete.size();
  std::vector<int> its = res.report.newton_iterations;
  rep["newton_iterations_max"] = its.empty() ? 0 : *std::max_element(its.begin(), its.end());
  return {{{".csv", csv}, {".json", rep.dump(2) + "\n"}}, csv};
}

inline Artifacts run_predict(const RunConfig& c) {
  const Variant v = variant_of(c);
  const BeamParams q = v == Variant::conservative ? c.params.conservative_twin() : c.params;
  const auto regime = classify_regime(q);
  std::string csv = csv_header(c) + "# regime=" + std::string(to_string(regime)) + "\nk,j,re,im\n";
  for (int k = kDefaultPredictionKMin; k <= c.k_max; ++k) {
    for (int j = 1; j <= 2; ++j) {
      std::complex<double> z;
      try {
        z = predict_eigenvalue(k, j, c.params, v);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NegativeRadicand) throw;
        z = detail::seed_prediction(k, j, q, v);
      }
      csv += std::to_string(k) + "," + std::to_string(j) + "," + num(z.real()) + "," + num(z.imag()) + "\n";
    }
  }
  return {{{".csv", csv}}, csv};
}

inline nlohmann::json complex_json(std::complex<double> z) { return {z.real(), z.imag()}; }

inline Artifacts run_modes(const RunConfig& c) {
  const Variant v = variant_of(c);
  const BeamParams q = v == Variant::conservative ? c.params.conservative_twin() : c.params;
  const auto res = spectrum_in_strip(c.params, c.k_max, v, options_of(c));
  const auto modes = lowest_modes(res.records, c.mode_count, q);
  nlohmann::json out;
  out["config"] = config_json(c);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : modes) {
    nlohmann::json jm;
    jm["lambda"] = complex_json(m.lambda);
    nlohmann::json co = nlohmann::json::array();
    for (const auto& x : m.coeffs) co.push_back(complex_json(x));
    jm["coeffs"] = co;
    jm["eta"] = complex_json(m.tip_eta);
    jm["gamma"] = complex_json(m.tip_gamma);
    jm["hnorm"] = m.hnorm;
    const auto r = eigen_residuals(m, q);
    jm["residuals"] = {{"interior_u", r.interior_u}, {"interior_y", r.interior_y}, {"clamp_u", r.clamp_u},
                       {"clamp_y", r.clamp_y},       {"tip_force", r.tip_force},   {"tip_moment", r.tip_moment}};
    jm["matrix_residual"] = matrix_residual(m.lambda, m.coeffs, q);
    jm["dissipation_defect"] = dissipation_defect(m, q);
    arr.push_back(jm);
  }
  out["modes"] = arr;
  const std::string text = out.dump(2) + "\n";
  return {{{".json", text}}, text};
}

inline Artifacts run_riesz(const RunConfig& c) {
  const auto d = riesz_closeness(c.riesz_k, c.params, options_of(c));
  std::string csv = csv_header(c) + "k,j,closeness,k2_closeness,alpha,eta_abs,gamma_abs,pairing_gap,partial_sum\n";
  double running = 0.0;
  for (const auto& e : d.entries) {
    running += e.closeness;
    const double k = e.k;
    csv += std::to_string(e.k) + "," + std::to_string(e.family) + "," + num(e.closeness) + "," +
           num(k * k * e.closeness) + "," + num(e.alpha) + "," + num(e.eta_abs) + "," + num(e.gamma_abs) + "," +
           num(e.pairing_gap) + "," + num(running) + "\n";
  }
  return {{{".csv", csv}}, csv};
}

inline Artifacts run_decay(const RunConfig& c) {
  const auto g = assemble_generator(c.params, c.grid_n);
  const double dt = c.dt > 0.0 ? c.dt : 0.5 * g.h;
  const auto U0 = domain_initial_data(c.grid_n, c.params, c.seed);
  const auto tr = integrate(g, U0, c.horizon, dt);
  std::string csv = csv_header(c) + "t,energy\n";
  for (size_t i = 0; i < tr.times.size(); ++i) csv += num(tr.times[i]) + "," + num(tr.energies[i]) + "\n";
  nlohmann::json fit;
  fit["config"] = config_json(c);
  fit["dt"] = dt;
  fit["energy_initial"] = tr.energies.front();
  fit["energy_final"] = tr.energies.back();
  bool monotone = true;
  for (size_t i = 1; i < tr.energies.size(); ++i)
    if (tr.energies[i] > tr.energies[i - 1]) monotone = false;
  fit["monotone"] = monotone;
  if (c.params.conservative()) {
    fit["relative_drift"] = std::abs(tr.energies.back() - tr.energies.front()) / tr.energies.front();
  } else {
    const auto f = fit_decay(tr);
    fit["exponent"] = f.exponent;
    fit["constant"] = f.constant;
    fit["sup_tE"] = f.sup_tE;
    fit["window_samples"] = f.samples;
  }
  return {{{".csv", csv}, {".json", fit.dump(2) + "\n"}}, fit.dump(2) + "\n"};
}

inline const std::array<int, 5>& table_columns() {
  static const std::array<int, 5> k{200, 400, 600, 800, 1000};
  return k;
}

/// k^2 Re(lambda_k^j) for the table columns, rows j = 1, 2.
inline std::array<std::array<double, 5>, 2> table_values(const BeamParams& p, const SpectrumOptions& opt = {}) {
  const auto res = spectrum_in_strip(p, table_columns().back(), Variant::dissipative, opt);
  std::array<std::array<double, 5>, 2> v{};
  std::array<std::array<bool, 5>, 2> seen{};
  for (const auto& r : res.records) {
    if (!r.k_index || r.family < 1) continue;
    for (size_t i = 0; i < table_columns().size(); ++i) {
      if (*r.k_index != table_columns()[i]) continue;
      const double k = table_columns()[i];
      v[r.family - 1][i] = k * k * r.lambda.real();
      seen[r.family - 1][i] = true;
    }
  }
  for (const auto& row : seen)
    for (bool s : row)
      if (!s) throw Error(ErrorCode::IncompleteBox, "table entry missing from the computed spectrum");
  return v;
}

inline Artifacts run_table(const RunConfig& c) {
  const auto v = table_values(c.params, options_of(c));
  std::string t = "k";
  for (int k : table_columns()) t += "\t" + std::to_string(k);
  t += "\n";
  for (int j = 0; j < 2; ++j) {
    t += "k^2 Re(lambda_k^" + std::to_string(j + 1) + ")";
    for (double x : v[j]) t += "\t" + num6(x);
    t += "\n";
  }
  return {{{".txt", csv_header(c) + t}}, t};
}

/// Scatter of the computed spectrum with the imaginary axis and i k pi lines.
inline std::string spectrum_svg(const std::vector<EigenvalueRecord>& recs, int k_max, int width, int height,
                                const std::string& header) {
  constexpr double pi = std::numbers::pi;
  double re_lo = 0.0;
  for (const auto& r : recs) re_lo = std::min(re_lo, r.lambda.real());
  re_lo = re_lo < 0.0 ? 1.1 * re_lo : -1.0;
  const double re_hi = 0.15 * std::abs(re_lo);
  const double im_hi = (k_max + 1) * pi;
  const double margin = 40.0;
  auto X = [&](double re) { return margin + (re - re_lo) / (re_hi - re_lo) * (width - 2 * margin); };
  auto Y = [&](double im) { return height / 2.0 - im / im_hi * (height / 2.0 - margin); };
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(width) +
       "\" height=\"" + std::to_string(height) + "\">\n";
  s += "<!--\n" + header + "-->\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(height) +
       "\" fill=\"white\"/>\n";
  const int step = std::max(1, k_max / 10);
  for (int k = -k_max; k <= k_max; k += step) {
    if (k == 0) continue;
    const std::string y = num6(Y(k * pi));
    s += "<line x1=\"" + num6(margin) + "\" y1=\"" + y + "\" x2=\"" + num6(width - margin) + "\" y2=\"" + y +
         "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    s += "<text x=\"" + num6(width - margin + 2) + "\" y=\"" + y + "\" font-size=\"9\">" + std::to_string(k) +
         "i&#960;</text>\n";
  }
  s += "<line x1=\"" + num6(margin) + "\" y1=\"" + num6(Y(0.0)) + "\" x2=\"" + num6(width - margin) + "\" y2=\"" +
       num6(Y(0.0)) + "\" stroke=\"#888888\" stroke-width=\"0.8\"/>\n";
  s += "<line id=\"imaginary-axis\" x1=\"" + num6(X(0.0)) + "\" y1=\"" + num6(margin) + "\" x2=\"" + num6(X(0.0)) +
       "\" y2=\"" + num6(height - margin) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (const auto& r : recs) {
    if (std::abs(r.lambda.imag()) > im_hi) continue;
    s += "<circle cx=\"" + num(X(r.lambda.real())) + "\" cy=\"" + num(Y(r.lambda.imag())) +
         "\" r=\"2\" fill=\"" + (r.family == 2 ? "#c0392b" : "#1f4e9c") + "\" data-re=\"" + num(r.lambda.real()) +
         "\" data-im=\"" + num(r.lambda.imag()) + "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

inline Artifacts run_plot(const RunConfig& c) {
  const auto res = spectrum_in_strip(c.params, c.k_max, variant_of(c), options_of(c));
  const std::string svg = spectrum_svg(res.records, c.k_max, c.width, c.height, csv_header(c));
  return {{{".svg", svg}}, svg};
}

inline Artifacts run(const RunConfig& c) {
  validate(c);
  if (c.command == "spectrum") return run_spectrum(c);
  if (c.command == "predict") return run_predict(c);
  if (c.command == "modes") return run_modes(c);
  if (c.command == "riesz") return run_riesz(c);
  if (c.command == "decay") return run_decay(c);
  if (c.command == "table") return run_table(c);
  return run_plot(c);
}

/// Writes each artifact to out + suffix; without an output prefix the
/// primary artifact goes to stdout.
inline void emit(const RunConfig& c, const Artifacts& a, std::ostream& os) {
  if (c.out.empty()) {
    os << a.stdout_text;
    return;
  }
  for (const auto& [suffix, content] : a.files) {
    std::ofstream f(c.out + suffix, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + c.out + suffix);
    f << content;
  }
  if (c.command == "table") os << a.stdout_text;
}

inline std::string error_json(const std::string& code, const std::string& message) {
  nlohmann::json j;
  j["error"] = code;
  j["message"] = message;
  return j.dump();
}

}  // namespace tbeam::cli
