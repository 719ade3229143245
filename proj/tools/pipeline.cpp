#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "sphmean/analysis.hpp"
#include "sphmean/error.hpp"
#include "sphmean/field_io.hpp"
#include "sphmean/forward.hpp"
#include "sphmean/inversion.hpp"
#include "sphmean/phantom.hpp"
#include "sphmean/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sphmean::pipeline {

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, "config." + key + ": " + what);
}

double positive(const json& cfg, const std::string& section, const std::string& key) {
  const json& v = cfg.at(section).at(key);
  if (!v.is_number()) config_error(section + "." + key, "must be a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) config_error(section + "." + key, "must be > 0");
  return x;
}

std::size_t whole_count(double span, double step, const std::string& key) {
  const double s = span / step;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9 * std::max(1.0, s)) config_error(key, "extent must be a whole number of steps");
  return static_cast<std::size_t>(r);
}

struct Grids {
  Axis window;   // trace x' nodes
  Axis t;        // trace t nodes
  Axis out_xp;   // reconstruction x'
  Axis out_xn;   // reconstruction xn
  Axis f_xp;     // phantom samples
  Axis f_xn;
};

Grids make_grids(const json& cfg) {
  const json& g = cfg.at("grid");
  const Phantom p = phantom_from_json(cfg.at("phantom"));
  const double dx = g.at("xp_step").get<double>();
  const double half = g.at("xp_half").get<double>();
  const double t_max = g.at("t_max").get<double>();
  const double dt = g.at("t_step").get<double>();
  Grids out;
  const std::size_t nx = whole_count(2.0 * half, dx, "grid.xp_half");
  out.window = Axis{"x'", p.center_xp - half, dx, nx, Parity::None};
  out.t = Axis{"t", 0.0, dt, whole_count(t_max, dt, "grid.t_max") + 1, Parity::Even};

  const double oh = g.at("out_xp_half").get<double>();
  const auto lo = static_cast<std::ptrdiff_t>(std::ceil((p.center_xp - oh - out.window.origin) / dx - 1e-9));
  const auto hi = static_cast<std::ptrdiff_t>(std::floor((p.center_xp + oh - out.window.origin) / dx + 1e-9));
  if (lo < 0 || hi >= static_cast<std::ptrdiff_t>(nx) || hi - lo < 1)
    config_error("grid.out_xp_half", "reconstruction range must lie inside the trace window");
  out.out_xp = Axis{"x'", out.window.at(static_cast<std::size_t>(lo)), dx,
                    static_cast<std::size_t>(hi - lo + 1), Parity::None};
  const double n0 = g.at("xn_min").get<double>(), n1 = g.at("xn_max").get<double>();
  const double dn = g.at("xn_step").get<double>();
  const auto nn = static_cast<std::size_t>(std::floor((n1 - n0) / dn + 1e-9)) + 1;
  out.out_xn = Axis{"xn", n0, dn, std::max<std::size_t>(nn, 2), Parity::None};

  const auto f_lo = static_cast<std::ptrdiff_t>(std::floor((p.center_xp - p.radius - out.window.origin) / dx)) - 2;
  const auto f_hi = static_cast<std::ptrdiff_t>(std::ceil((p.center_xp + p.radius - out.window.origin) / dx)) + 2;
  out.f_xp = Axis{"x'", out.window.origin + static_cast<double>(f_lo) * dx, dx,
                  static_cast<std::size_t>(f_hi - f_lo + 1), Parity::None};
  out.f_xn = Axis{"xn", 0.0, dx, static_cast<std::size_t>(std::ceil(p.radius / dx)) + 3, Parity::Even};
  return out;
}

std::string config_sha(const json& cfg) {
  const std::string s = cfg.dump();
  return sha256_hex({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json read_json(const fs::path& path, const std::string& stage, const std::string& producer) {
  std::ifstream is(path);
  if (!is)
    throw Error(ErrorCode::Io, "stage '" + stage + "' needs " + path.filename().string() + "; run '" +
                                   producer + "' first");
  return json::parse(is);
}

GridField require_field(const fs::path& stem, const std::string& stage, const std::string& producer) {
  if (!fs::exists(header_path(stem)))
    throw Error(ErrorCode::Io, "stage '" + stage + "' needs " + header_path(stem).filename().string() +
                                   "; run '" + producer + "' first");
  return read_field(stem);
}

// Paths of the files making up each named output (a field stem expands to
// its header and payload).
std::vector<fs::path> expand(const fs::path& out, const std::vector<std::string>& names) {
  std::vector<fs::path> files;
  for (const auto& n : names) {
    const fs::path p = out / n;
    if (p.has_extension()) {
      files.push_back(p);
    } else {
      files.push_back(header_path(p));
      files.push_back(payload_path(p));
    }
  }
  return files;
}

void write_manifest(const fs::path& out, const std::string& stage, const json& cfg,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  json in = json::object(), res = json::object();
  for (const auto& f : expand(out, inputs)) in[f.filename().string()] = sha256_file(f);
  for (const auto& f : expand(out, outputs)) res[f.filename().string()] = sha256_file(f);
  write_json({{"stage", stage}, {"config_sha256", config_sha(cfg)}, {"config", cfg}, {"inputs", in},
              {"outputs", res}},
             out / ("manifest_" + stage + ".json"));
}

std::string primary_route(const json& cfg) {
  const std::string route = cfg.at("forward").at("route");
  return route == "both" ? cfg.at("forward").at("primary").get<std::string>() : route;
}

GridField truncate_t(const GridField& trace, double t_max) {
  const Axis& ta = trace.axis(1);
  const auto keep = std::min(ta.count, static_cast<std::size_t>(std::floor(t_max / ta.step + 1e-9)) + 1);
  if (keep == ta.count) return trace;
  Axis t = ta;
  t.count = keep;
  std::vector<double> v(trace.axis(0).count * keep);
  for (std::size_t i = 0; i < trace.axis(0).count; ++i)
    for (std::size_t j = 0; j < keep; ++j) v[i * keep + j] = trace(i, j);
  return GridField({trace.axis(0), t}, std::move(v), trace.meta());
}

GridField sample_reference(const Phantom& p, const Axis& xp, const Axis& xn) {
  std::vector<double> v(xp.count * xn.count);
  for (std::size_t i = 0; i < xp.count; ++i)
    for (std::size_t j = 0; j < xn.count; ++j) v[i * xn.count + j] = eval_phantom(p, xp.at(i), xn.at(j));
  return GridField({xp, xn}, std::move(v));
}

double weighted_route_difference(const GridField& a, const GridField& b) {
  const Axis& t = a.axis(1);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.axis(0).count; ++i)
    for (std::size_t j = 1; j < t.count; ++j) {
      const double w = 1.0 / t.at(j);
      num += w * (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
      den += w * b(i, j) * b(i, j);
    }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double threshold(const json& cfg, const std::string& key) { return cfg.at("thresholds").at(key).get<double>(); }

}  // namespace

json default_config() {
  return {
      {"phantom", {{"kind", "gauss_poly"}, {"k", 2}, {"a", 4.0}, {"center_xp", 0.0}, {"amplitude", 1.0}, {"R", 1.0}}},
      {"grid",
       {{"xp_half", 16.0},
        {"xp_step", 0.0625},
        {"t_max", 16.0},
        {"t_step", 0.015625},
        {"out_xp_half", 1.5},
        {"xn_min", 0.1},
        {"xn_max", 1.5},
        {"xn_step", 0.05}}},
      {"forward", {{"route", "both"}, {"primary", "spectral"}}},
      {"inversion", {{"route", "both"}, {"t_max", 16.0}, {"aperture", 16.0}, {"pn_step", 0.0625}}},
      {"verify",
       {{"probe_extent", 1.5},
        {"eps", {0.25, 0.5, 1.0, 2.0, 4.0}},
        {"multiplier_eps", {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}}}},
      {"seed", 7},
      {"thresholds",
       {{"forward_route", 0.01},
        {"isometry", 0.02},
        {"reconstruction", 0.05},
        {"route_agreement", 0.03},
        {"range_floor_factor", 10.0},
        {"range_leak", 1e-3},
        {"perturbation_r2", 0.99},
        {"leak_ratio", 10.0},
        {"decay_slope", 0.05},
        {"multiplier", 1e-6},
        {"oracle", 1e-10}}},
  };
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorCode::InvalidArgument, "override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &cfg;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    if (!node->contains(parts[k]) || !(*node)[parts[k]].is_object())
      throw Error(ErrorCode::InvalidArgument, "override '" + path + "': no section '" + parts[k] + "'");
    node = &(*node)[parts[k]];
  }
  if (!node->contains(parts.back()))
    throw Error(ErrorCode::InvalidArgument, "override '" + path + "': unknown key");
  (*node)[parts.back()] = value;
}

json load_config(const fs::path& file, const std::vector<std::string>& overrides) {
  json cfg = default_config();
  if (!file.empty()) {
    std::ifstream is(file);
    if (!is) throw Error(ErrorCode::Io, "cannot read config " + file.string());
    const json user = json::parse(is, nullptr, false);
    if (user.is_discarded() || !user.is_object())
      throw Error(ErrorCode::InvalidArgument, "config " + file.string() + " is not a JSON object");
    cfg.merge_patch(user);
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  validate_config(cfg);
  return cfg;
}

void validate_config(const json& cfg) {
  for (const char* section : {"phantom", "grid", "forward", "inversion", "verify", "thresholds"})
    if (!cfg.contains(section) || !cfg[section].is_object()) config_error(section, "missing section");
  try {
    phantom_from_json(cfg["phantom"]);
  } catch (const Error& e) {
    config_error("phantom", e.what());
  }
  for (const char* k : {"xp_half", "xp_step", "t_max", "t_step", "out_xp_half", "xn_min", "xn_max", "xn_step"})
    positive(cfg, "grid", k);
  if (cfg["grid"]["xn_max"].get<double>() <= cfg["grid"]["xn_min"].get<double>())
    config_error("grid.xn_max", "must exceed grid.xn_min");
  for (const char* k : {"t_max", "aperture", "pn_step"}) positive(cfg, "inversion", k);
  if (cfg["inversion"]["t_max"].get<double>() > cfg["grid"]["t_max"].get<double>() * (1 + 1e-12))
    config_error("inversion.t_max", "must not exceed grid.t_max");
  const std::string fr = cfg["forward"].value("route", "");
  if (fr != "abel" && fr != "spectral" && fr != "both") config_error("forward.route", "must be abel, spectral or both");
  const std::string pr = cfg["forward"].value("primary", "");
  if (pr != "abel" && pr != "spectral") config_error("forward.primary", "must be abel or spectral");
  const std::string ir = cfg["inversion"].value("route", "");
  if (ir != "direct" && ir != "spectral" && ir != "both")
    config_error("inversion.route", "must be direct, spectral or both");
  if (!cfg.contains("seed") || !cfg["seed"].is_number_integer() || cfg["seed"].get<std::int64_t>() < 0)
    config_error("seed", "must be a non-negative integer");
  for (const char* k : {"eps", "multiplier_eps"}) {
    const json& v = cfg["verify"][k];
    if (!v.is_array() || v.empty()) config_error(std::string("verify.") + k, "must be a non-empty array");
    for (const auto& e : v)
      if (!e.is_number() || !(e.get<double>() > 0.0)) config_error(std::string("verify.") + k, "entries must be > 0");
  }
  positive(cfg, "verify", "probe_extent");
  for (auto it = cfg["thresholds"].begin(); it != cfg["thresholds"].end(); ++it)
    positive(cfg, "thresholds", it.key());
  make_grids(cfg);
}

StageResult run_phantom(const json& cfg, const fs::path& out) {
  fs::create_directories(out);
  const Phantom p = phantom_from_json(cfg.at("phantom"));
  const Grids g = make_grids(cfg);
  write_field(sample_phantom(p, g.f_xp, g.f_xn), out / "phantom");
  write_manifest(out, "phantom", cfg, {}, {"phantom"});
  return {true, {{"phantom", to_json(p)}}};
}

StageResult run_forward(const json& cfg, const fs::path& out) {
  const GridField f = require_field(out / "phantom", "forward", "phantom");
  const Phantom p = phantom_from_json(f.meta().at("phantom"));
  const Grids g = make_grids(cfg);
  const std::string route = cfg.at("forward").at("route");
  std::vector<std::string> outputs;

  std::optional<GridField> abel, spec;
  if (route == "abel" || route == "both") {
    const GridField means = forward::spherical_means(p, g.window, g.t);
    write_field(means, out / "means");
    abel = forward::mean_to_trace(means);
    write_field(*abel, out / "trace_abel");
    outputs.insert(outputs.end(), {"means", "trace_abel"});
  }
  if (route == "spectral" || route == "both") {
    spec = forward::wave_trace_spectral(forward::periodic_box(p, g.t.back(), g.window), g.t, g.window);
    write_field(*spec, out / "trace_spectral");
    outputs.push_back("trace_spectral");
  }
  const GridField& primary = primary_route(cfg) == "abel" ? *abel : *spec;
  forward::write_csv(forward::decay_profile(primary), out / "decay.csv");
  outputs.push_back("decay.csv");

  StageResult res;
  res.summary = {{"routes", route}, {"primary", primary_route(cfg)}};
  if (abel && spec) {
    const double diff = weighted_route_difference(*abel, *spec);
    const double thr = threshold(cfg, "forward_route");
    res.pass = diff <= thr;
    res.summary["route_rel_diff"] = diff;
    res.summary["threshold"] = thr;
  }
  res.summary["pass"] = res.pass;
  write_json(res.summary, out / "forward_report.json");
  outputs.push_back("forward_report.json");
  write_manifest(out, "forward", cfg, {"phantom"}, outputs);
  return res;
}

StageResult run_invert(const json& cfg, const fs::path& out) {
  const std::string trace_name = "trace_" + primary_route(cfg);
  const GridField f = require_field(out / "phantom", "invert", "phantom");
  const GridField full = require_field(out / trace_name, "invert", "forward");
  const Phantom p = phantom_from_json(f.meta().at("phantom"));
  const Grids g = make_grids(cfg);
  const json& inv = cfg.at("inversion");
  const double t_max = inv.at("t_max").get<double>();
  const GridField trace = truncate_t(full, t_max);
  const GridField ref = sample_reference(p, g.out_xp, g.out_xn);
  const std::string route = inv.at("route");
  const double thr = threshold(cfg, "reconstruction");

  StageResult res;
  std::vector<std::string> outputs;
  std::ofstream csv(out / "errors.csv");
  csv << "route,rel_l2_error,threshold,pass\n" << std::setprecision(17);
  std::optional<GridField> direct, spectral_rec;
  auto record = [&](const std::string& name, const GridField& rec) {
    const double err = relative_l2(rec, ref);
    const bool ok = err <= thr;
    res.pass = res.pass && ok;
    res.summary[name] = {{"rel_l2_error", err}, {"threshold", thr}, {"pass", ok}};
    csv << name << ',' << err << ',' << thr << ',' << (ok ? "true" : "false") << '\n';
  };
  if (route == "direct" || route == "both") {
    direct = inversion::invert_direct(trace, g.out_xp, g.out_xn,
                                      {t_max, inv.at("aperture").get<double>(), 2.0});
    write_field(*direct, out / "recon_direct");
    outputs.push_back("recon_direct");
    record("direct", *direct);
  }
  if (route == "spectral" || route == "both") {
    const auto grid = spectral::default_zgrid(trace.axis(1).back(), inv.at("pn_step").get<double>());
    spectral_rec = inversion::invert_spectral(trace, g.out_xp, g.out_xn, grid);
    write_field(*spectral_rec, out / "recon_spectral");
    outputs.push_back("recon_spectral");
    record("spectral", *spectral_rec);
    res.summary["spectral"]["range_leak"] = spectral_rec->meta().at("range_leak");
  }
  if (direct && spectral_rec) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const double d = direct->values()[k] - spectral_rec->values()[k];
      num += d * d;
      den += ref.values()[k] * ref.values()[k];
    }
    const double diff = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    const double athr = threshold(cfg, "route_agreement");
    const bool ok = diff <= athr;
    res.pass = res.pass && ok;
    res.summary["route_difference"] = {{"value", diff}, {"threshold", athr}, {"pass", ok}};
    csv << "route_difference," << diff << ',' << athr << ',' << (ok ? "true" : "false") << '\n';
  }
  csv.close();
  outputs.push_back("errors.csv");
  res.summary["pass"] = res.pass;
  write_json(res.summary, out / "invert_report.json");
  outputs.push_back("invert_report.json");
  write_manifest(out, "invert", cfg, {"phantom", trace_name}, outputs);
  return res;
}

StageResult run_verify(const json& cfg, const fs::path& out) {
  const std::string trace_name = "trace_" + primary_route(cfg);
  const GridField f = require_field(out / "phantom", "verify", "phantom");
  const GridField trace = require_field(out / trace_name, "verify", "forward");
  const Phantom p = phantom_from_json(f.meta().at("phantom"));
  const json& th = cfg.at("thresholds");
  StageResult res;
  auto check = [&](json& section, bool ok) {
    section["pass"] = ok;
    res.pass = res.pass && ok;
  };

  // Weighted norm identity.
  const auto iso = analysis::isometry_check(f, trace);
  json j_iso = analysis::to_json(iso);
  j_iso["threshold"] = th.at("isometry");
  check(j_iso, iso.rel_gap <= th.at("isometry").get<double>());
  res.summary["isometry"] = j_iso;

  // Range tests.
  const auto probes = analysis::probe_lattice(cfg.at("verify").at("probe_extent").get<double>(), p.center_xp);
  const auto zgrid = spectral::default_zgrid(trace.axis(1).back(), cfg.at("inversion").at("pn_step").get<double>());
  const auto range = analysis::range_residual(trace, probes);
  analysis::write_csv(range, out / "range.csv");
  const double floor = analysis::range_noise_floor(trace, probes);
  const double leak = analysis::range_leak(trace, zgrid);
  json j_range = analysis::to_json(range);
  j_range.erase("probes");
  j_range["noise_floor"] = floor;
  j_range["floor_factor"] = th.at("range_floor_factor");
  j_range["residual_pass"] = range.max_normalized <= th.at("range_floor_factor").get<double>() * floor;
  j_range["leak"] = leak;
  j_range["leak_threshold"] = th.at("range_leak");
  j_range["leak_pass"] = leak <= th.at("range_leak").get<double>();
  bool range_ok = j_range["residual_pass"].get<bool>() && j_range["leak_pass"].get<bool>();
  if (range.peak > 0.0) {
    const auto eps = cfg.at("verify").at("eps").get<std::vector<double>>();
    const auto sweep = analysis::perturbation_sweep(trace, probes, eps, cfg.at("seed").get<std::uint64_t>(), zgrid);
    json j_sweep = analysis::to_json(sweep);
    const double min_leak = *std::min_element(sweep.leak.begin(), sweep.leak.end());
    j_sweep["r2_pass"] = sweep.r_squared >= th.at("perturbation_r2").get<double>();
    j_sweep["leak_ratio_pass"] = min_leak >= th.at("leak_ratio").get<double>() * leak;
    range_ok = range_ok && j_sweep["r2_pass"].get<bool>() && j_sweep["leak_ratio_pass"].get<bool>();
    j_range["perturbation"] = j_sweep;
  } else {
    j_range["perturbation"] = {{"skipped", "zero data"}};
  }
  check(j_range, range_ok);
  res.summary["range"] = j_range;

  // Decay envelope.
  const auto profile = forward::decay_profile(trace);
  forward::write_csv(profile, out / "decay.csv");
  const auto fit = analysis::decay_check(profile, 2.0 * p.radius, trace.axis(1).back());
  json j_decay = {{"slope", fit.slope}, {"points", fit.points}, {"threshold", th.at("decay_slope")}};
  check(j_decay, fit.slope <= th.at("decay_slope").get<double>());
  res.summary["decay"] = j_decay;

  // Multiplier limit.
  const double pi = 3.14159265358979323846;
  const Axis xi_p{"freq", -pi, 2.0 * pi / 64.0, 64, Parity::None};
  const Axis xi_n{"freq", -2.0 * pi, 4.0 * pi / 64.0, 64, Parity::None};
  const auto meps = cfg.at("verify").at("multiplier_eps").get<std::vector<double>>();
  const auto rows = spectral::verify_multiplier(xi_p, xi_n, meps);
  spectral::write_csv(rows, out / "multiplier.csv");
  bool monotone = true;
  for (std::size_t k = 1; k < rows.size(); ++k)
    monotone = monotone && rows[k].max_abs_deviation < rows[k - 1].max_abs_deviation;
  json j_mult = {{"final_deviation", rows.back().max_abs_deviation}, {"monotone", monotone},
                 {"threshold", th.at("multiplier")}};
  check(j_mult, monotone && rows.back().max_abs_deviation <= th.at("multiplier").get<double>());
  res.summary["multiplier"] = j_mult;

  // Gaussian integral oracles.
  using C = std::complex<double>;
  const C ws[] = {C(1, 0), C(1, 2), C(2, -1), C(0.5, 0.5), C(3, 4)};
  const double taus[] = {0.0, 1.0, 2.0, 3.0, 5.0};
  std::ofstream ocsv(out / "oracle.csv");
  ocsv << "w_re,w_im,tau,numeric_re,numeric_im,closed_re,closed_im,abs_error,half_line_abs_error\n"
       << std::setprecision(17);
  double worst = 0.0;
  for (C w : ws)
    for (double tau : taus) {
      const auto r = analysis::gaussian_integral_oracle(w, tau);
      const double e1 = std::abs(r.numeric - r.closed_form);
      const double e2 = std::abs(r.half_line_numeric - r.half_line_closed);
      worst = std::max({worst, e1, e2});
      ocsv << w.real() << ',' << w.imag() << ',' << tau << ',' << r.numeric.real() << ',' << r.numeric.imag()
           << ',' << r.closed_form.real() << ',' << r.closed_form.imag() << ',' << e1 << ',' << e2 << '\n';
    }
  ocsv.close();
  json j_oracle = {{"max_abs_error", worst}, {"threshold", th.at("oracle")}};
  check(j_oracle, worst <= th.at("oracle").get<double>());
  res.summary["oracle"] = j_oracle;

  res.summary["pass"] = res.pass;
  write_json(res.summary, out / "verify.json");
  write_manifest(out, "verify", cfg, {"phantom", trace_name},
                 {"verify.json", "range.csv", "decay.csv", "multiplier.csv", "oracle.csv"});
  return res;
}

StageResult run_report(const json& cfg, const fs::path& out) {
  const json fwd = read_json(out / "forward_report.json", "report", "forward");
  const json inv = read_json(out / "invert_report.json", "report", "invert");
  const json ver = read_json(out / "verify.json", "report", "verify");

  std::ofstream csv(out / "report.csv");
  csv << "check,value,threshold,pass\n" << std::setprecision(17);
  auto row = [&](const std::string& name, const json& value, const json& thr, const json& pass) {
    csv << name << ',' << value.dump() << ',' << thr.dump() << ',' << (pass.get<bool>() ? "true" : "false") << '\n';
  };
  if (fwd.contains("route_rel_diff")) row("forward_route", fwd["route_rel_diff"], fwd["threshold"], fwd["pass"]);
  for (const char* r : {"direct", "spectral"})
    if (inv.contains(r)) row(std::string("reconstruction_") + r, inv[r]["rel_l2_error"], inv[r]["threshold"], inv[r]["pass"]);
  if (inv.contains("route_difference"))
    row("route_agreement", inv["route_difference"]["value"], inv["route_difference"]["threshold"],
        inv["route_difference"]["pass"]);
  row("isometry", ver["isometry"]["rel_gap"], ver["isometry"]["threshold"], ver["isometry"]["pass"]);
  row("range_residual", ver["range"]["max_normalized"],
      json(ver["range"]["floor_factor"].get<double>() * ver["range"]["noise_floor"].get<double>()),
      ver["range"]["residual_pass"]);
  row("range_leak", ver["range"]["leak"], ver["range"]["leak_threshold"], ver["range"]["leak_pass"]);
  if (ver["range"]["perturbation"].contains("r_squared")) {
    row("perturbation_r2", ver["range"]["perturbation"]["r_squared"], cfg["thresholds"]["perturbation_r2"],
        ver["range"]["perturbation"]["r2_pass"]);
  }
  row("decay_slope", ver["decay"]["slope"], ver["decay"]["threshold"], ver["decay"]["pass"]);
  row("multiplier", ver["multiplier"]["final_deviation"], ver["multiplier"]["threshold"], ver["multiplier"]["pass"]);
  row("oracle", ver["oracle"]["max_abs_error"], ver["oracle"]["threshold"], ver["oracle"]["pass"]);
  csv.close();

  StageResult res;
  res.pass = fwd.value("pass", true) && inv.value("pass", true) && ver.value("pass", true);
  res.summary = {{"forward", fwd}, {"invert", inv}, {"verify", ver}, {"pass", res.pass}};
  write_json(res.summary, out / "report.json");
  write_manifest(out, "report", cfg, {"forward_report.json", "invert_report.json", "verify.json"},
                 {"report.json", "report.csv"});
  return res;
}

}  // namespace sphmean::pipeline
