#pragma once

// JSON (de)serialization of gap sets, run configs, trajectory grids, field
// grids and periodic fields. Malformed input raises ConfigError naming the key.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dubrovin/errors.hpp"
#include "dubrovin/flows.hpp"
#include "dubrovin/gapset.hpp"
#include "dubrovin/oracle.hpp"
#include "dubrovin/reconstruct.hpp"
#include "dubrovin/rng.hpp"

namespace dubrovin::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

[[nodiscard]] inline json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fputc('\n', stdout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text << '\n';
}

inline void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2)); }

[[nodiscard]] inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Fingerprint of a JSON document; object keys are sorted so it is canonical.
[[nodiscard]] inline std::string config_hash(const json& j) {
  const std::string s = j.dump();
  return hex64(fnv1a64(s.data(), s.size()));
}

// ---------------------------------------------------------------------------
// Typed field access.

namespace detail {

inline const json& field(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ctx + ": missing key '" + key + "'");
  return *it;
}

inline double number(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_number()) throw ConfigError(ctx + ": key '" + key + "' must be a number");
  return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& ctx) {
  return j.contains(key) ? number(j, key, ctx) : fallback;
}

inline std::vector<double> numbers(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_array()) throw ConfigError(ctx + ": key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError(ctx + ": key '" + key + "' must contain only numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::size_t count(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(ctx + ": key '" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gap sets and configs.

[[nodiscard]] inline json to_json(const GapSet& gs) {
  json gaps = json::array();
  for (const Gap& g : gs.gaps()) gaps.push_back({g.lo, g.hi});
  return {{"base_energy", gs.base_energy()}, {"gaps", gaps}};
}

[[nodiscard]] inline GapSet gapset_from_json(const json& j, const std::string& ctx = "gapset") {
  const double base = detail::number(j, "base_energy", ctx);
  const json& arr = detail::field(j, "gaps", ctx);
  if (!arr.is_array()) throw ConfigError(ctx + ": key 'gaps' must be an array of [lo, hi] pairs");
  std::vector<Gap> gaps;
  for (const json& g : arr) {
    if (!g.is_array() || g.size() != 2 || !g[0].is_number() || !g[1].is_number())
      throw ConfigError(ctx + ": key 'gaps' must be an array of [lo, hi] pairs");
    gaps.push_back({g[0].get<double>(), g[1].get<double>()});
  }
  return GapSet(base, std::move(gaps));
}

[[nodiscard]] inline QPConstants qp_constants_from_json(const json& j, const std::string& ctx) {
  QPConstants k;
  if (!j.contains("constants")) return k;
  const json& c = j.at("constants");
  const std::string cc = ctx + ".constants";
  k.L = detail::number_or(c, "L", k.L, cc);
  k.a = detail::number_or(c, "a", k.a, cc);
  k.b = detail::number_or(c, "b", k.b, cc);
  k.c = detail::number_or(c, "c", k.c, cc);
  k.D = detail::number_or(c, "D", k.D, cc);
  k.F = detail::number_or(c, "F", k.F, cc);
  return k;
}

/// QP family: either explicit "labels" ([{"m": [...], "gamma": g, "lo": e}, ...])
/// or generated from "max_norm".
[[nodiscard]] inline QPGapFamily qp_family_from_json(const json& j, const std::string& ctx = "qp") {
  const std::vector<double> omega = detail::numbers(j, "omega", ctx);
  const double eps = detail::number(j, "epsilon", ctx);
  const double kappa0 = detail::number(j, "kappa0", ctx);
  const double a0 = detail::number_or(j, "a0", 0.1, ctx);
  const double b0 = detail::number_or(j, "b0", 2.0, ctx);
  const double base = detail::number_or(j, "base_energy", 0.0, ctx);
  if (!j.contains("labels"))
    return make_qp_family(omega, a0, b0, eps, kappa0, static_cast<int>(detail::count(j, "max_norm", ctx)), base);
  QPGapFamily fam;
  fam.omega = omega;
  fam.a0 = a0;
  fam.b0 = b0;
  fam.epsilon = eps;
  fam.kappa0 = kappa0;
  fam.base_energy = base;
  const json& labels = j.at("labels");
  if (!labels.is_array()) throw ConfigError(ctx + ": key 'labels' must be an array");
  for (const json& l : labels) {
    QPLabel lab;
    const json& m = detail::field(l, "m", ctx + ".labels");
    if (!m.is_array()) throw ConfigError(ctx + ".labels: key 'm' must be an integer array");
    for (const json& v : m) {
      if (!v.is_number_integer()) throw ConfigError(ctx + ".labels: key 'm' must be an integer array");
      lab.m.push_back(v.get<int>());
    }
    if (lab.m.size() != omega.size()) throw ConfigError(ctx + ".labels: key 'm' must have one entry per frequency");
    lab.gamma = detail::number(l, "gamma", ctx + ".labels");
    lab.lo = detail::number(l, "lo", ctx + ".labels");
    const int norm = l1_norm(lab.m);
    if (norm == 0) throw ConfigError(ctx + ".labels: key 'm' must be nonzero");
    if (std::abs(dot(lab.m, omega)) < a0 * std::pow(norm, -b0))
      throw ConfigError(ctx + ".labels: key 'm' violates the Diophantine condition");
    fam.labels.push_back(std::move(lab));
  }
  std::sort(fam.labels.begin(), fam.labels.end(), [](const QPLabel& a, const QPLabel& b) { return a.lo < b.lo; });
  return fam;
}

struct RunConfig {
  std::shared_ptr<const GapSet> gapset;
  std::vector<double> phi0;
  std::optional<QPGapFamily> qp;
  QPConstants qp_constants;
  json source;
};

/// A config names a gap set directly ("base_energy" + "gaps") or through
/// "family": "geometric" {n} | "power" {n, power, spacing} | "qp" {...}.
/// "phi0" defaults to pi/2 in every gap.
[[nodiscard]] inline RunConfig config_from_json(const json& j) {
  RunConfig rc;
  rc.source = j;
  const std::string ctx = "config";
  if (!j.is_object()) throw ConfigError("config: expected an object");
  if (j.contains("family")) {
    const json& fam = j.at("family");
    if (!fam.is_string()) throw ConfigError("config: key 'family' must be a string");
    const std::string name = fam.get<std::string>();
    if (name == "geometric") {
      rc.gapset = std::make_shared<const GapSet>(make_geometric_family(detail::count(j, "n", ctx)));
    } else if (name == "power") {
      rc.gapset = std::make_shared<const GapSet>(make_power_family(
          detail::count(j, "n", ctx), detail::number_or(j, "power", 1.0, ctx), detail::number_or(j, "spacing", 2.0, ctx)));
    } else if (name == "qp") {
      rc.qp = qp_family_from_json(j, ctx);
      rc.qp_constants = qp_constants_from_json(j, ctx);
      rc.gapset = std::make_shared<const GapSet>(rc.qp->to_gapset());
    } else {
      throw ConfigError("config: key 'family' has unknown value '" + name + "'");
    }
  } else {
    rc.gapset = std::make_shared<const GapSet>(gapset_from_json(j, ctx));
  }
  if (j.contains("phi0")) {
    rc.phi0 = detail::numbers(j, "phi0", ctx);
    if (rc.phi0.size() != rc.gapset->size()) throw ConfigError("config: key 'phi0' must have one angle per gap");
  } else {
    rc.phi0.assign(rc.gapset->size(), 0.5 * std::numbers::pi);
  }
  return rc;
}

[[nodiscard]] inline RunConfig load_config(const std::string& path) { return config_from_json(load_file(path)); }

// ---------------------------------------------------------------------------
// Grids and fields.

[[nodiscard]] inline json metadata(const std::string& command, const json& config, double tol,
                                   std::optional<std::uint64_t> seed = std::nullopt) {
  json m = {{"tool", "dubrovin"}, {"version", kVersion}, {"command", command}, {"config_hash", config_hash(config)}};
  if (tol > 0.0) m["tol"] = tol;
  if (seed) m["seed"] = *seed;
  return m;
}

[[nodiscard]] inline json to_json(const TrajectoryGrid& g, const json& meta, std::optional<double> x_period = {}) {
  json pts = json::array();
  for (const auto& p : g.points) pts.push_back(p);
  json j = {{"metadata", meta},
            {"gapset", to_json(*g.gapset)},
            {"x_nodes", g.x_nodes},
            {"t_nodes", g.t_nodes},
            {"layout", "row-major, x outer, t inner"},
            {"phi", pts},
            {"stats", {{"accepted", g.stats.accepted}, {"rejected", g.stats.rejected}, {"evaluations", g.stats.evaluations}}}};
  if (x_period) j["x_period"] = *x_period;
  return j;
}

[[nodiscard]] inline TrajectoryGrid grid_from_json(const json& j) {
  const std::string ctx = "grid";
  TrajectoryGrid g;
  g.gapset = std::make_shared<const GapSet>(gapset_from_json(detail::field(j, "gapset", ctx), ctx + ".gapset"));
  g.x_nodes = detail::numbers(j, "x_nodes", ctx);
  g.t_nodes = detail::numbers(j, "t_nodes", ctx);
  const json& pts = detail::field(j, "phi", ctx);
  if (!pts.is_array() || pts.size() != g.x_nodes.size() * g.t_nodes.size())
    throw ConfigError("grid: key 'phi' must hold one point per (x, t) node");
  for (const json& p : pts) {
    if (!p.is_array() || p.size() != g.gapset->size())
      throw ConfigError("grid: key 'phi' entries must have one angle per gap");
    g.points.push_back(p.get<std::vector<double>>());
  }
  if (j.contains("metadata") && j.at("metadata").contains("tol")) g.tol = j.at("metadata").at("tol").get<double>();
  return g;
}

[[nodiscard]] inline json to_json(const FieldGrid& f, const json& meta) {
  json j = {{"metadata", meta},
            {"x_nodes", f.x_nodes},
            {"t_nodes", f.t_nodes},
            {"layout", "row-major, x outer, t inner"},
            {"u", f.u}};
  if (f.has_trace()) {
    j["dxu"] = f.dxu;
    j["d2u"] = f.d2u;
    j["d4u"] = f.d4u;
  }
  if (f.fd_step > 0.0) j["fd_step"] = f.fd_step;
  return j;
}

[[nodiscard]] inline FieldGrid field_from_json(const json& j) {
  const std::string ctx = "field";
  FieldGrid f;
  f.x_nodes = detail::numbers(j, "x_nodes", ctx);
  f.t_nodes = detail::numbers(j, "t_nodes", ctx);
  f.u = detail::numbers(j, "u", ctx);
  const std::size_t n = f.x_nodes.size() * f.t_nodes.size();
  if (f.u.size() != n) throw ConfigError("field: key 'u' must hold one value per (x, t) node");
  if (j.contains("d2u")) {
    f.dxu = detail::numbers(j, "dxu", ctx);
    f.d2u = detail::numbers(j, "d2u", ctx);
    f.d4u = detail::numbers(j, "d4u", ctx);
    if (f.dxu.size() != n || f.d2u.size() != n || f.d4u.size() != n)
      throw ConfigError("field: derivative arrays must match key 'u' in length");
  }
  f.fd_step = detail::number_or(j, "fd_step", 0.0, ctx);
  return f;
}

[[nodiscard]] inline json to_json(const PeriodicField& p, const json& meta) {
  return {{"metadata", meta}, {"period", p.period}, {"time", p.time}, {"samples", p.samples}};
}

/// Accepts a periodic field, or a field grid that carries "x_period" in its
/// metadata, in which case the t = first-node column is used.
[[nodiscard]] inline PeriodicField periodic_from_json(const json& j) {
  const std::string ctx = "periodic field";
  PeriodicField p;
  if (j.contains("samples")) {
    p.period = detail::number(j, "period", ctx);
    p.time = detail::number_or(j, "time", 0.0, ctx);
    p.samples = detail::numbers(j, "samples", ctx);
  } else {
    const FieldGrid f = field_from_json(j);
    const json& meta = detail::field(j, "metadata", ctx);
    p.period = detail::number(meta, "x_period", ctx + ".metadata");
    p.time = f.t_nodes.front();
    for (std::size_t i = 0; i < f.nx(); ++i) p.samples.push_back(f.u[f.index(i, 0)]);
  }
  p.validate();
  return p;
}

}  // namespace dubrovin::io
