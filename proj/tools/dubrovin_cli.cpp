#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dubrovin.hpp"
#include "dubrovin/acceptance.hpp"
#include "dubrovin/io.hpp"

namespace {

using dubrovin::io::json;
namespace io = dubrovin::io;
namespace dv = dubrovin;

constexpr int kExitAcceptance = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

json craig_json(const dv::CraigReport& r) {
  return {{"sum_gamma", r.sum_gamma},
          {"sup_gamma_c", r.sup_gamma_c},
          {"sup_sqrt_gamma_c_over_eta0", r.sup_sqrt_gamma_c_over_eta0},
          {"sup_cross_sum", r.sup_cross_sum},
          {"sum_sqrt_gamma", r.sum_sqrt_gamma},
          {"sup_weighted_c", r.sup_weighted_c},
          {"sup_cross_half", r.sup_cross_half},
          {"sup_cross_one", r.sup_cross_one},
          {"trace_sum", r.trace_sum},
          {"threshold", std::isinf(r.threshold) ? json("inf") : json(r.threshold)},
          {"craig1_ok", r.craig1_ok},
          {"craig2_ok", r.craig2_ok},
          {"trace_ok", r.trace_ok}};
}

json qp_json(const dv::QPReport& r) {
  json labels = json::array();
  for (const auto& l : r.labels)
    labels.push_back({{"m", l.m}, {"gamma", l.gamma}, {"eta0", l.eta0}, {"c_m", l.c_m}, {"r_m", l.r_m}});
  json j = {{"gamma_ok", r.gamma_ok}, {"eta_mn_ok", r.eta_mn_ok}, {"eta_m0_ok", r.eta_m0_ok},
            {"r_m_ok", r.r_m_ok},     {"c_m_ok", r.c_m_ok},       {"ok", r.ok()},
            {"labels", labels}};
  if (r.first_violation) j["first_violation"] = *r.first_violation;
  return j;
}

std::vector<std::size_t> parse_n_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw dv::ConfigError("--N: '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw dv::ConfigError("--N: empty list");
  return out;
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Max |d2u - FD2(u)| over the t = first-node column, with the stencil
/// spanning `stride` node intervals.
double fd_closure(const dv::FieldGrid& f, std::size_t stride) {
  double worst = 0.0;
  const double h = (f.x_nodes[1] - f.x_nodes[0]) * static_cast<double>(stride);
  for (std::size_t i = stride; i + stride < f.nx(); ++i) {
    const double fd =
        (f.u[f.index(i + stride, 0)] - 2.0 * f.u[f.index(i, 0)] + f.u[f.index(i - stride, 0)]) / (h * h);
    worst = std::max(worst, std::abs(f.d2u[f.index(i, 0)] - fd));
  }
  return worst;
}

int run(int argc, char** argv) {
  CLI::App app{"Finite-gap KdV solutions from Dubrovin flows on the isospectral torus"};
  app.require_subcommand(1);
  std::string out = "-";
  double tol = 1e-10;
  std::uint64_t seed = 20240601;

  // gapset check
  auto* gapset = app.add_subcommand("gapset", "Gap-set diagnostics");
  gapset->require_subcommand(1);
  auto* check = gapset->add_subcommand("check", "Craig, trace and Carleson conditions of a gap set");
  std::string gapset_file;
  std::optional<double> tau;
  bool qp = false;
  double threshold = std::numeric_limits<double>::infinity();
  std::size_t carleson_samples = 256;
  check->add_option("file", gapset_file, "gap-set or config JSON")->required();
  check->add_option("--tau", tau, "Carleson homogeneity constant to test");
  check->add_option("--carleson-samples", carleson_samples, "sampled centers in the spectrum");
  check->add_flag("--qp", qp, "also run the quasi-periodic family checks");
  check->add_option("--threshold", threshold, "finiteness threshold for the summed conditions");
  check->add_option("--out", out, "output JSON (default stdout)");

  // flow
  auto* flow = app.add_subcommand("flow", "Integrate the x and t flows on a lattice");
  std::string config_file;
  double x0 = 0.0, x1 = 1.0, t0 = 0.0, t1 = 0.0;
  std::size_t nx = 11, nt = 1;
  bool with_period = false;
  flow->add_option("--config", config_file, "config JSON")->required();
  flow->add_option("--x0", x0);
  flow->add_option("--x1", x1);
  flow->add_option("--t0", t0);
  flow->add_option("--t1", t1);
  flow->add_option("--nx", nx)->check(CLI::PositiveNumber);
  flow->add_option("--nt", nt)->check(CLI::PositiveNumber);
  flow->add_option("--tol", tol)->check(CLI::PositiveNumber);
  flow->add_option("--out", out, "output grid JSON (default stdout)");
  flow->add_flag("--period", with_period, "record the x-period of a one-gap set and sample [0, period)");

  // reconstruct
  auto* reconstruct = app.add_subcommand("reconstruct", "Potential and trace derivatives from a grid");
  std::string grid_file;
  std::optional<double> fd_step;
  reconstruct->add_option("--grid", grid_file, "grid JSON")->required();
  reconstruct->add_option("--fd-step", fd_step, "x-step of the second-difference closure check");
  reconstruct->add_option("--out", out, "output field JSON (default stdout)");

  // abel
  auto* abel = app.add_subcommand("abel", "Abel map along a grid and its linear fit");
  std::size_t quad_order = 64;
  abel->add_option("--config", config_file, "config JSON")->required();
  abel->add_option("--grid", grid_file, "grid JSON")->required();
  abel->add_option("--order", quad_order, "Gauss-Legendre order")->check(CLI::PositiveNumber);
  abel->add_option("--out", out, "output JSON (default stdout)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Pseudo-spectral KdV evolution of a periodic field");
  std::string init_file;
  double big_t = 0.1, dt = 1e-4;
  oracle->add_option("--init", init_file, "periodic field, or field JSON with metadata.x_period")->required();
  oracle->add_option("--T", big_t, "final time")->check(CLI::NonNegativeNumber);
  oracle->add_option("--dt", dt, "time step")->check(CLI::PositiveNumber);
  oracle->add_option("--out", out, "output JSON (default stdout)");

  // residual
  auto* resid = app.add_subcommand("residual", "KdV residual of a field grid");
  std::string field_file;
  int order = 4;
  resid->add_option("--field", field_file, "field JSON")->required();
  resid->add_option("--order", order, "stencil order (2 or 4)")->check(CLI::IsMember({2, 4}));
  resid->add_option("--out", out, "output JSON (default stdout)");

  // approx sweep
  auto* approx = app.add_subcommand("approx", "Finite-gap approximants");
  approx->require_subcommand(1);
  auto* sweep = approx->add_subcommand("sweep", "Divergence of truncations from the full model");
  std::string n_list = "2,3,4,5,6";
  std::size_t full_n = 0;
  dv::Window window;
  sweep->add_option("--config", config_file, "config JSON")->required();
  sweep->add_option("--N", n_list, "comma-separated ascending gap counts");
  sweep->add_option("--full", full_n, "gap count of the reference model (default: all)");
  sweep->add_option("--x0", window.x_lo);
  sweep->add_option("--x1", window.x_hi);
  sweep->add_option("--t0", window.t_lo);
  sweep->add_option("--t1", window.t_hi);
  sweep->add_option("--nx", window.nx)->check(CLI::PositiveNumber);
  sweep->add_option("--nt", window.nt)->check(CLI::PositiveNumber);
  sweep->add_option("--tol", tol)->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "output CSV (default stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  bool quick = false;
  std::string g1_file, g2_file;
  verify->add_flag("--quick", quick, "fast subset only");
  verify->add_option("--g1", g1_file, "one-gap config (default: built in)");
  verify->add_option("--g2", g2_file, "two-gap config (default: built in)");
  verify->add_option("--seed", seed, "seed of the random sample points");
  verify->add_option("--out", out, "also write the results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }

  if (check->parsed()) {
    const json j = io::load_file(gapset_file);
    json report;
    io::RunConfig rc;
    if (qp && !j.contains("family")) {
      rc.qp = io::qp_family_from_json(j);
      rc.qp_constants = io::qp_constants_from_json(j, "qp");
      rc.gapset = std::make_shared<const dv::GapSet>(rc.qp->to_gapset());
    } else {
      rc = io::config_from_json(j);
    }
    report["metadata"] = io::metadata("gapset check", j, 0.0);
    report["gapset"] = io::to_json(*rc.gapset);
    report["craig"] = craig_json(dv::craig_check(*rc.gapset, threshold));
    if (tau) {
      const auto c = dv::carleson_check(*rc.gapset, *tau, carleson_samples);
      report["carleson"] = {{"ok", c.ok},         {"tau", c.tau},           {"worst_ratio", c.worst_ratio},
                            {"worst_x0", c.worst_x0}, {"worst_eps", c.worst_eps}, {"centers", c.centers},
                            {"levels", c.levels},  {"e_max", c.e_max}};
    }
    if (qp) {
      if (!rc.qp) throw dv::ConfigError("--qp: file does not describe a quasi-periodic family");
      report["qp"] = qp_json(dv::qp_family_check(*rc.qp, rc.qp_constants));
    }
    io::write_json(out, report);
    return 0;
  }

  if (flow->parsed()) {
    const io::RunConfig rc = io::load_config(config_file);
    std::optional<double> period;
    std::vector<double> xs;
    if (with_period) {
      if (rc.gapset->size() != 1) throw dv::ConfigError("--period: needs a one-gap config");
      period = dv::x_period(*rc.gapset);
      for (std::size_t i = 0; i < nx; ++i) xs.push_back(*period * static_cast<double>(i) / static_cast<double>(nx));
    } else {
      xs = dv::linspace(x0, x1, nx);
    }
    const dv::TrajectoryGrid g = dv::grid(dv::DirichletAngles(rc.gapset, rc.phi0), xs, dv::linspace(t0, t1, nt), tol);
    io::write_json(out, io::to_json(g, io::metadata("flow", rc.source, tol), period));
    return 0;
  }

  if (reconstruct->parsed()) {
    const json j = io::load_file(grid_file);
    const dv::TrajectoryGrid g = io::grid_from_json(j);
    dv::FieldGrid f = dv::trace_derivatives(g);
    json meta = j.contains("metadata") ? j.at("metadata") : io::metadata("reconstruct", j, g.tol);
    meta["command"] = "reconstruct";
    if (j.contains("x_period")) meta["x_period"] = j.at("x_period");
    json doc = io::to_json(f, meta);
    if (fd_step) {
      if (f.nx() < 3) throw dv::ConfigError("--fd-step: grid needs >= 3 x nodes");
      const double dx = f.x_nodes[1] - f.x_nodes[0];
      const double ratio = *fd_step / dx;
      const auto stride = static_cast<std::size_t>(std::llround(ratio));
      if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio || 2 * stride >= f.nx())
        throw dv::ConfigError("--fd-step: must be a multiple of the x spacing that fits the grid");
      doc["fd_step"] = *fd_step;
      doc["fd_closure_d2"] = fd_closure(f, stride);
    }
    io::write_json(out, doc);
    return 0;
  }

  if (abel->parsed()) {
    const io::RunConfig rc = io::load_config(config_file);
    const json j = io::load_file(grid_file);
    const dv::TrajectoryGrid g = io::grid_from_json(j);
    if (!(*g.gapset == *rc.gapset)) throw dv::ConfigError("abel: grid was computed for a different gap set");
    const dv::HarmonicBasis basis(rc.gapset, quad_order);
    const dv::LinearFit fit = dv::linearization_fit(basis, g);
    json abel_pts = json::array();
    for (const auto& p : g.points) abel_pts.push_back(dv::abel_lifted(basis, p));
    io::write_json(out, {{"metadata", io::metadata("abel", rc.source, g.tol)},
                         {"basis", {{"condition", basis.condition()}, {"residual", basis.residual()}, {"order", quad_order}}},
                         {"offset", fit.offset},
                         {"delta", fit.delta},
                         {"zeta", fit.zeta},
                         {"max_residual", fit.max_residual},
                         {"x_nodes", g.x_nodes},
                         {"t_nodes", g.t_nodes},
                         {"abel_lifted", abel_pts}});
    return 0;
  }

  if (oracle->parsed()) {
    const json j = io::load_file(init_file);
    const dv::PeriodicField init = io::periodic_from_json(j);
    const double steps = big_t / dt;
    const auto n_steps = static_cast<std::size_t>(std::llround(steps));
    if (std::abs(steps - static_cast<double>(n_steps)) > 1e-9 * std::max(1.0, steps))
      throw dv::ConfigError("--T must be a whole multiple of --dt");
    const dv::PeriodicField end = dv::kdv_step(init, dt, n_steps);
    const auto c0 = dv::conserved(init);
    const auto c1 = dv::conserved(end);
    json meta = io::metadata("oracle", j, 0.0);
    meta["dt"] = dt;
    meta["steps"] = n_steps;
    json doc = io::to_json(end, meta);
    doc["conserved_initial"] = {{"mass", c0.mass}, {"momentum", c0.momentum}, {"energy", c0.energy}};
    doc["conserved_final"] = {{"mass", c1.mass}, {"momentum", c1.momentum}, {"energy", c1.energy}};
    io::write_json(out, doc);
    return 0;
  }

  if (resid->parsed()) {
    const json j = io::load_file(field_file);
    const auto r = dv::residual(io::field_from_json(j), order);
    io::write_json(out, {{"metadata", io::metadata("residual", j, 0.0)},
                         {"max_residual", r.max_residual},
                         {"x_at", r.x_at},
                         {"t_at", r.t_at},
                         {"u_sup", r.u_sup},
                         {"relative", r.max_residual / std::max(1.0, r.u_sup)},
                         {"max_ut", r.max_ut},
                         {"max_nonlinear", r.max_nonlinear},
                         {"max_dispersive", r.max_dispersive},
                         {"interior_nodes", r.interior},
                         {"order", r.order},
                         {"used_trace", r.used_trace}});
    return 0;
  }

  if (sweep->parsed()) {
    const io::RunConfig rc = io::load_config(config_file);
    const auto table = dv::approximant_sweep(rc.gapset, parse_n_list(n_list), rc.phi0, window, tol, full_n);
    std::string csv = "# tool=dubrovin version=" + std::string(io::kVersion) +
                      " command=approx-sweep config_hash=" + io::config_hash(rc.source) + " tol=" + csv_number(tol) +
                      " full_n=" + std::to_string(table.full_n) + " L_psi=" + csv_number(table.L_psi) +
                      " L_xi=" + csv_number(table.L_xi) + " m=" + csv_number(table.m) + " m_x=" + csv_number(table.m_x) +
                      "\nN,D_N,K_N,log_bound_corner,bound_ok,C_psi,stability_worst_ratio,stability_ok\n";
    for (const auto& r : table.rows)
      csv += std::to_string(r.n) + "," + csv_number(r.d_n) + "," + csv_number(r.k_n) + "," +
             csv_number(r.log_bound_corner) + "," + (r.bound_ok ? "1" : "0") + "," + csv_number(r.c_psi) + "," +
             csv_number(r.stability_worst_ratio) + "," + (r.stability_ok ? "1" : "0") + "\n";
    csv += "# strictly_decreasing=" + std::string(table.strictly_decreasing ? "1" : "0");
    io::write_file(out, csv);
    return 0;
  }

  if (verify->parsed()) {
    dv::acceptance::Inputs in;
    in.seed = seed;
    if (!g1_file.empty()) in.g1 = io::load_config(g1_file).gapset;
    if (!g2_file.empty()) in.g2 = io::load_config(g2_file).gapset;
    bool all = true;
    json results = json::array();
    for (const auto& c : dv::acceptance::criteria()) {
      if (quick && !c.quick) continue;
      const auto r = dv::acceptance::run(c, in);
      std::cout << dv::acceptance::format_line(r) << std::endl;
      all = all && r.passed;
      results.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"budget_s", r.budget}});
    }
    std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
    if (out != "-") io::write_json(out, {{"metadata", {{"tool", "dubrovin"}, {"version", io::kVersion}, {"command", "verify"}, {"seed", seed}, {"quick", quick}}}, {"results", results}});
    return all ? 0 : kExitAcceptance;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const dv::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dv::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
