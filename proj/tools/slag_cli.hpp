// SPDX-License-Identifier: MIT
//
// The `slag` command line: verify a catalog case, solve a k-field system,
// reconstruct an immersion. Exit codes: 0 success, 1 failed check, 2 bad
// configuration. Reports carry no timings, so identical configs give
// byte-identical output.
#pragma once

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "slag/catalog/cases.hpp"
#include "slag/catalog/verify.hpp"
#include "slag/frame/integrator.hpp"
#include "slag/kfield/solver.hpp"

namespace slag::cli {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2 };

struct RunConfig {
  std::string command;
  std::string case_name, block, system;
  std::optional<int> epsilon;
  std::string grid;
  std::optional<double> step, side;
  std::string bc = "periodic";
  std::string sign = "+";
  Tolerances tol;
  double tol_solver = 1e-10;
  double tol_align = 1e-5;
  double tol_drift = 1e-6;
  double tol_compat = 1e-8;
  double tol_certify = 1e-4;
  int max_iter = 50;
  std::uint64_t seed = 0;
  double perturb = 0.0;
  std::string init = "constant";
  bool constant_only = false;
  std::string oracle;
  std::string kfields;
  std::string out;
  std::string format = "json";
};

namespace detail {

[[noreturn]] inline void bad(const std::string& what) { throw Error(ErrorCode::Configuration, what); }

inline std::string prefix_of(const std::string& out) {
  for (const char* ext : {".json", ".csv"}) {
    const std::string e(ext);
    if (out.size() > e.size() && out.compare(out.size() - e.size(), e.size(), e) == 0)
      return out.substr(0, out.size() - e.size());
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) bad("cannot write '" + path + "'");
  f << text;
  if (!f) bad("failed writing '" + path + "'");
}

// key,value rows; nested keys joined with '.', array entries by index.
inline void flatten(const nlohmann::json& j, const std::string& key, std::ostringstream& os) {
  if (j.is_object() && !j.empty()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), key.empty() ? it.key() : key + "." + it.key(), os);
  } else if (j.is_array() && !j.empty() && !std::all_of(j.begin(), j.end(), [](const auto& x) { return x.is_number(); })) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], key + "." + std::to_string(i), os);
  } else {
    std::string v = j.dump();
    if (v.find(',') != std::string::npos || v.find('"') != std::string::npos) {
      std::string q = "\"";
      for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      v = q + "\"";
    }
    os << key << ',' << v << '\n';
  }
}

inline std::string render(const nlohmann::json& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  std::ostringstream os;
  os << "key,value\n";
  flatten(report, "", os);
  return os.str();
}

// Writes the report to <prefix>.json / <prefix>.report.csv, or to `out`
// when no prefix is set.
inline void emit(const RunConfig& cfg, const nlohmann::json& report, std::ostream& out) {
  const std::string text = render(report, cfg.format);
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  const std::string path = prefix_of(cfg.out) + (cfg.format == "json" ? ".json" : ".report.csv");
  write_file(path, text);
  out << "wrote " << path << '\n';
}

inline std::pair<int, int> parse_grid(const std::string& g, int fallback) {
  if (g.empty()) return {fallback, fallback};
  int a = 0, b = 0;
  char x = 0;
  std::istringstream is(g);
  if (!(is >> a)) bad("grid must be N or NxM, got '" + g + "'");
  if (is >> x) {
    if ((x != 'x' && x != 'X') || !(is >> b)) bad("grid must be N or NxM, got '" + g + "'");
  } else {
    b = a;
  }
  std::string rest;
  if (is >> rest) bad("grid must be N or NxM, got '" + g + "'");
  if (a < 1 || b < 1) bad("grid sizes must be positive");
  return {a, b};
}

inline int parse_sign(const std::string& s) {
  if (s == "+" || s == "+1" || s == "1") return 1;
  if (s == "-" || s == "-1") return -1;
  bad("sign must be + or -, got '" + s + "'");
}

inline BuildingBlock named_block(const std::string& name) {
  if (name == "clifford") return clifford_legendrian();
  if (name == "cone") return legendrian_cone_3fold();
  if (name == "join_s7") return clifford_join_S7();
  if (name == "join_h7") return clifford_join_H7();
  if (name == "equivariant_h5") return equivariant_legendrian_H5();
  if (name == "geodesic_h5") return geodesic_legendrian_H5();
  if (name == "decoy") return decoy_block();
  if (name.rfind("holomorphic_", 0) == 0) return holomorphic_block(name.substr(12));
  bad("unknown block '" + name + "'");
}

inline const CaseId& checked_case(const RunConfig& cfg) {
  if (cfg.case_name.empty()) bad("--case is required");
  const CaseId& c = find_case(cfg.case_name);
  if (cfg.epsilon && *cfg.epsilon != c.epsilon)
    bad("case " + c.name + " has epsilon " + std::to_string(c.epsilon) + ", not " + std::to_string(*cfg.epsilon));
  return c;
}

inline SystemId checked_system(const RunConfig& cfg) {
  if (cfg.system.empty()) bad("--system is required");
  const SystemId sys = parse_system(cfg.system);
  if (cfg.epsilon && *cfg.epsilon != system_epsilon(sys))
    bad("system " + cfg.system + " has epsilon " + std::to_string(system_epsilon(sys)) + ", not " +
        std::to_string(*cfg.epsilon));
  return sys;
}

inline void fail(nlohmann::json& report, const std::string& residual, const nlohmann::json& argmax) {
  report["failing_residual"] = residual;
  report["failing_argmax"] = argmax;
}

inline nlohmann::json point_json(const Point4& p) { return nlohmann::json(p); }

}  // namespace detail

// ---- verify ------------------------------------------------------------------

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const CaseId& c = detail::checked_case(cfg);
  const BuildingBlock b = cfg.block.empty() ? default_block(c.block) : detail::named_block(cfg.block);
  const auto [grid, unused] = detail::parse_grid(cfg.grid, 5);
  (void)unused;
  const VerificationReport rep = verify_case(c, b, grid, cfg.tol);
  nlohmann::json j = rep.to_json();
  j["command"] = "verify";
  j["block"] = b.name;
  if (!rep.passed) {
    if (auto w = rep.worst_failure()) {
      detail::fail(j, *w, rep.residuals.at(*w).argmax);
    } else if (!rep.failures.empty()) {
      detail::fail(j, std::string(to_string(rep.failures.front().code)), rep.failures.front().point);
    } else {
      detail::fail(j, "r_min", rep.r_argmin);
    }
  }
  detail::emit(cfg, j, out);
  return rep.passed ? kOk : kFailed;
}

// ---- solve -------------------------------------------------------------------

inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const SystemId sys = detail::checked_system(cfg);
  const Boundary bc = parse_boundary(cfg.bc);
  const auto [nu, nv] = detail::parse_grid(cfg.grid, 32);
  if (nu < 5 || nv < 5) detail::bad("solve needs at least 5 nodes per axis");
  if (cfg.init != "constant" && cfg.init != "zero") detail::bad("--init must be constant or zero");
  if (!(cfg.perturb >= 0.0) || !std::isfinite(cfg.perturb)) detail::bad("--perturb must be a non-negative number");

  nlohmann::json j = {{"command", "solve"}, {"system", to_string(sys)}, {"epsilon", system_epsilon(sys)},
                      {"grid", {nu, nv}},   {"bc", to_string(bc)},      {"init", cfg.init},
                      {"perturb", cfg.perturb}, {"seed", cfg.seed}};

  std::array<double, 4> base{};
  if (cfg.constant_only || cfg.init == "constant") {
    try {
      base = constant_solution(sys);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonConvergence) throw;
      j["diagnostic"] = e.what();
      detail::fail(j, "constant_solution", "every node (algebraic obstruction)");
      detail::emit(cfg, j, out);
      return kFailed;
    }
    j["constant_solution"] = base;
  }

  KFields k0 = make_fields(sys, nu, nv, bc);
  const int nf = field_count(sys);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  for (int jj = 0; jj < nv; ++jj)
    for (int i = 0; i < nu; ++i)
      for (int m = 0; m < nf; ++m) {
        double x = base[static_cast<std::size_t>(m)];
        const double n = noise(rng);
        if (cfg.perturb > 0.0 && !(bc == Boundary::dirichlet && k0.on_boundary(i, jj))) x += cfg.perturb * n;
        k0.at(m, i, jj) = x;
      }

  if (cfg.constant_only) {
    const ResidualGrid g = constraint_residual(k0);
    j["residual"] = g.max_abs();
    detail::emit(cfg, j, out);
    return kOk;
  }

  NewtonOptions opt;
  opt.tol = cfg.tol_solver;
  opt.max_iter = cfg.max_iter;
  NewtonResult r;
  try {
    r = newton_iterate(k0, opt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Configuration) throw;
    const ResidualGrid g = constraint_residual(k0);
    const auto [node, eq] = g.argmax();
    j["error"] = e.what();
    j["converged"] = false;
    detail::fail(j, g.labels[eq], {node % static_cast<std::size_t>(nu), node / static_cast<std::size_t>(nu)});
    detail::emit(cfg, j, out);
    return kFailed;
  }
  const ResidualGrid g = constraint_residual(r.fields);
  const auto [node, eq] = g.argmax();
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["residual_argmax"] = {{"label", g.labels[eq]},
                          {"node", {node % static_cast<std::size_t>(nu), node / static_cast<std::size_t>(nu)}}};
  j["limit_nodes"] = r.limit_nodes.size();
  j["history"] = r.history_json();
  j["degeneracy"] = degeneracy_scan(r.fields).to_json();
  if (!cfg.out.empty()) {
    const std::string p = detail::prefix_of(cfg.out);
    detail::write_file(p + ".csv", fields_csv(r.fields));
    detail::write_file(p + ".meta.json", fields_metadata(r.fields).dump(2) + "\n");
    j["fields"] = p + ".csv";
  }
  if (!r.converged) {
    j["diagnostic"] = "no convergence after " + std::to_string(r.iterations) + " iterations";
    detail::fail(j, g.labels[eq], j["residual_argmax"]["node"]);
  }
  detail::emit(cfg, j, out);
  return r.converged ? kOk : kFailed;
}

// ---- reconstruct ----------------------------------------------------------------

namespace detail {

inline int node_count(double side, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) bad("--step must be positive");
  if (!(side > 0.0) || !std::isfinite(side)) bad("--side must be positive");
  const double q = side / step;
  if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q)) bad("--side must be a whole multiple of --step");
  return static_cast<int>(std::lround(q)) + 1;
}

inline ReconstructionGrid cube(const Point4& origin, double step, int n) {
  ReconstructionGrid g;
  g.origin = origin;
  g.step = {step, step, step, step};
  g.count = {n, n, n, n};
  return g;
}

inline Point4 far_corner(const ReconstructionGrid& g) {
  return g.point(std::array<int, 4>{g.count[0] - 1, g.count[1] - 1, g.count[2] - 1, g.count[3] - 1});
}

inline KFields load_kfields(const RunConfig& cfg, SystemId sys, int sign, nlohmann::json& j) {
  if (!std::filesystem::exists(cfg.kfields)) bad("k-field file '" + cfg.kfields + "' does not exist");
  Boundary bc = parse_boundary(cfg.bc);
  const std::string meta = prefix_of(cfg.kfields) + ".meta.json";
  if (std::filesystem::exists(meta)) {
    std::ifstream in(meta);
    nlohmann::json m;
    try {
      in >> m;
    } catch (const nlohmann::json::exception&) {
      bad("unreadable metadata '" + meta + "'");
    }
    if (m.contains("system") && m["system"] != to_string(sys))
      bad("k-fields were solved for " + m["system"].get<std::string>() + ", not " + to_string(sys));
    if (m.contains("bc")) bc = parse_boundary(m["bc"].get<std::string>());
  }
  j["kfields"] = cfg.kfields;
  j["bc"] = to_string(bc);
  (void)sign;
  return load_fields(cfg.kfields, sys, bc);
}

}  // namespace detail

inline int cmd_reconstruct(const RunConfig& cfg, std::ostream& out) {
  if (cfg.case_name.empty() == cfg.system.empty()) detail::bad("reconstruct takes exactly one of --case or --system");
  nlohmann::json j = {{"command", "reconstruct"}};
  IntegrateOptions loose;
  loose.drift_tol = std::numeric_limits<double>::infinity();

  FrameModel model;
  ReconstructionGrid grid;
  std::optional<Immersion> oracle;
  double step = 0.0;

  if (!cfg.case_name.empty()) {
    if (!cfg.oracle.empty() && cfg.oracle != "closed-form") detail::bad("--oracle must be closed-form");
    if (!cfg.kfields.empty()) detail::bad("--kfields goes with --system, not --case");
    const CaseId& c = detail::checked_case(cfg);
    const BuildingBlock b = cfg.block.empty() ? default_block(c.block) : detail::named_block(cfg.block);
    oracle = build_immersion(c, b);
    model = immersion_model(*oracle);
    step = cfg.step.value_or(1.0 / 64);
    const double side = cfg.side.value_or(0.125);
    Point4 origin{};
    for (std::size_t a = 0; a < 4; ++a) {
      const double lo = oracle->domain.lo[a], hi = oracle->domain.hi[a];
      if (side > hi - lo) detail::bad("--side exceeds the case's parameter box");
      origin[a] = 0.5 * (lo + hi - side);
    }
    grid = detail::cube(origin, step, detail::node_count(side, step));
    j["case"] = c.name;
    j["epsilon"] = c.epsilon;
    j["block"] = b.name;
    j["oracle"] = "closed-form";
  } else {
    const SystemId sys = detail::checked_system(cfg);
    const int sign = detail::parse_sign(cfg.sign);
    j["system"] = to_string(sys);
    j["epsilon"] = system_epsilon(sys);
    j["sign"] = sign;
    KSource src;
    Point4 origin{};
    const CoordinateBox box = default_box(sys);
    origin[0] = box.t0;
    origin[1] = box.s0;
    if (!cfg.kfields.empty()) {
      const KFields f = detail::load_kfields(cfg, sys, sign, j);
      src = grid_source(f, sign);
      if (f.bc == Boundary::dirichlet) origin[2] = f.hu, origin[3] = f.hv;
      step = cfg.step.value_or(2.0 * std::max(f.hu, f.hv));
    } else {
      try {
        src = constant_source(sys, constant_solution(sys), sign);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonConvergence) throw;
        j["diagnostic"] = e.what();
        detail::fail(j, "constant_solution", "every node (algebraic obstruction)");
        detail::emit(cfg, j, out);
        return kFailed;
      }
      j["kfields"] = "constant solution";
      step = cfg.step.value_or(1.0 / 16);
    }
    model = generic_model(src);
    grid = detail::cube(origin, step, detail::node_count(cfg.side.value_or(0.25), step));
  }
  j["grid"] = grid_json(grid);

  const FrameState init = standard_frame(model.ambient);
  DiscreteImmersion d;
  try {
    d = integrate_frame(model, grid, init, loose);
  } catch (const PointError& e) {
    if (e.code() == ErrorCode::Configuration) throw;
    j["error"] = e.what();
    detail::fail(j, std::string(to_string(e.code())), detail::point_json(e.point()));
    detail::emit(cfg, j, out);
    return kFailed;
  }
  j["drift"] = drift_json(d);
  bool ok = true;
  if (!(d.max_drift <= cfg.tol_drift)) {
    ok = false;
    detail::fail(j, "gram_drift", detail::point_json(d.drift_argmax));
  }

  const Point4 corner = detail::far_corner(grid);
  if (oracle) {
    const AmbientMap map = alignment(init, reference_frame(*oracle, grid.origin), model.ambient.epsilon);
    const AlignmentError err = alignment_error(d, *oracle, map);
    j["alignment_error"] = {{"max", err.max}, {"argmax", err.argmax}, {"tolerance", cfg.tol_align}};
    // Endpoint error along the t, s, u, v path at h and h/2.
    const FrameState ref0 = reference_frame(*oracle, grid.origin);
    ReconstructionGrid fine = grid;
    for (std::size_t a = 0; a < 4; ++a) {
      fine.step[a] *= 0.5;
      fine.count[a] = 2 * (grid.count[a] - 1) + 1;
    }
    const CVector exact = oracle->value(corner);
    const double e1 = euclidean_norm(integrate_path(model, grid, ref0, {0, 1, 2, 3}, loose).F() - exact);
    const double e2 = euclidean_norm(integrate_path(model, fine, ref0, {0, 1, 2, 3}, loose).F() - exact);
    j["endpoint_error"] = {{"h", e1}, {"h/2", e2}};
    j["observed_order"] = e2 > 0.0 && e1 > 0.0 ? nlohmann::json(std::log2(e1 / e2)) : nlohmann::json(nullptr);
    if (ok && !(err.max <= cfg.tol_align)) {
      ok = false;
      detail::fail(j, "alignment_error", detail::point_json(err.argmax));
    }
  }

  // Path independence at h and, when the node count allows, at 2h.
  const double c1 = compatibility_check(model, grid);
  nlohmann::json compat = {{"h", c1}, {"tolerance", cfg.tol_compat}, {"at", detail::point_json(corner)}};
  std::optional<double> c2;
  if ((grid.count[0] - 1) % 2 == 0 && grid.count[0] > 1) {
    ReconstructionGrid coarse = grid;
    for (std::size_t a = 0; a < 4; ++a) {
      coarse.step[a] *= 2.0;
      coarse.count[a] = (grid.count[a] - 1) / 2 + 1;
    }
    c2 = compatibility_check(model, coarse);
    compat["2h"] = *c2;
    compat["observed_order"] = *c2 > 0.0 && c1 > 0.0 ? nlohmann::json(std::log2(*c2 / c1)) : nlohmann::json(nullptr);
  }
  // A plateau: above tolerance and not even first-order convergent.
  const bool plateau = c1 > cfg.tol_compat && (!c2 || *c2 < 2.0 * c1);
  compat["plateau"] = plateau;
  j["compatibility"] = compat;
  if (ok && plateau) {
    ok = false;
    detail::fail(j, "compatibility", detail::point_json(corner));
  }

  const VerificationReport cert = certify_reconstruction(d, reconstruction_tolerances(cfg.tol_certify));
  j["certification"] = cert.to_json();

  if (!cfg.out.empty()) {
    const std::string p = detail::prefix_of(cfg.out);
    detail::write_file(p + ".csv", immersion_csv(d));
    j["immersion"] = p + ".csv";
  }
  j["passed"] = ok;
  detail::emit(cfg, j, out);
  return ok ? kOk : kFailed;
}

// ---- entry point -----------------------------------------------------------------

namespace detail {

inline void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--epsilon", cfg.epsilon, "Curvature sign the case or system must have")
      ->check(CLI::IsMember({-1, 0, 1}));
  sub->add_option("--out", cfg.out, "Output path prefix (report goes to stdout when omitted)");
  sub->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace detail

/// Runs one command; never throws.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Special Lagrangian submanifolds with SO(2)⋊S₃ symmetry: catalog checks, k-field solver, moving-frame reconstruction"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "Run the geometry checks on a catalog case");
  verify->add_option("--case", cfg.case_name, "Catalog case, e.g. cp1")->required();
  verify->add_option("--block", cfg.block, "Building block (default: the case's own)");
  verify->add_option("--grid", cfg.grid, "Sample points per axis (default 5)");
  verify->add_option("--tol-kahler", cfg.tol.kahler);
  verify->add_option("--tol-minimality", cfg.tol.minimality);
  verify->add_option("--tol-symmetry", cfg.tol.symmetry);
  verify->add_option("--tol-shape", cfg.tol.shape);
  verify->add_option("--tol-horizontality", cfg.tol.horizontality);
  verify->add_option("--tol-lift", cfg.tol.lift_norm);
  verify->add_option("--tol-gauss-lift", cfg.tol.gauss_lift);
  detail::add_common(verify, cfg);

  auto* solve = app.add_subcommand("solve", "Solve a k-field constraint system by Newton's method");
  solve->add_option("--system", cfg.system, "constraa, constrab, cpk1, cpk2, kh, kh2 or kh3")->required();
  solve->add_option("--grid", cfg.grid, "Nodes per axis, N or NxM (default 32)");
  solve->add_option("--bc", cfg.bc, "periodic or dirichlet");
  solve->add_option("--init", cfg.init, "Initial guess: constant or zero");
  solve->add_option("--perturb", cfg.perturb, "Amplitude of uniform noise added to the initial guess");
  solve->add_option("--seed", cfg.seed, "Seed for the perturbation");
  solve->add_flag("--constant-only", cfg.constant_only, "Only look for a constant solution");
  solve->add_option("--tol-solver", cfg.tol_solver);
  solve->add_option("--max-iter", cfg.max_iter);
  detail::add_common(solve, cfg);

  auto* rec = app.add_subcommand("reconstruct", "Integrate the moving frame and check the result");
  rec->add_option("--case", cfg.case_name, "Catalog case, reconstructed from its exact frame data");
  rec->add_option("--block", cfg.block);
  rec->add_option("--oracle", cfg.oracle, "closed-form");
  rec->add_option("--system", cfg.system, "Generic-branch system");
  rec->add_option("--kfields", cfg.kfields, "k-field CSV written by solve (default: constant solution)");
  rec->add_option("--bc", cfg.bc, "Boundary condition of the k-field file when it has no metadata");
  rec->add_option("--sign", cfg.sign, "Branch sign of the z-singular systems: + or -");
  rec->add_option("--step", cfg.step, "Integration step on every axis");
  rec->add_option("--side", cfg.side, "Side of the reconstruction cube");
  rec->add_option("--tol-align", cfg.tol_align);
  rec->add_option("--tol-drift", cfg.tol_drift);
  rec->add_option("--tol-compat", cfg.tol_compat);
  rec->add_option("--tol-certify", cfg.tol_certify);
  detail::add_common(rec, cfg);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*verify) return cmd_verify(cfg, out);
    if (*solve) return cmd_solve(cfg, out);
    return cmd_reconstruct(cfg, out);
  } catch (const Error& e) {
    err << "slag: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::Configuration:
      case ErrorCode::DimensionMismatch:
      case ErrorCode::DomainViolation:
      case ErrorCode::BranchViolation:
      case ErrorCode::BlockMismatch:
      case ErrorCode::InsufficientStencil:
        return kConfig;
      default:
        return kFailed;
    }
  } catch (const std::exception& e) {
    err << "slag: " << e.what() << '\n';
    return kFailed;
  }
}

}  // namespace slag::cli
