#include "fermi1d/cli.hpp"

#include <fstream>
#include <ostream>

#include "CLI11.hpp"

#include "fermi1d/kohn_sham.hpp"
#include "fermi1d/many_body.hpp"
#include "fermi1d/representability.hpp"
#include "fermi1d/scenarios.hpp"

namespace fermi1d {

namespace {

Json header(const char* command, const RunConfig& cfg, const std::vector<std::string>& warnings) {
  return Json{{"command", command},
              {"parameters", {{"n", cfg.n}, {"K", cfg.K}, {"N", cfg.N}, {"bc", to_string(cfg.bc)}, {"seed", cfg.seed}}},
              {"warnings", warnings}};
}

Json complex_array(const ComplexGridFunction& f) {
  Json re = Json::array(), im = Json::array();
  for (int i = 0; i < f.size(); ++i) {
    re.push_back(f[i].real());
    im.push_back(f[i].imag());
  }
  return Json{{"re", re}, {"im", im}};
}

}  // namespace

CommandResult cmd_solve(const RunConfig& cfg) {
  const Grid g = make_grid(cfg);
  const auto v = make_potential(cfg, g);
  const auto w = make_interaction(cfg, g);
  const auto basis = make_basis(cfg, g);
  const auto p = assemble_HN(v, w, basis, cfg.N);
  const auto gs = ground_state(p);
  const auto rho = density(gs.psi);
  // A single particle has no pair density; its diagonal is reported as zero.
  const GridFunction diag =
      cfg.N > 1 ? GridFunction(g, pair_density(gs.psi).values.diagonal()) : GridFunction::constant(g, 0.0);

  CommandResult r;
  r.output = header("solve", cfg, {});
  r.output["result"] = Json{{"energy", gs.energy},
                            {"gap", gs.gap},
                            {"dimension", p.dimension()},
                            {"density", to_json(rho.rho())},
                            {"pair_density_diagonal", to_json(diag)}};
  r.csv = nodal_table(g, {{"density", &rho.rho()}, {"pair_density_diagonal", &diag}});
  return r;
}

CommandResult cmd_invert(const RunConfig& cfg) {
  const auto warnings = check_parity(cfg);
  const Grid g = make_grid(cfg);
  const auto w = make_interaction(cfg, g);
  InversionProblem p{make_density(cfg, g), w, cfg.bc, w.is_zero() ? nullptr : make_basis(cfg, g)};
  p.grad_tol = cfg.tol.grad_tol;
  p.max_iters = cfg.tol.max_iters;
  p.allow_parity_violation = cfg.allow_parity_violation;
  const auto res = invert(p);

  CommandResult r;
  r.exit_code = res.converged ? kExitOk : kExitNumerical;
  r.output = header("invert", cfg, warnings);
  r.output["result"] = to_json(res);
  r.csv = residual_table(res);
  return r;
}

CommandResult cmd_fll(const RunConfig& cfg) {
  const auto warnings = check_parity(cfg);
  const Grid g = make_grid(cfg);
  const auto w = make_interaction(cfg, g);
  FunctionalOptions fo;
  fo.basis = w.is_zero() ? nullptr : make_basis(cfg, g);
  fo.grad_tol = cfg.tol.inner_tol;
  fo.max_iters = cfg.tol.max_iters;
  fo.allow_parity_violation = cfg.allow_parity_violation;
  CommandResult r;
  r.output = header("fll", cfg, warnings);
  try {
    const auto fv = e_xc(make_density(cfg, g), w, cfg.bc, fo);
    r.output["result"] = to_json(fv);
    const GridFunction& v_int = fv.interacting.v.regular();
    const GridFunction& v_ks = fv.non_interacting.v.regular();
    r.csv = nodal_table(g, {{"v_int", &v_int}, {"v_ks", &v_ks}, {"v_h", &fv.v_h}, {"v_xc", &fv.v_xc}});
  } catch (const NumericalError& e) {
    r.exit_code = kExitNumerical;
    r.output["error"] = e.what();
  }
  return r;
}

CommandResult cmd_ks_scf(const RunConfig& cfg) {
  const auto warnings = check_parity(cfg);
  const Grid g = make_grid(cfg);
  const auto v = make_potential(cfg, g);
  const auto w = make_interaction(cfg, g);
  KSOptions ko;
  ko.basis = w.is_zero() ? nullptr : make_basis(cfg, g);
  ko.mixing = cfg.tol.mixing;
  ko.max_iters = cfg.tol.scf_max_iters;
  ko.tol = cfg.tol.scf_tol;
  ko.inner_tol = cfg.tol.inner_tol;
  ko.allow_parity_violation = cfg.allow_parity_violation;
  CommandResult r;
  r.output = header("ks-scf", cfg, warnings);
  try {
    const auto res = ks_scf(v, w, cfg.bc, cfg.N, ko);
    r.exit_code = res.converged ? kExitOk : kExitNumerical;
    r.output["result"] = to_json(res);
    r.csv = trace_table(res);
  } catch (const ScfError& e) {
    r.exit_code = kExitNumerical;
    r.output["error"] = e.what();
    r.output["failed_iteration"] = e.iteration();
    r.output["failed_density"] = to_json(e.density());
  }
  return r;
}

CommandResult cmd_verify(const std::string& scenario, const RunConfig& cfg) {
  ScenarioOptions so;
  so.seed = cfg.seed;
  const auto rep = run_scenario(scenario, so);
  CommandResult r;
  r.exit_code = rep.pass() ? kExitOk : kExitNumerical;
  r.output = Json{{"command", "verify"}, {"parameters", {{"seed", cfg.seed}}}, {"result", to_json(rep)}};
  return r;
}

CommandResult cmd_density_to_slater(const RunConfig& cfg) {
  const Grid g = make_grid(cfg);
  const Density rho = make_density(cfg, g);
  const auto rep = classify_density(rho, cfg.bc);
  CommandResult r;
  r.output = header("density-to-slater", cfg, {});
  if (!rep.in_RN) throw cfg.error("density", "density is not in R_N for " + std::string(to_string(cfg.bc)) + " conditions");
  const auto s = slater_from_density(rho, cfg.bc);
  const auto kb = kinetic_bound_check(rho, cfg.bc);
  Json orbitals = Json::array();
  for (const auto& o : s.orbitals) orbitals.push_back(complex_array(o));
  const int N = cfg.N;
  r.output["result"] = Json{
      {"classification", to_json(rep)},
      {"thetas", s.thetas},
      {"gram_deviation", (s.gram - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff()},
      {"density_deviation", (s.density - rho.rho()).values().cwiseAbs().maxCoeff()},
      {"kinetic", s.kinetic},
      {"kinetic_formula", s.kinetic_formula},
      {"kinetic_bound", {{"t_slater", kb.t_slater}, {"bound_rhs", kb.bound_rhs}, {"ratio", kb.ratio()}}},
      {"density", to_json(s.density)},
      {"orbitals", orbitals}};
  r.csv = nodal_table(g, {{"rho", &rho.rho()}, {"slater_density", &s.density}});
  return r;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact one-dimensional density functional lab"};
  app.require_subcommand(1);
  std::string config_path, out_path, csv_path, scenario;

  struct Sub {
    const char* name;
    const char* help;
  };
  const std::vector<Sub> subs{
      {"solve", "interacting ground state: energy, gap, density, pair density diagonal"},
      {"invert", "potential whose ground density is the configured density"},
      {"fll", "F_LL, T_KS, E_H, E_xc and the potentials of the configured density"},
      {"ks-scf", "exact-xc Kohn-Sham self-consistent field"},
      {"verify", "run a named verification scenario"},
      {"density-to-slater", "Slater determinant with the configured density"},
  };
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    auto* c = sc->add_option("--config", config_path, "JSON configuration");
    if (std::string(s.name) != "verify") c->required();
    sc->add_option("--out", out_path, "JSON output path (default: stdout)");
    sc->add_option("--csv", csv_path, "CSV output path (overrides output.csv)");
    if (std::string(s.name) == "verify") {
      std::string names;
      for (const auto& n : scenario_names()) names += " " + n;
      sc->add_option("scenario", scenario, "one of:" + names)->required();
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  CommandResult res;
  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (command == "solve") res = cmd_solve(cfg);
    else if (command == "invert") res = cmd_invert(cfg);
    else if (command == "fll") res = cmd_fll(cfg);
    else if (command == "ks-scf") res = cmd_ks_scf(cfg);
    else if (command == "verify") res = cmd_verify(scenario, cfg);
    else res = cmd_density_to_slater(cfg);

    const std::string csv = csv_path.empty() ? cfg.csv : csv_path;
    if (!csv.empty() && !res.csv.header.empty()) write_csv(csv, res.csv);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }

  for (const auto& w : res.output.value("warnings", Json::array())) err << "warning: " << w.get<std::string>() << "\n";
  const std::string text = res.output.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(out_path);
    if (!f) {
      err << "error: cannot open '" << out_path << "' for writing\n";
      return kExitInvalid;
    }
    f << text;
  }
  if (res.exit_code == kExitNumerical) {
    err << (command == "verify" ? "verification failed" : "did not converge") << "\n";
  }
  return res.exit_code;
}

}  // namespace fermi1d
