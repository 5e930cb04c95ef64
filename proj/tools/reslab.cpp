#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "reslab/cli.hpp"
#include "reslab/error.hpp"

using namespace reslab;

namespace {

struct OutOpts {
  std::string out;
  std::string format;  // csv | json; empty: from --out extension
};

void add_out(CLI::App* cmd, OutOpts& o) {
  cmd->add_option("--out", o.out, "Output file (stdout when omitted)");
  cmd->add_option("--format", o.format, "csv or json (default: from --out extension, else csv)")
      ->check(CLI::IsMember({"csv", "json"}));
}

void emit(const OutputTable& t, const OutOpts& o) {
  OutputFormat f = o.format.empty() ? format_for_path(o.out) : (o.format == "json" ? OutputFormat::Json : OutputFormat::Csv);
  auto write = [&](std::ostream& os) { f == OutputFormat::Json ? write_json(t, os) : write_csv(t, os); };
  if (o.out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream os(o.out, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + o.out + "'");
  write(os);
}

void emit_text(const std::string& s, const std::string& path) {
  if (path.empty()) {
    std::cout << s;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path + "'");
  os << s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonance counting toolkit for hyperbolic manifolds with cusps"};
  app.require_subcommand(1);

  std::string config;
  OutOpts out;

  auto* modes = app.add_subcommand("modes", "Enumerate cusp modes with m <= m_max and b <= b_max");
  int m_max = 4;
  double b_max = 2.0;
  modes->add_option("--config", config, "Config file")->required();
  modes->add_option("--m-max", m_max, "Largest spherical-harmonic degree");
  modes->add_option("--b-max", b_max, "Largest b");
  add_out(modes, out);

  auto* lambda = app.add_subcommand("lambda", "Growth function Lambda(u) per cusp and Lambda_X");
  std::vector<double> u_grid;
  lambda->add_option("--config", config, "Config file")->required();
  lambda->add_option("--u-grid", u_grid, "Positive u values")->required()->delimiter(',');
  add_out(lambda, out);

  auto* res = app.add_subcommand("resonances", "Resonances of H^{n+1}, or the cusp pole lattice of a config");
  int n = 0;
  double R = 0.0, c_bound = 1.0;
  auto* n_opt = res->add_option("--n", n, "Dimension parameter n (model space H^{n+1})");
  auto* cfg_opt = res->add_option("--config", config, "Config file (cusp lattice mode)");
  n_opt->excludes(cfg_opt);
  res->add_option("--R", R, "Radius about n/2")->required();
  res->add_option("--c-bound", c_bound, "Multiplicity constant for the cusp lattice");
  add_out(res, out);

  auto* bound = app.add_subcommand("bound", "Counting-function upper bounds on an R grid");
  std::vector<double> R_grid;
  double C = 1.0;
  bool dioph = false;
  bound->add_option("--config", config, "Config file")->required();
  bound->add_option("--R-grid", R_grid, "R values > 1")->required()->delimiter(',');
  bound->add_option("--C", C, "Constant in front of the bound");
  bound->add_flag("--diophantine", dioph, "Also emit the Diophantine-form bound");
  add_out(bound, out);

  auto* verify = app.add_subcommand("verify", "Run verification suites; exit 1 on any failure");
  VerifyOptions vopt;
  std::string fault;
  verify->add_option("--suite", vopt.suite, "beta|bessel|fkernel|resolvent|coefficients|all")
      ->check(CLI::IsMember({"beta", "bessel", "fkernel", "resolvent", "coefficients", "all"}));
  verify->add_option("--grid-scale", vopt.grid_scale, "Scale factor on grid densities");
  verify->add_option("--seed", vopt.seed, "Seed for random cases");
  verify->add_option("--out", out.out, "JSON report file (stdout when omitted)");
  verify->add_option("--inject-fault", fault, "Test hook: corrupt an implementation (bessel)")
      ->check(CLI::IsMember({"bessel"}))
      ->group("");

  auto* worst = app.add_subcommand("worstcase", "Liouville-type worst-case angle table");
  WorstCaseSpec wspec;
  worst->add_option("--q", wspec.q, "Exponent q");
  worst->add_option("--depth", wspec.depth, "Number of partial quotients");
  worst->add_option("--ell", wspec.ell, "Translation length");
  worst->add_option("--precision-bits", wspec.precision_bits, "Working precision");
  add_out(worst, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*modes) emit(cmd_modes(load_config(config), m_max, b_max), out);
    if (*lambda) emit(cmd_lambda(load_config(config), u_grid), out);
    if (*res) {
      if (!config.empty()) emit(cmd_resonances(load_config(config), R, c_bound), out);
      else if (*n_opt) emit(cmd_resonances(n, R), out);
      else throw ConfigError("resonances needs --n or --config");
    }
    if (*bound) emit(cmd_bound(load_config(config), R_grid, C, dioph), out);
    if (*worst) emit(cmd_worstcase(wspec), out);
    if (*verify) {
      vopt.inject_bessel_fault = fault == "bessel";
      VerifyOutcome v = cmd_verify(vopt);
      emit_text(v.json, out.out);
      std::cerr << v.text << (v.pass ? "verify: pass\n" : "verify: FAIL\n");
      return v.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
