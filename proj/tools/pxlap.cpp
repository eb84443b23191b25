// Batch front end for the p(x)-Laplace solver and verifier toolkit.
// Config-driven commands read a sectioned key = value file and write
// CSV artifacts plus a JSON manifest; see the shipped configs/ for one
// canonical example per command.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pxlap/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pxlap: variable-exponent p(x)-Laplace solver and verifier"};
  app.require_subcommand(1);

  std::string config_path;
  std::string manifest_path;
  std::string out_override;
  std::string eps_override;
  const auto add_config_command = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--out", out_override, "CSV output path override");
    sub->add_option("--manifest", manifest_path, "manifest path override");
    return sub;
  };

  add_config_command("solve", "solve a Dirichlet problem, emit nodal CSV");
  add_config_command("eps-sweep", "solve the eps family, emit eps,sup_diff,grad_modular_diff")
      ->add_option("--eps", eps_override, "comma-separated eps list override");
  add_config_command("compare", "solve two ordered problems and check comparison");
  add_config_command("viscosity-check", "touching tests against a quadratic family");
  add_config_command("doubling", "doubling-of-variables experiment trace");
  add_config_command("norms", "modular, Luxemburg norm, Poincare ratio of a catalog function");

  CLI::App* radial = app.add_subcommand("radial", "radial profile samples and gradient modular");
  std::string variant = "grouped";
  std::string radial_out = "radial.csv";
  double radial_p0 = 1.5, radial_slope = 0.3;
  int radial_dim = 2;
  radial->add_option("--variant", variant, "verbatim or grouped")->required();
  radial->add_option("--out", radial_out, "output CSV path")->required();
  radial->add_option("--p0", radial_p0, "p(r) = p0 + slope r");
  radial->add_option("--slope", radial_slope, "p(r) = p0 + slope r");
  radial->add_option("--dim", radial_dim, "ambient dimension");

  CLI::App* rado = app.add_subcommand("rado", "removability experiment, JSON report");
  std::string rado_case;
  rado->add_option("--case", rado_case, "linear1d, linear2d, or abs")->required();

  CLI::App* op = app.add_subcommand("op", "pointwise operator value and branch as JSON");
  std::string jet_spec, exponent_spec, form = "divergence";
  op->add_option("--jet", jet_spec, "x=..;value=..;xi=..;X=.. (row-major Hessian)")->required();
  op->add_option("--exponent", exponent_spec, "kind=..;p0=..;slope=..;direction=..")->required();
  op->add_option("--form", form, "divergence or normalized");

  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  if (sub == "radial")
    return pxlap::run_radial(variant, radial_out, radial_p0, radial_slope, radial_dim);
  if (sub == "rado") return pxlap::run_rado(rado_case, std::cout);
  if (sub == "op") return pxlap::run_op(jet_spec, exponent_spec, form, std::cout);

  pxlap::Config cfg;
  try {
    cfg = pxlap::Config::parse_file(config_path);
  } catch (const pxlap::Error& e) {
    std::cerr << "pxlap: " << e.what() << "\n";
    return pxlap::kExitConfig;
  }
  if (!out_override.empty()) cfg.set("output", "csv", out_override);
  if (!eps_override.empty()) cfg.set("experiment", "eps_list", eps_override);
  return pxlap::run_command(sub, cfg, manifest_path);
}
