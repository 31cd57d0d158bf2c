#include <CLI11.hpp>

#include "lubrix/cli.hpp"
#include "lubrix/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for compressible lubrication flows"};
  app.set_version_flag("--version", lubrix::version_string);
  app.require_subcommand(1);

  lubrix::cli::Invocation inv;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", inv.config_path,
                    "config file (JSON; // comments allowed; defaults fill missing keys)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", inv.out_dir, "override output.dir from the config");
    cmd->add_option("--seed", inv.seed, "override checks.seed from the config");
    cmd->add_option("--threads", inv.threads, "cap for the linear-algebra backend threads");
  };

  auto* reynolds = app.add_subcommand("reynolds", "stationary lubrication limit on the period");
  reynolds->require_subcommand(1);
  auto* r_solve =
      reynolds->add_subcommand("solve", "shooting solver; writes reynolds.csv + reynolds.json");
  auto* r_oracle = reynolds->add_subcommand(
      "oracle-compare", "cross-validate against the finite-volume discretization");
  add_common(r_solve);
  add_common(r_oracle);

  auto* thinfilm = app.add_subcommand("thinfilm", "desk-scale compressible film solver");
  thinfilm->require_subcommand(1);
  auto* t_solve = thinfilm->add_subcommand(
      "solve", "single aspect ratio (first eps_list entry); writes thinfilm_eps*.csv");
  auto* t_sweep = thinfilm->add_subcommand(
      "sweep", "every eps against one matched limit solution; writes sweep.json");
  add_common(t_solve);
  add_common(t_sweep);

  auto* check = app.add_subcommand("check", "numerical verification of the functional estimates");
  check->require_subcommand(1);
  auto* c_ineq = check->add_subcommand(
      "inequalities", "sample random admissible fields against their expected ratio bounds");
  add_common(c_ineq);
  c_ineq->add_option("--samples", inv.samples, "override checks.samples from the config");

  auto* eos = app.add_subcommand("eos", "pressure-law utilities");
  eos->require_subcommand(1);
  auto* e_id = eos->add_subcommand(
      "identities", "residuals of the certifying identity for both pressure families");
  add_common(e_id);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lubrix::cli::exit_validation_failure;
  }

  if (r_solve->parsed())
    inv.command = "reynolds solve";
  else if (r_oracle->parsed())
    inv.command = "reynolds oracle-compare";
  else if (t_solve->parsed())
    inv.command = "thinfilm solve";
  else if (t_sweep->parsed())
    inv.command = "thinfilm sweep";
  else if (c_ineq->parsed())
    inv.command = "check inequalities";
  else if (e_id->parsed())
    inv.command = "eos identities";

  return lubrix::cli::dispatch(inv);
}
