#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specvote/cli.hpp"

namespace {

void add_batch_flags(CLI::App* cmd, specvote::RunConfig& config,
                     std::vector<int>& upsample) {
  cmd->add_option("--manifest", config.manifest, "run manifest (JSON)")
      ->required();
  cmd->add_option("--sources", config.sources,
                  "feature source names to use (default: all in manifest)")
      ->delimiter(',');
  cmd->add_option("--ks", config.ks, "cluster counts, e.g. 2,3,4")
      ->delimiter(',');
  cmd->add_option("--seed", config.seed, "root seed (default 0)")
      ->envname("SPECTRAL_VOTE_SEED");
  cmd->add_option("--out", config.out, "output directory")->required();
  cmd->add_option("--workers", config.workers, "worker threads (default 1)");
  cmd->add_option("--upsample", upsample,
                  "also write masks nearest-resized to H W")
      ->expected(2);
  cmd->add_flag("--keep-going", config.keep_going,
                "continue past per-image failures");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spectral cluster voting: pseudo-mask generation and evaluation"};
  app.require_subcommand(1);

  specvote::RunConfig run;
  std::vector<int> upsample;
  CLI::App* cluster = app.add_subcommand(
      "cluster", "write per-(source,k) cluster masks for every image");
  add_batch_flags(cluster, run, upsample);
  CLI::App* pseudo = app.add_subcommand(
      "pseudo-label", "vote over the candidate pool and write pseudo masks");
  pseudo->alias("vote");
  add_batch_flags(pseudo, run, upsample);

  specvote::EvalConfig eval;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score predictions against ground truth");
  evaluate->add_option("--pred", eval.pred_dir, "prediction mask directory")
      ->required();
  evaluate->add_option("--gt", eval.gt_dir, "ground truth mask directory")
      ->required();
  evaluate->add_option("--out", eval.out, "report output directory")
      ->required();
  evaluate->add_flag("--allow-missing", eval.allow_missing,
                     "unmatched files only warn");
  evaluate->add_flag("--csv", eval.write_csv, "also write report.csv");

  std::uint64_t check_seed = 0;
  int check_trials = 100;
  double check_step = 1e-5, check_tol = 1e-6, check_bias = 0.0;
  CLI::App* check =
      app.add_subcommand("loss-check", "verify loss gradients numerically");
  check->add_option("--seed", check_seed, "seed (default 0)")
      ->envname("SPECTRAL_VOTE_SEED");
  check->add_option("--trials", check_trials, "number of trials (default 100)")
      ->check(CLI::PositiveNumber);
  check->add_option("--step", check_step, "finite difference step");
  check->add_option("--tol", check_tol, "pass tolerance");
  check->add_option("--inject-bias", check_bias,
                    "testing hook: offset analytic gradients by this much");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;  // bad usage is an input error
  }

  try {
    if (!upsample.empty()) {
      run.upsample_h = upsample[0];
      run.upsample_w = upsample[1];
    }
    if (cluster->parsed()) return specvote::run_cluster(run);
    if (pseudo->parsed()) return specvote::run_pseudo_label(run);
    if (evaluate->parsed()) return specvote::run_evaluate(eval);
    if (check->parsed())
      return specvote::run_loss_check(check_seed, check_trials, check_step,
                                      check_tol, check_bias);
  } catch (const specvote::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
  return 2;  // unreachable: a subcommand is required
}
