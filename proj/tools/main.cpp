// Copyright 2026 The Creakbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// creakbench: dataset adaptation, creak labeling, flow training and
// verification utilities driven by JSONL manifests and CSV reports.

#include <CLI11.hpp>

#include <string>
#include <vector>

#include "cli_util.hpp"

int main(int argc, char** argv) {
  using namespace creakbench::cli;

  CLI::App app{"creak/pitch disentanglement toolkit"};
  app.require_subcommand(1);

  // analyze
  std::string an_manifest, an_out, an_calib;
  int an_workers = 1;
  auto* analyze = app.add_subcommand("analyze", "extract voice features and creak labels");
  analyze->add_option("--manifest", an_manifest, "input manifest (JSONL)")->required();
  analyze->add_option("--out", an_out, "output features CSV")->required();
  analyze->add_option("--calib", an_calib, "creak calibration file");
  analyze->add_option("--workers", an_workers, "worker threads");

  // adapt
  std::string ad_manifest, ad_out, ad_calib;
  double ad_b = 2.0;
  std::uint64_t ad_seed = default_seed();
  int ad_workers = 1;
  bool ad_preset = false;
  auto* adapt = app.add_subcommand("adapt", "pitch-shift a corpus to its gender means");
  adapt->add_option("--manifest", ad_manifest, "input manifest (JSONL)")->required();
  adapt->add_option("--out", ad_out, "output directory")->required();
  adapt->add_option("--b", ad_b, "semitone noise stddev (default 2)");
  adapt->add_option("--seed", ad_seed, "global seed (default $CREAKBENCH_SEED)");
  adapt->add_option("--workers", ad_workers, "worker threads");
  adapt->add_flag("--preset-stats", ad_preset, "use the 119/195 Hz gender means");
  adapt->add_option("--calib", ad_calib, "creak calibration file");

  // corr
  std::string co_features, co_out, co_group = "gender";
  auto* corr = app.add_subcommand("corr", "pitch-creak correlation report");
  corr->add_option("--features", co_features, "features CSV (from analyze)")->required();
  corr->add_option("--out", co_out, "output CSV")->required();
  corr->add_option("--group-by", co_group, "gender|overall (default gender)");

  // flow train/manipulate/loglik
  auto* flow_cmd = app.add_subcommand("flow", "conditional normalizing flow");
  flow_cmd->require_subcommand(1);
  std::string ft_data, ft_model, ft_trace = "exact";
  std::vector<int> ft_hidden = {64, 64};
  int ft_steps = 20, ft_probes = 8, ft_batch = 200, ft_epochs = 100;
  double ft_lr = 1e-4;
  std::uint64_t ft_seed = default_seed();
  auto* ftrain = flow_cmd->add_subcommand("train", "fit a flow to embeddings");
  ftrain->add_option("--data", ft_data, "embeddings JSONL")->required();
  ftrain->add_option("--model", ft_model, "output model file")->required();
  ftrain->add_option("--hidden", ft_hidden, "hidden layer widths");
  ftrain->add_option("--steps", ft_steps, "RK4 steps");
  ftrain->add_option("--trace", ft_trace, "exact|hutchinson");
  ftrain->add_option("--probes", ft_probes, "Hutchinson probes");
  ftrain->add_option("--batch", ft_batch, "batch size (default 200)");
  ftrain->add_option("--lr", ft_lr, "learning rate (default 1e-4)");
  ftrain->add_option("--epochs", ft_epochs, "training epochs");
  ftrain->add_option("--seed", ft_seed, "training seed");

  std::string fm_model, fm_data, fm_out;
  double fm_beta = 0.0;
  auto* fmanip = flow_cmd->add_subcommand("manipulate", "shift creak on embeddings");
  fmanip->add_option("--model", fm_model, "model file")->required();
  fmanip->add_option("--data", fm_data, "embeddings JSONL")->required();
  fmanip->add_option("--beta", fm_beta, "creak shift")->required();
  fmanip->add_option("--out", fm_out, "output embeddings JSONL")->required();

  std::string fl_model, fl_data;
  auto* floglik = flow_cmd->add_subcommand("loglik", "per-sample log-likelihoods");
  floglik->add_option("--model", fl_model, "model file")->required();
  floglik->add_option("--data", fl_data, "embeddings JSONL")->required();

  // eer
  std::string ee_trials, ee_originals, ee_out, ee_policy = "exhaustive";
  std::vector<std::string> ee_manipulated;
  std::vector<double> ee_betas;
  std::size_t ee_max_trials = 1000000;
  std::uint64_t ee_seed = default_seed();
  auto* eer_cmd = app.add_subcommand("eer", "equal error rate from trials or embeddings");
  eer_cmd->add_option("--trials", ee_trials, "trials CSV (label,score[,beta])");
  eer_cmd->add_option("--originals", ee_originals, "unmanipulated embeddings JSONL");
  eer_cmd->add_option("--manipulated", ee_manipulated, "manipulated embeddings JSONL (repeat)");
  eer_cmd->add_option("--beta", ee_betas, "beta per manipulated file (repeat)");
  eer_cmd->add_option("--out", ee_out, "output CSV")->required();
  eer_cmd->add_option("--policy", ee_policy, "exhaustive|sampled");
  eer_cmd->add_option("--max-trials", ee_max_trials, "sampled-policy cap");
  eer_cmd->add_option("--seed", ee_seed, "sampling seed");

  // synthexp
  std::string se_out, se_trace = "exact";
  std::uint64_t se_seed = default_seed();
  int se_speakers = 200, se_utts = 5, se_d = 8, se_steps = 20, se_probes = 8;
  int se_epochs = 60, se_batch = 200;
  double se_rho = -0.7, se_lr = 1e-3;
  std::vector<int> se_hidden = {64, 64};
  std::vector<double> se_beta_grid;
  auto* synth = app.add_subcommand("synthexp", "synthetic disentanglement experiment");
  synth->add_option("--out", se_out, "output directory")->required();
  synth->add_option("--seed", se_seed, "experiment seed");
  synth->add_option("--speakers", se_speakers, "speakers (default 200)");
  synth->add_option("--utts", se_utts, "utterances per speaker (default 5)");
  synth->add_option("--d", se_d, "embedding dimension (default 8)");
  synth->add_option("--rho", se_rho, "creak-pitch correlation (default -0.7)");
  synth->add_option("--hidden", se_hidden, "hidden layer widths");
  synth->add_option("--steps", se_steps, "RK4 steps");
  synth->add_option("--trace", se_trace, "exact|hutchinson");
  synth->add_option("--probes", se_probes, "Hutchinson probes");
  synth->add_option("--epochs", se_epochs, "training epochs");
  synth->add_option("--lr", se_lr, "learning rate");
  synth->add_option("--batch", se_batch, "batch size");
  synth->add_option("--beta-grid", se_beta_grid, "manipulation factors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (analyze->parsed()) return run_analyze(an_manifest, an_out, an_calib, an_workers);
  if (adapt->parsed()) {
    return run_adapt(ad_manifest, ad_out, ad_b, ad_seed, ad_workers, ad_preset, ad_calib);
  }
  if (corr->parsed()) return run_corr(co_features, co_out, co_group);
  if (flow_cmd->parsed()) {
    if (ftrain->parsed()) {
      return run_flow_train(ft_data, ft_model, ft_hidden, ft_steps, ft_trace, ft_probes,
                            ft_batch, ft_lr, ft_epochs, ft_seed);
    }
    if (fmanip->parsed()) return run_flow_manipulate(fm_model, fm_data, fm_beta, fm_out);
    if (floglik->parsed()) return run_flow_loglik(fl_model, fl_data);
  }
  if (eer_cmd->parsed()) {
    if (!ee_trials.empty()) return run_eer_trials(ee_trials, ee_out);
    return run_eer_embeddings(ee_originals, ee_manipulated, ee_betas, ee_out, ee_policy,
                              ee_max_trials, ee_seed);
  }
  if (synth->parsed()) {
    return run_synthexp(se_out, se_seed, se_speakers, se_utts, se_d, se_rho, se_hidden,
                        se_steps, se_trace, se_probes, se_epochs, se_lr, se_batch,
                        se_beta_grid);
  }
  return kExitInput;
}
