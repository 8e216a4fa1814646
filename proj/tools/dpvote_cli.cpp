// Copyright 2026 The dpvote Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end. Subcommands:
//   aggregate  answer queries from a ballot CSV under a privacy budget
//   simulate   synthetic teacher streams, budgeted experiments, sweeps
//   analyze    gap CDFs, dependency matrices, sensitivity reports
//
// Exit codes: 0 success, 2 input error, 3 budget exhausted before any query.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpvote/dpvote.hpp"
#include "dpvote/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitBudgetExhausted = 3;

struct CommonOptions {
  std::string mechanism = "binary";
  double sigma_gnmax = 0.0;
  double sigma_threshold = 0.0;
  double threshold = 0.0;
  double tau = 0.0;
  std::string clip_norm = "l2";
  double epsilon = 0.0;
  double delta = 0.0;
  std::vector<double> orders;
  std::uint64_t seed = 0;
  bool oracle_mode = false;
  std::string out_dir = ".";
};

void add_mechanism_flags(CLI::App* cmd, CommonOptions* opt) {
  cmd->add_option("--mechanism", opt->mechanism, "binary, tau or powerset")
      ->check(CLI::IsMember({"binary", "tau", "powerset"}));
  cmd->add_option("--sigma-gnmax", opt->sigma_gnmax,
                  "Gaussian noise scale for the release (0 needs "
                  "--oracle-mode)");
  cmd->add_option("--sigma-threshold", opt->sigma_threshold,
                  "Gaussian noise scale for the consensus check");
  cmd->add_option("--threshold", opt->threshold,
                  "consensus threshold T (0 disables gating)");
  cmd->add_option("--tau", opt->tau, "clip bound for the tau mechanism");
  cmd->add_option("--clip-norm", opt->clip_norm, "clip norm: l1 or l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  cmd->add_flag("--oracle-mode", opt->oracle_mode,
                "run without noise or accounting (non-private)");
  cmd->add_option("--seed", opt->seed, "master seed for all randomness");
  cmd->add_option("--orders", opt->orders,
                  "comma-separated Renyi orders (> 1)")
      ->delimiter(',');
  cmd->add_option("--out-dir", opt->out_dir,
                  "output directory (env DPVOTE_OUT_DIR overrides)");
}

void add_budget_flags(CLI::App* cmd, CommonOptions* opt, bool require) {
  CLI::Option* eps = cmd->add_option("--epsilon", opt->epsilon,
                                     "total (epsilon, delta)-DP budget");
  CLI::Option* delta =
      cmd->add_option("--delta", opt->delta, "DP delta (mandatory)");
  if (require) {
    eps->required();
    delta->required();
  }
}

dpvote::MechanismConfig mechanism_config(const CommonOptions& opt) {
  dpvote::MechanismConfig cfg;
  if (opt.mechanism == "binary") {
    cfg.kind = dpvote::MechanismKind::kBinary;
  } else if (opt.mechanism == "tau") {
    cfg.kind = dpvote::MechanismKind::kTau;
  } else {
    cfg.kind = dpvote::MechanismKind::kPowerset;
  }
  cfg.sigma_g = opt.sigma_gnmax;
  cfg.sigma_t = opt.sigma_threshold;
  cfg.threshold_t = opt.threshold;
  cfg.tau = opt.tau;
  cfg.clip_norm = opt.clip_norm == "l1" ? dpvote::ClipNorm::kL1
                                        : dpvote::ClipNorm::kL2;
  if (cfg.sigma_g == 0.0 && !opt.oracle_mode) {
    throw std::runtime_error(
        "--sigma-gnmax 0 releases exact counts; pass --oracle-mode to "
        "acknowledge the run is not private");
  }
  if (cfg.sigma_g > 0.0 && opt.oracle_mode) {
    throw std::runtime_error("--oracle-mode requires --sigma-gnmax 0");
  }
  cfg.validate();
  return cfg;
}

dpvote::OrderGrid order_grid(const CommonOptions& opt) {
  if (opt.orders.empty()) return dpvote::OrderGrid::defaults();
  return dpvote::OrderGrid(opt.orders);
}

std::filesystem::path resolve_out_dir(const CommonOptions& opt) {
  const char* env = std::getenv("DPVOTE_OUT_DIR");
  std::filesystem::path dir = env != nullptr ? env : opt.out_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

dpvote::Json common_config_json(const CommonOptions& opt) {
  dpvote::Json j;
  j["mechanism"] = opt.mechanism;
  j["sigma_gnmax"] = opt.sigma_gnmax;
  j["sigma_threshold"] = opt.sigma_threshold;
  j["threshold"] = opt.threshold;
  j["tau"] = opt.tau;
  j["clip_norm"] = opt.clip_norm;
  j["epsilon"] = opt.epsilon;
  j["delta"] = opt.delta;
  j["orders"] = order_grid(opt).orders();
  j["oracle_mode"] = opt.oracle_mode;
  return j;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

void write_manifest(const std::filesystem::path& dir,
                    dpvote::RunManifest manifest) {
  write_text_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// aggregate
// ---------------------------------------------------------------------------

int run_aggregate(const CommonOptions& opt, const std::string& ballots_path) {
  const dpvote::MechanismConfig cfg = mechanism_config(opt);
  const dpvote::OrderGrid grid = order_grid(opt);
  const dpvote::BallotDataset data =
      dpvote::read_ballot_csv_file(ballots_path);
  const std::filesystem::path dir = resolve_out_dir(opt);

  std::optional<dpvote::BudgetLedger> ledger;
  if (!opt.oracle_mode) {
    ledger.emplace(grid, dpvote::Budget{opt.epsilon, opt.delta});
  }

  std::string jsonl;
  int attempted = 0;
  bool exhausted_at_first = false;
  for (std::size_t q = 0; q < data.ballots.size(); ++q) {
    const std::int64_t qid = data.query_ids[q];
    dpvote::QueryOutcome outcome =
        dpvote::aggregate(data.ballots[q], cfg, grid, opt.seed, qid);
    dpvote::Json record;
    if (outcome.non_private) {
      record = dpvote::outcome_json(qid, outcome, 0.0);
      record["eps_dp_so_far"] = nullptr;  // oracle mode: no DP guarantee
    } else {
      if (ledger->would_exceed(outcome.cost)) {
        if (attempted == 0) exhausted_at_first = true;
        break;
      }
      ledger->charge(outcome.cost);
      record = dpvote::outcome_json(qid, outcome, ledger->spent().epsilon);
    }
    jsonl += record.dump() + "\n";
    ++attempted;
  }

  write_text_file(dir / "outcomes.jsonl", jsonl);
  if (ledger) {
    write_text_file(dir / "ledger.json",
                    dpvote::ledger_json(*ledger).dump(2) + "\n");
  }

  dpvote::RunManifest manifest;
  manifest.subcommand = "aggregate";
  manifest.config = common_config_json(opt);
  manifest.config["ballots"] = ballots_path;
  manifest.seed = opt.seed;
  manifest.input_paths = {ballots_path};
  manifest.output_paths = {(dir / "outcomes.jsonl").string()};
  if (ledger) manifest.output_paths.push_back((dir / "ledger.json").string());
  write_manifest(dir, std::move(manifest));

  return exhausted_at_first ? kExitBudgetExhausted : kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
  int teachers = 50;
  int labels = 1;
  std::vector<double> prob = {0.5};
  std::string correlation = "independent";
  int block_d = 0;
  int queries = 100;
  bool epsilon_sweep = false;
  int pivot = -1;
};

dpvote::SimulationConfig simulation_config(const CommonOptions& opt,
                                           const SimulateOptions& sim) {
  dpvote::SimulationConfig cfg;
  cfg.teachers = sim.teachers;
  cfg.labels = sim.labels;
  cfg.p = sim.prob;
  cfg.correlation = sim.correlation == "block"
                        ? dpvote::Correlation::kBlock
                        : dpvote::Correlation::kIndependent;
  cfg.block_d = sim.block_d;
  cfg.queries = sim.queries;
  cfg.seed = opt.seed;
  cfg.validate();
  return cfg;
}

int run_simulate(const CommonOptions& opt, const SimulateOptions& sim) {
  const dpvote::MechanismConfig cfg = mechanism_config(opt);
  const dpvote::OrderGrid grid = order_grid(opt);
  const dpvote::SimulationConfig sim_cfg = simulation_config(opt, sim);
  const dpvote::VoteStream votes = dpvote::generate_votes(sim_cfg);
  const std::filesystem::path dir = resolve_out_dir(opt);
  const dpvote::Budget budget{opt.epsilon, opt.delta};

  dpvote::ExperimentResult result =
      sim.pivot >= 0
          ? dpvote::answer_with_dependencies(votes, cfg, budget, grid,
                                             opt.seed, sim.pivot)
          : dpvote::run_experiment(votes, cfg, budget, grid, opt.seed);

  std::string jsonl;
  for (std::size_t q = 0; q < result.outcomes.size(); ++q) {
    dpvote::Json record = dpvote::outcome_json(
        static_cast<std::int64_t>(q), result.outcomes[q],
        result.eps_so_far[q]);
    if (result.outcomes[q].non_private) record["eps_dp_so_far"] = nullptr;
    jsonl += record.dump() + "\n";
  }
  write_text_file(dir / "outcomes.jsonl", jsonl);

  dpvote::Json result_json;
  result_json["config"] = common_config_json(opt);
  result_json["config"]["teachers"] = sim.teachers;
  result_json["config"]["labels"] = sim.labels;
  result_json["config"]["prob"] = sim.prob;
  result_json["config"]["correlation"] = sim.correlation;
  result_json["config"]["block_d"] = sim.block_d;
  result_json["config"]["queries"] = sim.queries;
  result_json["config"]["pivot"] = sim.pivot;
  result_json["answered"] = result.answered;
  result_json["attempted"] = result.outcomes.size();
  result_json["stopped_early"] = result.stopped_early;
  if (cfg.oracle_mode()) {
    result_json["eps_final"] = nullptr;  // nothing was charged
  } else {
    result_json["eps_final"] = result.final_guarantee.epsilon;
  }
  result_json["delta"] = result.final_guarantee.delta;
  result_json["metrics"] = dpvote::metric_report_json(result.metrics);
  write_text_file(dir / "result.json", result_json.dump(2) + "\n");

  std::vector<std::string> outputs = {(dir / "outcomes.jsonl").string(),
                                      (dir / "result.json").string()};

  if (sim.epsilon_sweep) {
    std::vector<double> eps_values;
    for (int e = 1; e <= 20; ++e) eps_values.push_back(e);
    const std::vector<dpvote::SweepPoint> points = dpvote::epsilon_sweep(
        votes, cfg, eps_values, opt.delta, grid, opt.seed);
    std::ostringstream sweep;
    dpvote::write_sweep_csv(sweep, points);
    write_text_file(dir / "sweep.csv", sweep.str());
    outputs.push_back((dir / "sweep.csv").string());
  }

  dpvote::RunManifest manifest;
  manifest.subcommand = "simulate";
  manifest.config = result_json["config"];
  manifest.seed = opt.seed;
  manifest.output_paths = outputs;
  write_manifest(dir, std::move(manifest));

  if (result.outcomes.empty() && result.stopped_early) {
    return kExitBudgetExhausted;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  std::string ballots_path;
  int sensitivity_n = 0;
  int sensitivity_k = 0;
  double sensitivity_tau = 0.0;  // 0 = unclipped
  double sensitivity_norm = 2.0;
};

int run_analyze(const CommonOptions& opt, const AnalyzeOptions& an) {
  const std::filesystem::path dir = resolve_out_dir(opt);
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  if (!an.ballots_path.empty()) {
    const dpvote::BallotDataset data =
        dpvote::read_ballot_csv_file(an.ballots_path);
    if (data.ballots.empty()) {
      throw std::runtime_error("analyze: ballot CSV has no queries");
    }
    inputs.push_back(an.ballots_path);

    for (const auto& [kind, name] :
         {std::pair{dpvote::MechanismKind::kBinary, "gap_cdf_binary.csv"},
          std::pair{dpvote::MechanismKind::kPowerset,
                    "gap_cdf_powerset.csv"}}) {
      std::ostringstream csv;
      dpvote::write_gap_cdf_csv(csv, dpvote::gap_cdf(data.ballots, kind));
      write_text_file(dir / name, csv.str());
      outputs.push_back((dir / name).string());
    }

    // Dependency matrices over the per-query plurality outcomes.
    std::vector<std::vector<std::uint8_t>> outcomes;
    outcomes.reserve(data.ballots.size());
    for (const dpvote::BallotMatrix& m : data.ballots) {
      outcomes.push_back(
          dpvote::deterministic_election(m, m.voters() / 2.0));
    }
    for (const auto& [mode, name] :
         {std::pair{dpvote::DependencyMode::kPositive,
                    "dependency_positive.csv"},
          std::pair{dpvote::DependencyMode::kNegative,
                    "dependency_negative.csv"}}) {
      std::ostringstream csv;
      dpvote::write_dependency_csv(
          csv, dpvote::dependency_matrix(outcomes, mode));
      write_text_file(dir / name, csv.str());
      outputs.push_back((dir / name).string());
    }
  }

  if (an.sensitivity_n > 0 && an.sensitivity_k > 0) {
    const int n = an.sensitivity_n;
    const int k = an.sensitivity_k;
    const double tau = an.sensitivity_tau;
    // Stacked (V0, V1) score vector, optionally tau-clipped: the function
    // whose sensitivity prices the per-label mechanisms.
    dpvote::BallotFunction f = [k, tau](const dpvote::BallotMatrix& m) {
      std::vector<double> v1(k, 0.0);
      if (tau > 0.0) {
        v1 = dpvote::clip(m, tau, dpvote::ClipNorm::kL2).positive_counts();
      } else {
        const std::vector<int> counts = m.positive_counts();
        v1.assign(counts.begin(), counts.end());
      }
      std::vector<double> stacked(2 * k);
      for (int i = 0; i < k; ++i) {
        stacked[i] = m.voters() - v1[i];  // V0
        stacked[k + i] = v1[i];           // V1
      }
      return stacked;
    };
    const dpvote::SensitivityReport report =
        dpvote::sensitivity_oracle(f, n, k, an.sensitivity_norm);
    dpvote::Json j;
    j["n"] = n;
    j["k"] = k;
    j["tau"] = tau;
    j["norm"] = report.norm_order;
    j["delta"] = report.delta;
    auto rows_json = [](const dpvote::BallotMatrix& m) {
      dpvote::Json rows = dpvote::Json::array();
      for (int j2 = 0; j2 < m.voters(); ++j2) {
        dpvote::Json row = dpvote::Json::array();
        for (int i = 0; i < m.labels(); ++i) {
          row.push_back(static_cast<int>(m.at(j2, i)));
        }
        rows.push_back(std::move(row));
      }
      return rows;
    };
    j["witness_a"] = rows_json(report.witness_a);
    j["witness_b"] = rows_json(report.witness_b);
    write_text_file(dir / "sensitivity.json", j.dump(2) + "\n");
    outputs.push_back((dir / "sensitivity.json").string());
  }

  if (outputs.empty()) {
    throw std::runtime_error(
        "analyze: nothing to do (pass --ballots and/or --sensitivity-n/-k)");
  }

  dpvote::RunManifest manifest;
  manifest.subcommand = "analyze";
  manifest.config = dpvote::Json{{"ballots", an.ballots_path},
                                 {"sensitivity_n", an.sensitivity_n},
                                 {"sensitivity_k", an.sensitivity_k},
                                 {"sensitivity_tau", an.sensitivity_tau},
                                 {"sensitivity_norm", an.sensitivity_norm}};
  manifest.seed = opt.seed;
  manifest.input_paths = inputs;
  manifest.output_paths = outputs;
  write_manifest(dir, std::move(manifest));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpvote: differentially private multi-winner voting"};
  app.require_subcommand(1);

  CommonOptions agg_opt;
  std::string ballots_path;
  CLI::App* agg = app.add_subcommand(
      "aggregate", "answer ballot-CSV queries under a privacy budget");
  agg->add_option("--ballots", ballots_path, "ballot CSV path")->required();
  add_mechanism_flags(agg, &agg_opt);
  add_budget_flags(agg, &agg_opt, /*require=*/false);

  CommonOptions sim_opt;
  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run budgeted experiments on synthetic teacher votes");
  simulate->add_option("--teachers", sim.teachers, "teacher count");
  simulate->add_option("--labels", sim.labels, "label count");
  simulate
      ->add_option("--prob", sim.prob,
                   "per-label Bernoulli probability (1 value = uniform)")
      ->delimiter(',');
  simulate
      ->add_option("--correlation", sim.correlation,
                   "independent or block")
      ->check(CLI::IsMember({"independent", "block"}));
  simulate->add_option("--block-d", sim.block_d,
                       "labels 1..d-1 copy label 0 in block mode");
  simulate->add_option("--queries", sim.queries, "query count");
  simulate->add_flag("--epsilon-sweep", sim.epsilon_sweep,
                     "also sweep epsilon in 1..20 and write sweep.csv");
  simulate->add_option("--pivot", sim.pivot,
                       "pivot label for dependency-aware answering");
  add_mechanism_flags(simulate, &sim_opt);
  add_budget_flags(simulate, &sim_opt, /*require=*/true);

  CommonOptions an_opt;
  AnalyzeOptions an;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "gap CDFs, dependency matrices, sensitivity reports");
  analyze->add_option("--ballots", an.ballots_path, "ballot CSV path");
  analyze->add_option("--sensitivity-n", an.sensitivity_n,
                      "voters for the exhaustive sensitivity oracle");
  analyze->add_option("--sensitivity-k", an.sensitivity_k,
                      "labels for the exhaustive sensitivity oracle");
  analyze->add_option("--sensitivity-tau", an.sensitivity_tau,
                      "l2 clip bound for the oracle (0 = unclipped)");
  analyze->add_option("--sensitivity-norm", an.sensitivity_norm,
                      "norm order p for the oracle");
  analyze->add_option("--out-dir", an_opt.out_dir,
                      "output directory (env DPVOTE_OUT_DIR overrides)");
  analyze->add_option("--seed", an_opt.seed, "recorded in the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (agg->parsed()) {
      if (!agg_opt.oracle_mode &&
          (agg->count("--epsilon") == 0 || agg->count("--delta") == 0)) {
        throw std::runtime_error(
            "aggregate: --epsilon and --delta are mandatory outside "
            "--oracle-mode");
      }
      return run_aggregate(agg_opt, ballots_path);
    }
    if (simulate->parsed()) return run_simulate(sim_opt, sim);
    if (analyze->parsed()) return run_analyze(an_opt, an);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
