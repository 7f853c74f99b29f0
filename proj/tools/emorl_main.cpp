// emorl: command-line laboratory for similarity-weighted reward shaping and
// group-relative policy optimization on a synthetic emotion environment.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "emorl/ablation.hpp"
#include "emorl/artifacts.hpp"
#include "emorl/emotion_geometry.hpp"
#include "emorl/errors.hpp"
#include "emorl/grpo_core.hpp"
#include "emorl/metrics_eval.hpp"
#include "emorl/run_config.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace emorl;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct MatrixArgs {
  std::string labels;
};

int cmd_matrix(const MatrixArgs& args) {
  const LabelSet set = resolve_label_set(args.labels);
  std::cout << transition_matrix_to_csv(build_transition_matrix(set));
  return kExitOk;
}

struct ScoreArgs {
  std::string pattern = "esr";
  std::string labels = "meld7";
  double gamma = 0.7;
  double alpha = 1.0;
  std::string accuracy = "eswr";
  bool gate_accuracy_on_format = false;
  std::string in;
  std::string out;
};

int cmd_score(const ScoreArgs& args) {
  const auto pattern = pattern_from_name(args.pattern);
  if (!pattern) throw ConfigError("pattern must be 'ir', 'eur' or 'esr'");
  const auto kind = accuracy_kind_from_name(args.accuracy);
  if (!kind) throw ConfigError("accuracy must be 'eswr' or 'bcr'");
  const LabelSet set = resolve_label_set(args.labels);
  const TransitionMatrix similarity = build_transition_matrix(set);

  RewardConfig config;
  config.gamma = args.gamma;
  config.alpha_schedule = AlphaSchedule::constant(args.alpha);
  config.accuracy_kind = *kind;
  config.gate_accuracy_on_format = args.gate_accuracy_on_format;

  std::vector<json> out_records;
  for (json record : read_jsonl(args.in)) {
    const std::string response = record.at("response").get<std::string>();
    const std::string gold_name = record.at("gold").get<std::string>();
    const auto gold_index = set.index_of(gold_name);
    if (!gold_index) throw LabelNotInSet("gold label '" + gold_name + "' is not in the label set");
    const ParsedResponse parsed = parse_response(response, *pattern, set);
    const RewardBreakdown reward =
        reward_from_parsed(parsed, set.label(*gold_index), config, similarity, 0);
    record["format"] = reward.format;
    record["accuracy"] = reward.accuracy;
    record["total"] = reward.total;
    record["answer"] = parsed.answer ? json(parsed.answer->name) : json(nullptr);
    out_records.push_back(std::move(record));
  }
  write_jsonl(args.out, out_records);
  std::cout << "scored " << out_records.size() << " records -> " << args.out << "\n";
  return kExitOk;
}

struct ValidateArgs {
  std::string pattern = "esr";
  std::string labels = "meld7";
  std::string in;
};

int cmd_validate(const ValidateArgs& args) {
  const auto pattern = pattern_from_name(args.pattern);
  if (!pattern) throw ConfigError("pattern must be 'ir', 'eur' or 'esr'");
  const LabelSet set = resolve_label_set(args.labels);
  long valid = 0;
  long total = 0;
  for (const json& record : read_jsonl(args.in)) {
    const std::string id =
        record.contains("id") ? record.at("id").get<std::string>() : std::to_string(total);
    const ParsedResponse parsed =
        parse_response(record.at("response").get<std::string>(), *pattern, set);
    std::cout << id << ": " << (parsed.format_valid ? "valid" : "invalid") << "\n";
    valid += parsed.format_valid ? 1 : 0;
    ++total;
  }
  const double rate = total > 0 ? 100.0 * static_cast<double>(valid) / static_cast<double>(total)
                                : 0.0;
  std::printf("pass rate: %ld/%ld (%.2f%%)\n", valid, total, rate);
  return kExitOk;
}

struct SimulateArgs {
  std::string config;
  long n = 1000;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  const EnvConfig config = env_config_from_json(read_json_file(args.config));
  const Environment env = make_environment(config);
  std::vector<json> records;
  records.reserve(static_cast<std::size_t>(args.n));
  for (long i = 0; i < args.n; ++i) {
    const SyntheticEpisode ep = env.episode_at(static_cast<std::uint64_t>(i));
    json features = json::array();
    for (Eigen::Index k = 0; k < ep.features.size(); ++k) features.push_back(ep.features[k]);
    records.push_back({{"i", i},
                       {"gold", ep.gold.name},
                       {"ambiguous", ep.ambiguous},
                       {"neighbor", ep.neighbor ? json(ep.neighbor->name) : json(nullptr)},
                       {"features", std::move(features)}});
  }
  write_jsonl(args.out, records);
  std::cout << "wrote " << records.size() << " episodes -> " << args.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::string out_dir;
};

int cmd_train(const TrainArgs& args) {
  RunConfig config = run_config_from_json(read_json_file(args.config));
  apply_seed_override(config, seed_override_from_environment());
  const Environment env = make_environment(config.env);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainingRun run = train(config.trainer, env);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_run_artifacts(args.out_dir, config, run, wall);
  if (run.aborted) {
    std::cerr << "training aborted after " << run.curve.size() << " steps: " << run.abort_reason
              << " (partial logs written)\n";
    return kExitData;
  }
  double final_ua = 0.0;
  if (!run.curve.empty()) final_ua = run.curve.back().ua;
  std::printf("trained %zu steps in %.2fs (final step ua %.3f) -> %s\n", run.curve.size(), wall,
              final_ua, args.out_dir.c_str());
  return kExitOk;
}

struct EvalArgs {
  std::string labels = "meld7";
  std::string in;
  std::string report_path;
};

int cmd_eval(const EvalArgs& args) {
  const LabelSet set = resolve_label_set(args.labels);
  ConfusionMatrix matrix(set);
  for (const json& record : read_jsonl(args.in)) {
    std::optional<std::string> pred;
    if (record.contains("pred") && !record.at("pred").is_null())
      pred = record.at("pred").get<std::string>();
    matrix.add(record.at("gold").get<std::string>(), pred);
  }
  const MetricsReport r = report(matrix);
  json per_class = json::array();
  for (const PerClassMetrics& pc : r.per_class) {
    per_class.push_back({{"label", pc.label},
                         {"gold_count", pc.gold_count},
                         {"predicted_count", pc.predicted_count},
                         {"precision", pc.precision},
                         {"recall", pc.recall},
                         {"f1", pc.f1}});
  }
  const json doc = {{"ua", r.ua},       {"wa", r.wa},           {"macro_f1", r.macro_f1},
                    {"n", r.n},         {"per_class", per_class}};
  atomic_write_file(args.report_path, doc.dump(2) + "\n");
  std::printf("n=%ld ua=%.4f wa=%.4f macro_f1=%.4f -> %s\n", r.n, r.ua, r.wa, r.macro_f1,
              args.report_path.c_str());
  return kExitOk;
}

struct CompareArgs {
  std::string baseline;
  std::vector<std::string> reports;  // name=path pairs
};

int cmd_compare(const CompareArgs& args) {
  std::map<std::string, MetricsReport> reports;
  for (const std::string& pair : args.reports) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw ConfigError("report argument must look like name=path: " + pair);
    const std::string name = pair.substr(0, eq);
    const json doc = read_json_file(pair.substr(eq + 1));
    MetricsReport r;
    r.ua = doc.at("ua").get<double>();
    r.wa = doc.at("wa").get<double>();
    r.macro_f1 = doc.at("macro_f1").get<double>();
    r.n = doc.value("n", 0L);
    reports[name] = r;
  }
  std::cout << format_comparison(compare_runs(reports, args.baseline));
  return kExitOk;
}

struct AblationArgs {
  std::string grid;
  std::string out_dir;
};

int cmd_ablation(const AblationArgs& args) {
  AblationGrid grid =
      args.grid.empty() ? default_ablation_grid() : ablation_grid_from_json(read_json_file(args.grid));
  std::optional<fs::path> out_dir;
  if (!args.out_dir.empty()) out_dir = fs::path(args.out_dir);
  const AblationResult result = run_ablation(grid, out_dir);
  std::cout << format_comparison(result.table);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"similarity-weighted reward shaping + group-relative policy optimization lab"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  MatrixArgs matrix_args;
  auto* matrix_cmd = app.add_subcommand("matrix", "emit the emotion similarity matrix as CSV");
  matrix_cmd->add_option("--labels", matrix_args.labels, "built-in set name or label-set JSON file")
      ->required();

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "score responses from a JSONL file");
  score_cmd->add_option("--pattern", score_args.pattern, "ir|eur|esr");
  score_cmd->add_option("--labels", score_args.labels, "label set name or file");
  score_cmd->add_option("--gamma", score_args.gamma, "similarity threshold");
  score_cmd->add_option("--alpha", score_args.alpha, "partial matching coefficient");
  score_cmd->add_option("--accuracy", score_args.accuracy, "eswr|bcr");
  score_cmd->add_flag("--gate-accuracy-on-format", score_args.gate_accuracy_on_format,
                      "grant accuracy reward only when the format is valid");
  score_cmd->add_option("--in", score_args.in, "input JSONL {id, response, gold}")->required();
  score_cmd->add_option("--out", score_args.out, "output JSONL path")->required();

  ValidateArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "check response format validity");
  validate_cmd->add_option("--pattern", validate_args.pattern, "ir|eur|esr");
  validate_cmd->add_option("--labels", validate_args.labels, "label set name or file");
  validate_cmd->add_option("--in", validate_args.in, "input JSONL {id, response}")->required();

  SimulateArgs simulate_args;
  auto* simulate_cmd = app.add_subcommand("simulate", "emit synthetic episodes as JSONL");
  simulate_cmd->add_option("--config", simulate_args.config, "env config JSON file")->required();
  simulate_cmd->add_option("--n", simulate_args.n, "number of episodes");
  simulate_cmd->add_option("--out", simulate_args.out, "output JSONL path")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "run one training configuration");
  train_cmd->add_option("--config", train_args.config, "run config JSON file")->required();
  train_cmd->add_option("--out-dir", train_args.out_dir, "output directory")->required();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "compute metrics from prediction records");
  eval_cmd->add_option("--labels", eval_args.labels, "label set name or file");
  eval_cmd->add_option("--in", eval_args.in, "input JSONL {gold, pred}")->required();
  eval_cmd->add_option("--report", eval_args.report_path, "output report JSON path")->required();

  CompareArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare", "rank run reports against a baseline");
  compare_cmd->add_option("--baseline", compare_args.baseline, "baseline run name")->required();
  compare_cmd->add_option("reports", compare_args.reports, "name=report.json pairs")
      ->expected(-1)
      ->required();

  AblationArgs ablation_args;
  auto* ablation_cmd =
      app.add_subcommand("ablation", "train a reward/reasoning variant grid and compare");
  ablation_cmd->add_option("--grid", ablation_args.grid, "grid JSON file (default built-in grid)");
  ablation_cmd->add_option("--out-dir", ablation_args.out_dir, "artifact directory (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (matrix_cmd->parsed()) return cmd_matrix(matrix_args);
    if (score_cmd->parsed()) return cmd_score(score_args);
    if (validate_cmd->parsed()) return cmd_validate(validate_args);
    if (simulate_cmd->parsed()) return cmd_simulate(simulate_args);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (compare_cmd->parsed()) return cmd_compare(compare_args);
    if (ablation_cmd->parsed()) return cmd_ablation(ablation_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
