#include "emorl/ablation.hpp"

#include <algorithm>
#include <chrono>

#include "emorl/artifacts.hpp"

namespace emorl {

namespace {

using nlohmann::json;

Eigen::Index argmax(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return best;
}

}  // namespace

MetricsReport evaluate_policy(const PolicyParams& policy, const Environment& env,
                              ReasoningPattern pattern, int episodes,
                              std::uint64_t episode_offset, double temperature) {
  if (episodes < 1) throw ConfigError("evaluation needs at least 1 episode");
  ConfusionMatrix matrix(env.label_set());
  for (int i = 0; i < episodes; ++i) {
    const SyntheticEpisode episode = env.episode_at(episode_offset + static_cast<std::uint64_t>(i));
    const Eigen::VectorXd state = env.featurize(episode);
    const Eigen::VectorXd logp = action_log_probs(policy, state, temperature);
    const int action = static_cast<int>(argmax(logp));
    const std::string text = env.render_response(env.action(action), pattern, episode);
    const ParsedResponse parsed = parse_response(text, pattern, env.label_set());
    std::optional<int> pred;
    if (parsed.answer) pred = env.label_set().index_of(parsed.answer->name);
    matrix.add_indexed(episode.gold_index, pred);
  }
  return report(matrix);
}

AblationGrid default_ablation_grid() {
  AblationGrid grid;
  grid.base = default_run_config();
  grid.base.env.ambiguity_rate = 0.3;
  for (AccuracyKind kind : {AccuracyKind::kBcr, AccuracyKind::kEswr}) {
    for (ReasoningPattern pattern :
         {ReasoningPattern::kIr, ReasoningPattern::kEur, ReasoningPattern::kEsr}) {
      VariantSpec spec;
      spec.name = std::string(accuracy_kind_name(kind)) + "_" + std::string(pattern_name(pattern));
      spec.accuracy_kind = kind;
      spec.pattern = pattern;
      grid.variants.push_back(std::move(spec));
    }
  }
  grid.seeds = {1, 2, 3, 4, 5};
  grid.baseline = "bcr_ir";
  grid.eval_episodes = 400;
  return grid;
}

AblationGrid ablation_grid_from_json(const json& doc) {
  AblationGrid grid = default_ablation_grid();
  if (!doc.is_object()) throw ConfigError("ablation grid must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "run" && key != "variants" && key != "seeds" && key != "baseline" &&
        key != "eval_episodes")
      throw ConfigError("unknown key '" + key + "' in ablation grid");
  }
  if (doc.contains("run")) grid.base = run_config_from_json(doc.at("run"));
  if (doc.contains("variants")) {
    grid.variants.clear();
    for (const json& v : doc.at("variants")) {
      VariantSpec spec;
      spec.name = v.at("name").get<std::string>();
      const auto kind = accuracy_kind_from_name(v.value("accuracy_kind", "eswr"));
      if (!kind) throw ConfigError("variant accuracy_kind must be 'eswr' or 'bcr'");
      spec.accuracy_kind = *kind;
      const auto pattern = pattern_from_name(v.value("pattern", "esr"));
      if (!pattern) throw ConfigError("variant pattern must be 'ir', 'eur' or 'esr'");
      spec.pattern = *pattern;
      grid.variants.push_back(std::move(spec));
    }
  }
  if (doc.contains("seeds")) grid.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  if (doc.contains("baseline")) grid.baseline = doc.at("baseline").get<std::string>();
  if (doc.contains("eval_episodes")) grid.eval_episodes = doc.at("eval_episodes").get<int>();
  if (grid.variants.empty()) throw ConfigError("ablation grid lists no variants");
  if (grid.seeds.empty()) throw ConfigError("ablation grid lists no seeds");
  return grid;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ConfigError("median of empty vector");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AblationResult run_ablation(const AblationGrid& grid,
                            const std::optional<std::filesystem::path>& out_dir) {
  if (grid.variants.empty()) throw ConfigError("ablation grid lists no variants");
  if (grid.seeds.empty()) throw ConfigError("ablation grid lists no seeds");

  AblationResult result;
  for (const VariantSpec& spec : grid.variants) {
    VariantResult vr;
    vr.spec = spec;
    for (const std::uint64_t seed : grid.seeds) {
      RunConfig config = grid.base;
      config.trainer.reward.accuracy_kind = spec.accuracy_kind;
      config.trainer.pattern = spec.pattern;
      apply_seed_override(config, seed);

      const Environment env = make_environment(config.env);
      const auto t0 = std::chrono::steady_clock::now();
      const TrainingRun run = train(config.trainer, env);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const MetricsReport eval =
          evaluate_policy(run.final_policy, env, spec.pattern, grid.eval_episodes);
      if (out_dir) {
        const auto run_dir = *out_dir / spec.name / ("seed" + std::to_string(seed));
        write_run_artifacts(run_dir, config, run, wall);
        json report_doc = {{"ua", eval.ua}, {"wa", eval.wa}, {"macro_f1", eval.macro_f1},
                           {"n", eval.n}};
        atomic_write_file(run_dir / "eval_report.json", report_doc.dump(2) + "\n");
      }
      vr.per_seed.push_back(eval);
    }
    std::vector<double> uas, was, f1s;
    for (const MetricsReport& r : vr.per_seed) {
      uas.push_back(r.ua);
      was.push_back(r.wa);
      f1s.push_back(r.macro_f1);
    }
    vr.median.ua = median(uas);
    vr.median.wa = median(was);
    vr.median.macro_f1 = median(f1s);
    vr.median.n = grid.eval_episodes;
    result.variants.push_back(std::move(vr));
  }

  std::map<std::string, MetricsReport> medians;
  for (const VariantResult& vr : result.variants) medians[vr.spec.name] = vr.median;
  result.table = compare_runs(medians, grid.baseline);

  if (out_dir) {
    atomic_write_file(*out_dir / "ablation_table.csv", comparison_to_csv(result.table));
    json doc = json::array();
    for (const VariantResult& vr : result.variants) {
      json per_seed = json::array();
      for (std::size_t i = 0; i < vr.per_seed.size(); ++i) {
        per_seed.push_back({{"seed", grid.seeds[i]},
                            {"ua", vr.per_seed[i].ua},
                            {"wa", vr.per_seed[i].wa},
                            {"macro_f1", vr.per_seed[i].macro_f1}});
      }
      doc.push_back({{"variant", vr.spec.name},
                     {"median_ua", vr.median.ua},
                     {"median_wa", vr.median.wa},
                     {"median_f1", vr.median.macro_f1},
                     {"per_seed", std::move(per_seed)}});
    }
    atomic_write_file(*out_dir / "ablation_results.json", doc.dump(2) + "\n");
  }
  return result;
}

}  // namespace emorl
