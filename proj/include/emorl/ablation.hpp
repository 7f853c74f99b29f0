#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "emorl/metrics_eval.hpp"
#include "emorl/run_config.hpp"

namespace emorl {

// Episode indices at and above this offset are reserved for evaluation;
// training consumes indices [0, steps).
inline constexpr std::uint64_t kEvalEpisodeOffset = std::uint64_t{1} << 40;

// Greedy-decode evaluation: for each held-out episode take the most probable
// action, render it, parse it, and score the extracted answer.
MetricsReport evaluate_policy(const PolicyParams& policy, const Environment& env,
                              ReasoningPattern pattern, int episodes,
                              std::uint64_t episode_offset = kEvalEpisodeOffset,
                              double temperature = 1.0);

struct VariantSpec {
  std::string name;
  AccuracyKind accuracy_kind = AccuracyKind::kEswr;
  ReasoningPattern pattern = ReasoningPattern::kEsr;
};

// Grid of reward/reasoning variants trained with a shared seed list and
// evaluated on a shared held-out batch per seed.
struct AblationGrid {
  RunConfig base;
  std::vector<VariantSpec> variants;
  std::vector<std::uint64_t> seeds;
  std::string baseline;
  int eval_episodes = 400;
};

// The six-variant {bcr, eswr} x {ir, eur, esr} grid over seeds 1..5 with the
// bcr_ir baseline.
AblationGrid default_ablation_grid();

// Schema: {"run": <run config>, "variants": [{"name", "accuracy_kind",
// "pattern"}, ...], "seeds": [..], "baseline": "...", "eval_episodes": n}.
// Missing sections fall back to the default grid's values.
AblationGrid ablation_grid_from_json(const nlohmann::json& doc);

struct VariantResult {
  VariantSpec spec;
  std::vector<MetricsReport> per_seed;  // aligned with grid.seeds
  MetricsReport median;                 // per-metric median over seeds
};

struct AblationResult {
  std::vector<VariantResult> variants;
  ComparisonTable table;  // medians versus the baseline
};

// Runs every (variant, seed) pair. When out_dir is given, writes per-run
// artifacts under out_dir/<variant>/seed<k>/ plus ablation_table.csv and
// ablation_results.json at the top.
AblationResult run_ablation(const AblationGrid& grid,
                            const std::optional<std::filesystem::path>& out_dir);

double median(std::vector<double> values);

}  // namespace emorl
