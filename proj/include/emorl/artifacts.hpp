#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "emorl/grpo_core.hpp"
#include "emorl/run_config.hpp"

namespace emorl {

// Writes via a temp file in the target directory plus rename, so interrupted
// runs never leave truncated artifacts.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

// curve.csv contract: header `step,mean_reward,format_rate,accuracy,ua,kl,alpha`,
// one row per training step, shortest round-trip number formatting.
std::string curve_to_csv(const std::vector<StepLog>& curve);

nlohmann::json policy_to_json(const PolicyParams& policy);
PolicyParams policy_from_json(const nlohmann::json& doc);

// Writes curve.csv, final_policy.json and run_meta.json under out_dir.
void write_run_artifacts(const std::filesystem::path& out_dir, const RunConfig& config,
                         const TrainingRun& run, double wall_seconds);

}  // namespace emorl
