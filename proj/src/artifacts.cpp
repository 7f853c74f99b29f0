#include "emorl/artifacts.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

namespace emorl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Shortest decimal string that round-trips the double.
std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

void atomic_write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("could not parse '" + path.string() + "': " + e.what());
  }
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error("bad JSONL record at " + path.string() + ":" + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<json>& records) {
  std::string content;
  for (const json& r : records) {
    content += r.dump();
    content += '\n';
  }
  atomic_write_file(path, content);
}

std::string curve_to_csv(const std::vector<StepLog>& curve) {
  std::string out = "step,mean_reward,format_rate,accuracy,ua,kl,alpha\n";
  for (const StepLog& s : curve) {
    out += std::to_string(s.step);
    out += ',';
    out += shortest(s.mean_reward);
    out += ',';
    out += shortest(s.format_rate);
    out += ',';
    out += shortest(s.accuracy);
    out += ',';
    out += shortest(s.ua);
    out += ',';
    out += shortest(s.kl);
    out += ',';
    out += shortest(s.alpha);
    out += '\n';
  }
  return out;
}

json policy_to_json(const PolicyParams& policy) {
  json weights = json::array();
  for (int r = 0; r < policy.state_dim(); ++r) {
    json row = json::array();
    for (int c = 0; c < policy.action_count(); ++c) row.push_back(policy.weights(r, c));
    weights.push_back(std::move(row));
  }
  return {{"state_dim", policy.state_dim()},
          {"action_count", policy.action_count()},
          {"label_set", policy.label_set_name},
          {"variant_count", policy.variant_count},
          {"weights", std::move(weights)}};
}

PolicyParams policy_from_json(const json& doc) {
  PolicyParams policy;
  const int rows = doc.at("state_dim").get<int>();
  const int cols = doc.at("action_count").get<int>();
  policy.label_set_name = doc.value("label_set", std::string{});
  policy.variant_count = doc.value("variant_count", kFormatVariantCount);
  policy.weights.resize(rows, cols);
  const json& weights = doc.at("weights");
  if (static_cast<int>(weights.size()) != rows) throw ConfigError("policy weights row mismatch");
  for (int r = 0; r < rows; ++r) {
    const json& row = weights.at(static_cast<std::size_t>(r));
    if (static_cast<int>(row.size()) != cols) throw ConfigError("policy weights column mismatch");
    for (int c = 0; c < cols; ++c) policy.weights(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return policy;
}

void write_run_artifacts(const fs::path& out_dir, const RunConfig& config, const TrainingRun& run,
                         double wall_seconds) {
  fs::create_directories(out_dir);
  atomic_write_file(out_dir / "curve.csv", curve_to_csv(run.curve));
  atomic_write_file(out_dir / "final_policy.json", policy_to_json(run.final_policy).dump(2) + "\n");
  json meta = {{"config", run_config_to_json(config)},
               {"seed", config.trainer.seed},
               {"wall_seconds", wall_seconds},
               {"steps_completed", run.curve.size()},
               {"aborted", run.aborted}};
  if (run.aborted) meta["abort_reason"] = run.abort_reason;
  atomic_write_file(out_dir / "run_meta.json", meta.dump(2) + "\n");
}

}  // namespace emorl
