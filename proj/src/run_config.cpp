#include "emorl/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace emorl {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

AlphaSchedule alpha_schedule_from_json(const json& obj) {
  reject_unknown_keys(obj, {"kind", "value", "total_steps"}, "reward.alpha_schedule");
  std::string kind;
  read_field(obj, "kind", kind);
  if (kind == "constant") {
    double value = 1.0;
    read_field(obj, "value", value);
    if (value < 0.0 || value > 1.0) throw ConfigError("constant alpha must lie in [0, 1]");
    return AlphaSchedule::constant(value);
  }
  if (kind == "linear_decay") {
    long total_steps = 0;
    read_field(obj, "total_steps", total_steps);
    if (total_steps < 1) throw InvalidSchedule("linear decay needs total_steps >= 1");
    return AlphaSchedule::linear_decay(total_steps);
  }
  throw ConfigError("alpha_schedule.kind must be 'constant' or 'linear_decay'");
}

json alpha_schedule_to_json(const AlphaSchedule& s) {
  if (s.kind == AlphaSchedule::Kind::kConstant)
    return {{"kind", "constant"}, {"value", s.value}};
  return {{"kind", "linear_decay"}, {"total_steps", s.total_steps}};
}

RewardConfig reward_config_from_json(const json& obj, long default_total_steps) {
  reject_unknown_keys(obj, {"gamma", "accuracy_kind", "gate_accuracy_on_format", "alpha_schedule"},
                      "reward");
  RewardConfig out;
  out.alpha_schedule = AlphaSchedule::linear_decay(std::max(1L, default_total_steps));
  read_field(obj, "gamma", out.gamma);
  if (out.gamma < 0.0 || out.gamma >= 1.0) throw ConfigError("gamma must lie in [0, 1)");
  if (obj.contains("accuracy_kind")) {
    const auto kind = accuracy_kind_from_name(obj.at("accuracy_kind").get<std::string>());
    if (!kind) throw ConfigError("accuracy_kind must be 'eswr' or 'bcr'");
    out.accuracy_kind = *kind;
  }
  read_field(obj, "gate_accuracy_on_format", out.gate_accuracy_on_format);
  if (obj.contains("alpha_schedule"))
    out.alpha_schedule = alpha_schedule_from_json(obj.at("alpha_schedule"));
  return out;
}

}  // namespace

EnvConfig env_config_from_json(const json& doc) {
  reject_unknown_keys(
      doc, {"label_set", "feature_dim", "noise_sigma", "ambiguity_rate", "wheel_coupling", "seed"},
      "env");
  EnvConfig out;
  read_field(doc, "label_set", out.label_set);
  read_field(doc, "feature_dim", out.feature_dim);
  read_field(doc, "noise_sigma", out.noise_sigma);
  read_field(doc, "ambiguity_rate", out.ambiguity_rate);
  read_field(doc, "wheel_coupling", out.wheel_coupling);
  read_field(doc, "seed", out.seed);
  return out;
}

json env_config_to_json(const EnvConfig& config) {
  return {{"label_set", config.label_set},
          {"feature_dim", config.feature_dim},
          {"noise_sigma", config.noise_sigma},
          {"ambiguity_rate", config.ambiguity_rate},
          {"wheel_coupling", config.wheel_coupling},
          {"seed", config.seed}};
}

RunConfig default_run_config() {
  RunConfig config;
  config.trainer.reward.alpha_schedule = AlphaSchedule::linear_decay(config.trainer.steps);
  config.env.seed = derived_env_seed(config.trainer.seed);
  return config;
}

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
  reject_unknown_keys(doc, {"trainer", "env", "reward", "pattern"}, "run config");
  RunConfig out;

  if (doc.contains("trainer")) {
    const json& t = doc.at("trainer");
    reject_unknown_keys(t,
                        {"group_size", "steps", "learning_rate", "kl_coefficient", "clip_epsilon",
                         "temperature", "inner_epochs", "seed"},
                        "trainer");
    read_field(t, "group_size", out.trainer.group_size);
    read_field(t, "steps", out.trainer.steps);
    read_field(t, "learning_rate", out.trainer.learning_rate);
    read_field(t, "kl_coefficient", out.trainer.kl_coefficient);
    read_field(t, "clip_epsilon", out.trainer.clip_epsilon);
    read_field(t, "temperature", out.trainer.temperature);
    read_field(t, "inner_epochs", out.trainer.inner_epochs);
    read_field(t, "seed", out.trainer.seed);
  }

  out.trainer.reward.alpha_schedule = AlphaSchedule::linear_decay(std::max(1L, out.trainer.steps));
  if (doc.contains("reward"))
    out.trainer.reward = reward_config_from_json(doc.at("reward"), out.trainer.steps);

  if (doc.contains("pattern")) {
    const auto p = pattern_from_name(doc.at("pattern").get<std::string>());
    if (!p) throw ConfigError("pattern must be 'ir', 'eur' or 'esr'");
    out.trainer.pattern = *p;
  }

  out.env.seed = derived_env_seed(out.trainer.seed);
  if (doc.contains("env")) {
    const json& e = doc.at("env");
    out.env_seed_explicit = e.contains("seed");
    EnvConfig parsed = env_config_from_json(e);
    if (!out.env_seed_explicit) parsed.seed = derived_env_seed(out.trainer.seed);
    out.env = parsed;
  }

  validate(out.trainer);
  return out;
}

json run_config_to_json(const RunConfig& config) {
  return {{"trainer",
           {{"group_size", config.trainer.group_size},
            {"steps", config.trainer.steps},
            {"learning_rate", config.trainer.learning_rate},
            {"kl_coefficient", config.trainer.kl_coefficient},
            {"clip_epsilon", config.trainer.clip_epsilon},
            {"temperature", config.trainer.temperature},
            {"inner_epochs", config.trainer.inner_epochs},
            {"seed", config.trainer.seed}}},
          {"env", env_config_to_json(config.env)},
          {"reward",
           {{"gamma", config.trainer.reward.gamma},
            {"accuracy_kind", std::string(accuracy_kind_name(config.trainer.reward.accuracy_kind))},
            {"gate_accuracy_on_format", config.trainer.reward.gate_accuracy_on_format},
            {"alpha_schedule", alpha_schedule_to_json(config.trainer.reward.alpha_schedule)}}},
          {"pattern", std::string(pattern_name(config.trainer.pattern))}};
}

std::uint64_t derived_env_seed(std::uint64_t master_seed) {
  return Rng(master_seed).split(0xE07ULL).seed();
}

void apply_seed_override(RunConfig& config, std::optional<std::uint64_t> seed) {
  if (!seed) return;
  config.trainer.seed = *seed;
  config.env.seed = derived_env_seed(*seed);
  config.env_seed_explicit = false;
}

std::optional<std::uint64_t> seed_override_from_environment() {
  const char* value = std::getenv("EMO_RL_SEED");
  if (value == nullptr || *value == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(value, &end, 10);
  if (end == nullptr || *end != '\0') throw ConfigError("EMO_RL_SEED must be an unsigned integer");
  return static_cast<std::uint64_t>(parsed);
}

LabelSet label_set_from_json(const json& doc) {
  reject_unknown_keys(doc, {"labels", "neutral", "angles"}, "label set");
  if (!doc.contains("labels") || !doc.at("labels").is_array())
    throw ConfigError("label set document needs a 'labels' array");
  std::string neutral;
  read_field(doc, "neutral", neutral);

  std::vector<EmotionLabel> labels;
  for (const json& item : doc.at("labels")) {
    std::string name = item.get<std::string>();
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    labels.push_back(EmotionLabel{name, name == neutral});
  }
  if (!neutral.empty() &&
      std::none_of(labels.begin(), labels.end(), [&](const auto& l) { return l.is_neutral; }))
    throw ConfigError("neutral label '" + neutral + "' is not in the labels array");

  std::map<std::string, double> angles;
  if (doc.contains("angles")) {
    for (const auto& [name, angle] : doc.at("angles").items()) {
      angles[name] = angle.get<double>();
    }
  }
  for (const EmotionLabel& l : labels) {
    if (l.is_neutral || angles.count(l.name)) continue;
    if (const auto canonical = canonical_wheel_angle(l.name)) {
      angles[l.name] = *canonical;
    } else {
      throw ConfigError("label '" + l.name + "' needs an explicit wheel angle");
    }
  }
  return LabelSet(std::move(labels), std::move(angles));
}

LabelSet resolve_label_set(const std::string& name_or_path) {
  const auto& builtin = default_label_sets();
  if (const auto it = builtin.find(name_or_path); it != builtin.end()) return it->second;
  if (!std::filesystem::exists(name_or_path))
    throw ConfigError("unknown label set '" + name_or_path +
                      "' (not a built-in name or an existing file)");
  std::ifstream in(name_or_path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("could not parse label set file '" + name_or_path + "': " + e.what());
  }
  return label_set_from_json(doc);
}

Environment make_environment(const EnvConfig& config) {
  return Environment(config, resolve_label_set(config.label_set));
}

}  // namespace emorl
