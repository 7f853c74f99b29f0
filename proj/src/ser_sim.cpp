#include "emorl/ser_sim.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace emorl {

namespace {

constexpr double kMaxPrototypeDot = 0.3;
constexpr int kMaxPrototypeDraws = 10000;

Eigen::VectorXd random_unit_vector(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v / v.norm();
}

std::string fmt3(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", x);
  return buf;
}

}  // namespace

std::string_view format_variant_name(FormatVariant variant) {
  switch (variant) {
    case FormatVariant::kValid: return "valid";
    case FormatVariant::kMissingThink: return "missing_think";
    case FormatVariant::kMissingAnswer: return "missing_answer";
    case FormatVariant::kWrongOrder: return "wrong_order";
  }
  return "?";
}

Environment::Environment(EnvConfig config, LabelSet set)
    : config_(std::move(config)), set_(std::move(set)) {
  const int c = set_.size();
  if (config_.feature_dim < c)
    throw ConfigError("feature_dim must be at least the number of labels");
  if (config_.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  if (config_.ambiguity_rate < 0.0 || config_.ambiguity_rate > 1.0)
    throw ConfigError("ambiguity_rate must lie in [0, 1]");

  // Wheel adjacency between non-neutral in-set labels (45 degrees apart).
  adjacency_.assign(static_cast<std::size_t>(c), {});
  for (int i = 0; i < c; ++i) {
    if (set_.label(i).is_neutral || !set_.has_placement(i)) continue;
    for (int j = 0; j < c; ++j) {
      if (j == i || set_.label(j).is_neutral || !set_.has_placement(j)) continue;
      const double angle = plutchik_angle(set_.label(i), set_.label(j), set_);
      if (std::fabs(angle - 45.0) < 1e-9) adjacency_[static_cast<std::size_t>(i)].push_back(j);
    }
    if (!adjacency_[static_cast<std::size_t>(i)].empty()) eligible_.push_back(i);
  }
  if (config_.ambiguity_rate > 0.0 && eligible_.empty())
    throw ConfigError("ambiguity_rate > 0 but label set '" + config_.label_set +
                      "' has no wheel-adjacent non-neutral pair");
  if (config_.wheel_coupling < 0.0 || config_.wheel_coupling > 0.4)
    throw ConfigError("wheel_coupling must lie in [0, 0.4] to keep pairwise dots below 0.3");

  // Unit prototypes, deterministic in the seed: an independent pseudo-random
  // part blended with a shared 2-D wheel plane, so dot(proto_i, proto_j) ~
  // coupling * cos(angle difference). Random parts are kept off the wheel
  // plane and nearly mutually orthogonal; all pairwise dots stay below 0.3.
  Rng proto_rng = Rng(config_.seed).split(RngStream::kPrototypes);
  const int dim = config_.feature_dim;
  Eigen::VectorXd axis1 = random_unit_vector(proto_rng, dim);
  Eigen::VectorXd axis2 = random_unit_vector(proto_rng, dim);
  axis2 -= axis2.dot(axis1) * axis1;
  axis2.normalize();
  const double coupling = config_.wheel_coupling;
  constexpr double kMaxRandomDot = 0.15;

  std::vector<Eigen::VectorXd> random_parts;
  prototypes_.reserve(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) {
    Eigen::VectorXd wheel_part = Eigen::VectorXd::Zero(dim);
    double wheel_scale = 0.0;
    if (set_.has_placement(i)) {
      const double theta = set_.placement_angle(i) * M_PI / 180.0;
      wheel_part = std::cos(theta) * axis1 + std::sin(theta) * axis2;
      wheel_scale = std::sqrt(coupling);
    }
    const double rand_scale = set_.has_placement(i) ? std::sqrt(1.0 - coupling) : 1.0;
    int attempts = 0;
    for (;;) {
      Eigen::VectorXd r = random_unit_vector(proto_rng, dim);
      r -= r.dot(axis1) * axis1;
      r -= r.dot(axis2) * axis2;
      if (r.norm() < 1e-9) continue;
      r.normalize();
      bool ok = true;
      for (const Eigen::VectorXd& prev : random_parts) {
        if (std::fabs(r.dot(prev)) >= kMaxRandomDot) {
          ok = false;
          break;
        }
      }
      Eigen::VectorXd v;
      if (ok) {
        v = rand_scale * r + wheel_scale * wheel_part;
        v.normalize();
        for (const Eigen::VectorXd& p : prototypes_) {
          if (v.dot(p) >= kMaxPrototypeDot) {
            ok = false;
            break;
          }
        }
      }
      if (ok) {
        random_parts.push_back(std::move(r));
        prototypes_.push_back(std::move(v));
        break;
      }
      if (++attempts >= kMaxPrototypeDraws)
        throw ConfigError("could not place prototypes under the dot-product cap; raise feature_dim");
    }
  }
}

ActionTemplate Environment::action(int index) const {
  const int c = set_.size();
  if (index < 0 || index >= action_count()) throw ConfigError("action index out of range");
  return ActionTemplate{static_cast<FormatVariant>(index / c), index % c};
}

int Environment::action_index(FormatVariant variant, int label_index) const {
  const int c = set_.size();
  if (label_index < 0 || label_index >= c) throw ConfigError("label index out of range");
  return static_cast<int>(variant) * c + label_index;
}

const std::vector<int>& Environment::adjacent_neighbors(int label_index) const {
  return adjacency_.at(static_cast<std::size_t>(label_index));
}

SyntheticEpisode Environment::episode_at(std::uint64_t index) const {
  Rng rng = Rng(config_.seed).split(RngStream::kEpisodes).split(index);
  SyntheticEpisode ep;
  const bool ambiguous = !eligible_.empty() && rng.uniform() < config_.ambiguity_rate;
  Eigen::VectorXd base;
  if (ambiguous) {
    const int gold = eligible_[static_cast<std::size_t>(rng.uniform_int(
        static_cast<int>(eligible_.size())))];
    const auto& nbrs = adjacency_[static_cast<std::size_t>(gold)];
    const int neighbor = nbrs[static_cast<std::size_t>(rng.uniform_int(
        static_cast<int>(nbrs.size())))];
    ep.gold_index = gold;
    ep.neighbor = set_.label(neighbor);
    base = 0.5 * (prototypes_[static_cast<std::size_t>(gold)] +
                  prototypes_[static_cast<std::size_t>(neighbor)]);
  } else {
    ep.gold_index = rng.uniform_int(set_.size());
    base = prototypes_[static_cast<std::size_t>(ep.gold_index)];
  }
  ep.ambiguous = ambiguous;
  ep.gold = set_.label(ep.gold_index);
  ep.features.resize(config_.feature_dim);
  for (int i = 0; i < config_.feature_dim; ++i) {
    ep.features[i] = base[i] + config_.noise_sigma * rng.normal();
  }
  return ep;
}

Eigen::VectorXd Environment::featurize(const SyntheticEpisode& episode) const {
  Eigen::VectorXd state(episode.features.size() + 1);
  state.head(episode.features.size()) = episode.features;
  const char* bias_env = std::getenv("EMORL_BIAS_HACK");
  state[episode.features.size()] = bias_env ? std::atof(bias_env) : 1.0;
  return state;
}

const Eigen::VectorXd& Environment::prototype(int label_index) const {
  return prototypes_.at(static_cast<std::size_t>(label_index));
}

std::string Environment::render_response(const ActionTemplate& action, ReasoningPattern pattern,
                                         const SyntheticEpisode& episode) const {
  const std::string answer = set_.label(action.label_index).name;
  const double f0 = episode.features[0];
  const double f1 = episode.features.size() > 1 ? episode.features[1] : 0.0;
  const double energy = episode.features.norm();

  const std::string answer_block = "<answer>" + answer + "</answer>";
  const std::string eur_think =
      "<think>acoustic profile with energy " + fmt3(energy) + " and lead component " + fmt3(f0) +
      " points to one dominant emotion</think>";
  const std::string esr_sections =
      "<transcript>synthetic utterance, signature " + fmt3(f0) + " " + fmt3(f1) +
      "</transcript><keywords>salient cue " + fmt3(f0) + "</keywords><acoustic>pitch proxy " +
      fmt3(f1) + ", energy " + fmt3(energy) +
      "</acoustic><integration>textual and acoustic evidence combined</integration>";
  const std::string esr_sections_swapped =
      "<keywords>salient cue " + fmt3(f0) + "</keywords><transcript>synthetic utterance, signature " +
      fmt3(f0) + " " + fmt3(f1) + "</transcript><acoustic>pitch proxy " + fmt3(f1) + ", energy " +
      fmt3(energy) + "</acoustic><integration>textual and acoustic evidence combined</integration>";

  switch (pattern) {
    case ReasoningPattern::kIr:
      switch (action.variant) {
        case FormatVariant::kValid: return answer_block;
        case FormatVariant::kMissingThink: return eur_think + answer_block;
        case FormatVariant::kMissingAnswer: return answer;
        case FormatVariant::kWrongOrder: return "</answer>" + answer + "<answer>";
      }
      break;
    case ReasoningPattern::kEur:
      switch (action.variant) {
        case FormatVariant::kValid: return eur_think + answer_block;
        case FormatVariant::kMissingThink: return answer_block;
        case FormatVariant::kMissingAnswer: return eur_think;
        case FormatVariant::kWrongOrder: return answer_block + eur_think;
      }
      break;
    case ReasoningPattern::kEsr:
      switch (action.variant) {
        case FormatVariant::kValid: return "<think>" + esr_sections + "</think>" + answer_block;
        case FormatVariant::kMissingThink: return answer_block;
        case FormatVariant::kMissingAnswer: return "<think>" + esr_sections + "</think>";
        case FormatVariant::kWrongOrder:
          return "<think>" + esr_sections_swapped + "</think>" + answer_block;
      }
      break;
  }
  throw Error("unreachable render variant");
}

}  // namespace emorl
