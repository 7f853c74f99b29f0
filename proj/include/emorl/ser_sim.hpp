#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emorl/emotion_geometry.hpp"
#include "emorl/reward_engine.hpp"
#include "emorl/rng.hpp"

namespace emorl {

struct EnvConfig {
  std::string label_set = "meld7";
  int feature_dim = 16;        // must be >= C
  double noise_sigma = 0.2;    // per-component feature noise
  double ambiguity_rate = 0.0; // probability of a boundary episode
  // Fraction of prototype energy aligned with a shared 2-D wheel plane, so
  // wheel-adjacent emotions have correlated signals (dot ~ 0.7 * coupling)
  // and opposite-valence emotions anti-correlated ones. 0 gives fully
  // independent prototypes.
  double wheel_coupling = 0.35;
  std::uint64_t seed = 0;
};

// One synthetic utterance: a feature vector standing in for the audio+prompt
// input, its gold label, and whether it was drawn on an ambiguous boundary
// between two wheel-adjacent emotions.
struct SyntheticEpisode {
  Eigen::VectorXd features;
  EmotionLabel gold;
  int gold_index = -1;
  bool ambiguous = false;
  std::optional<EmotionLabel> neighbor;  // the adjacent emotion blended in
};

// How a response can deviate from its grammar. kValid renders a conforming
// response; the other three each break the grammar in one characteristic way.
// For IR, whose grammar forbids a think block, kMissingThink renders a stray
// think block instead (the think-related violation IR admits).
enum class FormatVariant { kValid, kMissingThink, kMissingAnswer, kWrongOrder };

inline constexpr int kFormatVariantCount = 4;

std::string_view format_variant_name(FormatVariant variant);

// Action index <-> (format variant, emotion label). Index mapping is
// bijective: index = variant * C + label_index.
struct ActionTemplate {
  FormatVariant variant = FormatVariant::kValid;
  int label_index = 0;
};

// Deterministic episode source plus the fixed action-template table.
// episode_at(i) is a pure function of (config, seed, i), so generation can
// run in parallel and identical configs replay identical data.
class Environment {
 public:
  // Validates the config. Throws ConfigError when feature_dim < C, rates or
  // sigma are out of range, or ambiguity_rate > 0 on a label set with no
  // wheel-adjacent non-neutral pair (no boundary exists to sample).
  Environment(EnvConfig config, LabelSet set);

  const EnvConfig& config() const { return config_; }
  const LabelSet& label_set() const { return set_; }

  int action_count() const { return kFormatVariantCount * set_.size(); }
  ActionTemplate action(int index) const;
  int action_index(FormatVariant variant, int label_index) const;

  SyntheticEpisode episode_at(std::uint64_t index) const;

  // Feature vector with a trailing constant bias component; the policy input.
  Eigen::VectorXd featurize(const SyntheticEpisode& episode) const;

  // Fixed near-orthogonal unit prototype for a label.
  const Eigen::VectorXd& prototype(int label_index) const;

  // Renders an action into response text for a pattern. The kValid variant
  // conforms to the grammar; the others violate it in their named way. Text
  // content is a deterministic function of the episode features.
  std::string render_response(const ActionTemplate& action, ReasoningPattern pattern,
                              const SyntheticEpisode& episode) const;

  // Labels eligible as ambiguous golds (non-neutral with an in-set adjacent
  // non-neutral neighbor at 45 degrees).
  const std::vector<int>& ambiguity_eligible() const { return eligible_; }
  const std::vector<int>& adjacent_neighbors(int label_index) const;

 private:
  EnvConfig config_;
  LabelSet set_;
  std::vector<Eigen::VectorXd> prototypes_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> eligible_;
};

}  // namespace emorl
