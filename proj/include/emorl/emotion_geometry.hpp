#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emorl/errors.hpp"

namespace emorl {

// Categorical emotion. Names are lowercase identifiers, unique within a set.
struct EmotionLabel {
  std::string name;
  bool is_neutral = false;

  friend bool operator==(const EmotionLabel&, const EmotionLabel&) = default;
};

// Position of a non-neutral label on the wheel, degrees in [0, 360).
struct WheelPlacement {
  EmotionLabel label;
  double angle_deg = 0.0;
};

// Ordered label inventory plus wheel placements. The ordering is fixed and
// total: index i <-> label i everywhere (matrices, confusion counts, actions).
class LabelSet {
 public:
  // `angles` maps non-neutral label names to wheel degrees. Labels without an
  // entry are allowed at construction; angle queries on them throw
  // MissingPlacement. Throws ConfigError on malformed inventories (empty or
  // non-lowercase names, duplicates, fewer than 2 labels, more than one
  // neutral, angle outside [0, 360), angle given for the neutral label).
  LabelSet(std::vector<EmotionLabel> labels, std::map<std::string, double> angles);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<EmotionLabel>& labels() const { return labels_; }
  const EmotionLabel& label(int index) const { return labels_.at(static_cast<std::size_t>(index)); }

  // Exact name lookup.
  std::optional<int> index_of(std::string_view name) const;
  // Trimmed, case-insensitive lookup; how generated answer text is matched.
  std::optional<int> match_label(std::string_view text) const;

  std::optional<int> neutral_index() const { return neutral_index_; }
  bool has_placement(int index) const;
  // Wheel angle of a non-neutral label. Throws NeutralAngleQuery /
  // MissingPlacement.
  double placement_angle(int index) const;
  std::optional<WheelPlacement> placement(int index) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<EmotionLabel> labels_;
  std::map<std::string, double> angles_;
  std::optional<int> neutral_index_;
};

// C x C similarity grid over a label set. Symmetric, unit diagonal, entries
// in [0, 1]; off-diagonal entries involving neutral are exactly 1/2.
class TransitionMatrix {
 public:
  TransitionMatrix(LabelSet set, std::vector<double> values);

  const LabelSet& label_set() const { return set_; }
  int size() const { return set_.size(); }

  double at(int i, int j) const;
  // Name-based access; throws LabelNotInSet for names outside the set.
  double at(const EmotionLabel& a, const EmotionLabel& b) const;

 private:
  LabelSet set_;
  std::vector<double> values_;  // row-major C x C
};

// Minor-arc angle between two non-neutral labels, folded into [0, 180].
// Throws NeutralAngleQuery if either label is neutral, MissingPlacement if
// either has no wheel position in `set`.
double plutchik_angle(const EmotionLabel& a, const EmotionLabel& b, const LabelSet& set);

// Builds the similarity matrix:
//   S[i][i] = 1 for all i (exact match wins, neutral included),
//   S[i][j] = 1/2 when label i or label j is neutral,
//   S[i][j] = (cos(plutchik_angle(i, j)) + 1) / 2 otherwise.
TransitionMatrix build_transition_matrix(const LabelSet& set);

// Canonical eight-sector wheel: joy 0, trust 45, fear 90, surprise 135,
// sadness 180, disgust 225, anger 270, anticipation 315. Common dataset
// synonyms (happy, angry, sad, ...) resolve to their canonical sector.
std::optional<double> canonical_wheel_angle(std::string_view name);

// Built-in inventories: "meld7" (anger, disgust, fear, joy, neutral,
// sadness, surprise) and "iemocap4" (angry, happy, neutral, sad).
const std::map<std::string, LabelSet>& default_label_sets();

// Matrix as CSV with a header row/column of label names, 6 decimal places.
std::string transition_matrix_to_csv(const TransitionMatrix& matrix);

}  // namespace emorl
