#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "emorl/emotion_geometry.hpp"
#include "emorl/errors.hpp"

namespace emorl {

// The three response grammars.
//   IR : the whole response is <answer>LABEL</answer>.
//   EUR: <think>FREE_TEXT</think> followed by <answer>LABEL</answer>.
//   ESR: the think block holds, in order, <transcript> <keywords> <acoustic>
//        <integration> sections, then the answer block.
// Whitespace around and between structural tags is tolerated; anything else
// outside the tags invalidates the response (whole-string matching).
enum class ReasoningPattern { kIr, kEur, kEsr };

// ESR section tag names, in required order. Kept in one table so renaming is
// a one-line change.
inline constexpr std::array<std::string_view, 4> kEsrSectionTags = {
    "transcript", "keywords", "acoustic", "integration"};

std::string_view pattern_name(ReasoningPattern pattern);
std::optional<ReasoningPattern> pattern_from_name(std::string_view name);

// A response decomposed against one grammar. When the grammar does not match,
// `answer` may still be recovered by scanning for the last <answer> span so
// metrics can score malformed outputs; such responses earn no format reward.
struct ParsedResponse {
  std::string raw;
  bool format_valid = false;
  std::optional<EmotionLabel> answer;
  std::map<std::string, std::string> sections;  // think/section texts; empty for IR
};

// Never fails: malformed input yields format_valid = false. Answer text is
// matched against `set` after trimming, case-insensitively; non-labels give
// answer = nullopt.
ParsedResponse parse_response(const std::string& raw, ReasoningPattern pattern,
                              const LabelSet& set);

// 1 iff the response matched its grammar exactly.
int format_reward(const ParsedResponse& parsed);

// Partial-matching coefficient schedule.
struct AlphaSchedule {
  enum class Kind { kConstant, kLinearDecay };
  Kind kind = Kind::kLinearDecay;
  double value = 1.0;     // constant value in [0, 1]
  long total_steps = 0;   // linear decay horizon

  static AlphaSchedule constant(double value) { return {Kind::kConstant, value, 0}; }
  static AlphaSchedule linear_decay(long total_steps) {
    return {Kind::kLinearDecay, 1.0, total_steps};
  }
};

enum class AccuracyKind { kEswr, kBcr };

std::string_view accuracy_kind_name(AccuracyKind kind);
std::optional<AccuracyKind> accuracy_kind_from_name(std::string_view name);

struct RewardConfig {
  double gamma = 0.7;
  AlphaSchedule alpha_schedule = AlphaSchedule::linear_decay(300);
  AccuracyKind accuracy_kind = AccuracyKind::kEswr;
  // When set, a response that fails its grammar earns no accuracy reward
  // either (the gated alternative to the default unconditioned sum).
  bool gate_accuracy_on_format = false;
};

// Alpha value at a step: constant(c) -> c, linear_decay(T) -> max(0, 1 - step/T).
// Throws InvalidSchedule when a linear decay has total_steps <= 0.
double alpha_at(const RewardConfig& config, long step);

// Similarity-weighted accuracy reward:
//   1             when S(pred, gold) = 1,
//   alpha * S     when S(pred, gold) > gamma,
//   0             otherwise (including S = gamma exactly).
// Absent pred scores 0. Throws LabelNotInSet when a given label is outside
// the matrix label set.
double eswr_reward(const std::optional<EmotionLabel>& pred, const EmotionLabel& gold,
                   const TransitionMatrix& similarity, double alpha, double gamma);

// Exact-match accuracy reward: 1 iff pred equals gold.
int bcr_reward(const std::optional<EmotionLabel>& pred, const EmotionLabel& gold);

// Format + accuracy, summed.
struct RewardBreakdown {
  int format = 0;
  double accuracy = 0.0;
  double total = 0.0;
};

// Scores an already-parsed response at a given training step.
RewardBreakdown reward_from_parsed(const ParsedResponse& parsed, const EmotionLabel& gold,
                                   const RewardConfig& config, const TransitionMatrix& similarity,
                                   long step);

// Parses and scores raw response text.
RewardBreakdown total_reward(const std::string& raw, const EmotionLabel& gold,
                             ReasoningPattern pattern, const RewardConfig& config,
                             const TransitionMatrix& similarity, long step);

}  // namespace emorl
