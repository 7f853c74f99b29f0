#include "emorl/reward_engine.hpp"

#include <cmath>
#include <regex>

namespace emorl {

namespace {

std::string esr_pattern_text() {
  std::string p = R"(^\s*<think>\s*)";
  for (std::string_view tag : kEsrSectionTags) {
    p += "<";
    p += tag;
    p += ">([\\s\\S]*?)</";
    p += tag;
    p += ">\\s*";
  }
  p += R"(</think>\s*<answer>([^<]*)</answer>\s*$)";
  return p;
}

const std::regex& grammar_regex(ReasoningPattern pattern) {
  static const std::regex ir(R"(^\s*<answer>([^<]*)</answer>\s*$)");
  static const std::regex eur(R"(^\s*<think>([\s\S]*?)</think>\s*<answer>([^<]*)</answer>\s*$)");
  static const std::regex esr(esr_pattern_text());
  switch (pattern) {
    case ReasoningPattern::kIr: return ir;
    case ReasoningPattern::kEur: return eur;
    case ReasoningPattern::kEsr: return esr;
  }
  throw Error("unreachable pattern");
}

std::optional<EmotionLabel> match_answer(const std::string& text, const LabelSet& set) {
  const auto idx = set.match_label(text);
  if (!idx) return std::nullopt;
  return set.label(*idx);
}

// Last <answer> span in the text, if any.
std::optional<std::string> scan_answer_span(const std::string& raw) {
  static const std::regex span(R"(<answer>([^<]*)</answer>)");
  std::optional<std::string> last;
  for (auto it = std::sregex_iterator(raw.begin(), raw.end(), span);
       it != std::sregex_iterator(); ++it) {
    last = (*it)[1].str();
  }
  return last;
}

}  // namespace

std::string_view pattern_name(ReasoningPattern pattern) {
  switch (pattern) {
    case ReasoningPattern::kIr: return "ir";
    case ReasoningPattern::kEur: return "eur";
    case ReasoningPattern::kEsr: return "esr";
  }
  return "?";
}

std::optional<ReasoningPattern> pattern_from_name(std::string_view name) {
  if (name == "ir") return ReasoningPattern::kIr;
  if (name == "eur") return ReasoningPattern::kEur;
  if (name == "esr") return ReasoningPattern::kEsr;
  return std::nullopt;
}

std::string_view accuracy_kind_name(AccuracyKind kind) {
  return kind == AccuracyKind::kEswr ? "eswr" : "bcr";
}

std::optional<AccuracyKind> accuracy_kind_from_name(std::string_view name) {
  if (name == "eswr") return AccuracyKind::kEswr;
  if (name == "bcr") return AccuracyKind::kBcr;
  return std::nullopt;
}

ParsedResponse parse_response(const std::string& raw, ReasoningPattern pattern,
                              const LabelSet& set) {
  ParsedResponse out;
  out.raw = raw;
  std::smatch m;
  if (std::regex_match(raw, m, grammar_regex(pattern))) {
    out.format_valid = true;
    switch (pattern) {
      case ReasoningPattern::kIr:
        out.answer = match_answer(m[1].str(), set);
        break;
      case ReasoningPattern::kEur:
        out.sections["think"] = m[1].str();
        out.answer = match_answer(m[2].str(), set);
        break;
      case ReasoningPattern::kEsr:
        for (std::size_t i = 0; i < kEsrSectionTags.size(); ++i) {
          out.sections[std::string(kEsrSectionTags[i])] = m[i + 1].str();
        }
        out.answer = match_answer(m[kEsrSectionTags.size() + 1].str(), set);
        break;
    }
    return out;
  }
  // Malformed: recover an answer for metrics when one is present.
  if (const auto span = scan_answer_span(raw)) out.answer = match_answer(*span, set);
  return out;
}

int format_reward(const ParsedResponse& parsed) { return parsed.format_valid ? 1 : 0; }

double alpha_at(const RewardConfig& config, long step) {
  const AlphaSchedule& s = config.alpha_schedule;
  switch (s.kind) {
    case AlphaSchedule::Kind::kConstant:
      return s.value;
    case AlphaSchedule::Kind::kLinearDecay: {
      if (s.total_steps <= 0) throw InvalidSchedule("linear decay needs total_steps >= 1");
      const double a = 1.0 - static_cast<double>(step) / static_cast<double>(s.total_steps);
      return a > 0.0 ? a : 0.0;
    }
  }
  throw InvalidSchedule("unknown alpha schedule");
}

double eswr_reward(const std::optional<EmotionLabel>& pred, const EmotionLabel& gold,
                   const TransitionMatrix& similarity, double alpha, double gamma) {
  if (!pred) return 0.0;
  const double s = similarity.at(*pred, gold);
  if (s == 1.0) return 1.0;
  if (s > gamma) return alpha * s;
  return 0.0;
}

int bcr_reward(const std::optional<EmotionLabel>& pred, const EmotionLabel& gold) {
  return (pred && pred->name == gold.name) ? 1 : 0;
}

RewardBreakdown reward_from_parsed(const ParsedResponse& parsed, const EmotionLabel& gold,
                                   const RewardConfig& config, const TransitionMatrix& similarity,
                                   long step) {
  RewardBreakdown out;
  out.format = format_reward(parsed);
  if (!config.gate_accuracy_on_format || parsed.format_valid) {
    switch (config.accuracy_kind) {
      case AccuracyKind::kEswr:
        out.accuracy = eswr_reward(parsed.answer, gold, similarity, alpha_at(config, step),
                                   config.gamma);
        break;
      case AccuracyKind::kBcr:
        out.accuracy = static_cast<double>(bcr_reward(parsed.answer, gold));
        break;
    }
  }
  out.total = static_cast<double>(out.format) + out.accuracy;
  return out;
}

RewardBreakdown total_reward(const std::string& raw, const EmotionLabel& gold,
                             ReasoningPattern pattern, const RewardConfig& config,
                             const TransitionMatrix& similarity, long step) {
  return reward_from_parsed(parse_response(raw, pattern, similarity.label_set()), gold, config,
                            similarity, step);
}

}  // namespace emorl
