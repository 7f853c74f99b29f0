#include "emorl/emotion_geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

namespace emorl {

namespace {

bool is_lowercase_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::none_of(s.begin(), s.end(),
                      [](unsigned char c) { return std::isupper(c) || std::isspace(c); });
}

std::string trim_lower(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  std::string out(text.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

constexpr double kDegToRad = M_PI / 180.0;

}  // namespace

LabelSet::LabelSet(std::vector<EmotionLabel> labels, std::map<std::string, double> angles)
    : labels_(std::move(labels)), angles_(std::move(angles)) {
  if (labels_.size() < 2) throw ConfigError("label set needs at least 2 labels");
  std::set<std::string> seen;
  for (int i = 0; i < size(); ++i) {
    const EmotionLabel& l = labels_[static_cast<std::size_t>(i)];
    if (!is_lowercase_identifier(l.name))
      throw ConfigError("label name must be a non-empty lowercase identifier: '" + l.name + "'");
    if (!seen.insert(l.name).second) throw ConfigError("duplicate label name: " + l.name);
    if (l.is_neutral) {
      if (neutral_index_) throw ConfigError("label set has more than one neutral label");
      neutral_index_ = i;
      if (angles_.count(l.name))
        throw ConfigError("neutral label '" + l.name + "' must not have a wheel angle");
    }
  }
  for (const auto& [name, angle] : angles_) {
    if (!index_of(name)) throw ConfigError("angle given for unknown label: " + name);
    if (!(angle >= 0.0 && angle < 360.0))
      throw ConfigError("wheel angle out of [0, 360) for label: " + name);
  }
}

std::optional<int> LabelSet::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (labels_[static_cast<std::size_t>(i)].name == name) return i;
  }
  return std::nullopt;
}

std::optional<int> LabelSet::match_label(std::string_view text) const {
  return index_of(trim_lower(text));
}

bool LabelSet::has_placement(int index) const {
  const EmotionLabel& l = label(index);
  return !l.is_neutral && angles_.count(l.name) > 0;
}

double LabelSet::placement_angle(int index) const {
  const EmotionLabel& l = label(index);
  if (l.is_neutral) throw NeutralAngleQuery("label '" + l.name + "' is neutral and has no wheel angle");
  auto it = angles_.find(l.name);
  if (it == angles_.end()) throw MissingPlacement("label '" + l.name + "' has no wheel placement");
  return it->second;
}

std::optional<WheelPlacement> LabelSet::placement(int index) const {
  if (!has_placement(index)) return std::nullopt;
  return WheelPlacement{label(index), placement_angle(index)};
}

TransitionMatrix::TransitionMatrix(LabelSet set, std::vector<double> values)
    : set_(std::move(set)), values_(std::move(values)) {
  const std::size_t c = static_cast<std::size_t>(set_.size());
  if (values_.size() != c * c) throw ConfigError("transition matrix values have wrong size");
}

double TransitionMatrix::at(int i, int j) const {
  const int c = size();
  if (i < 0 || j < 0 || i >= c || j >= c) throw LabelNotInSet("matrix index out of range");
  return values_[static_cast<std::size_t>(i) * static_cast<std::size_t>(c) +
                 static_cast<std::size_t>(j)];
}

double TransitionMatrix::at(const EmotionLabel& a, const EmotionLabel& b) const {
  const auto i = set_.index_of(a.name);
  const auto j = set_.index_of(b.name);
  if (!i) throw LabelNotInSet("label '" + a.name + "' is not in the matrix label set");
  if (!j) throw LabelNotInSet("label '" + b.name + "' is not in the matrix label set");
  return at(*i, *j);
}

double plutchik_angle(const EmotionLabel& a, const EmotionLabel& b, const LabelSet& set) {
  if (a.is_neutral || b.is_neutral)
    throw NeutralAngleQuery("neutral labels have no wheel angle");
  const auto ia = set.index_of(a.name);
  const auto ib = set.index_of(b.name);
  if (!ia) throw MissingPlacement("label '" + a.name + "' has no wheel placement in this set");
  if (!ib) throw MissingPlacement("label '" + b.name + "' has no wheel placement in this set");
  const double da = set.placement_angle(*ia);
  const double db = set.placement_angle(*ib);
  double diff = std::fabs(da - db);
  diff = std::fmod(diff, 360.0);
  if (diff > 180.0) diff = 360.0 - diff;
  return diff;
}

TransitionMatrix build_transition_matrix(const LabelSet& set) {
  const int c = set.size();
  std::vector<double> values(static_cast<std::size_t>(c) * static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      double v = 0.0;
      if (i == j) {
        v = 1.0;  // exact match wins over the neutral rule
      } else if (set.label(i).is_neutral || set.label(j).is_neutral) {
        v = 0.5;
      } else {
        const double angle = plutchik_angle(set.label(i), set.label(j), set);
        v = (std::cos(angle * kDegToRad) + 1.0) / 2.0;
      }
      values[static_cast<std::size_t>(i) * static_cast<std::size_t>(c) +
             static_cast<std::size_t>(j)] = v;
    }
  }
  return TransitionMatrix(set, std::move(values));
}

std::optional<double> canonical_wheel_angle(std::string_view name) {
  static const std::map<std::string, double, std::less<>> table = {
      {"joy", 0.0},          {"trust", 45.0},    {"fear", 90.0},
      {"surprise", 135.0},   {"sadness", 180.0}, {"disgust", 225.0},
      {"anger", 270.0},      {"anticipation", 315.0},
      // dataset synonyms
      {"happy", 0.0},        {"happiness", 0.0}, {"angry", 270.0},
      {"sad", 180.0},        {"surprised", 135.0}, {"scared", 90.0},
      {"afraid", 90.0},      {"disgusted", 225.0},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

const std::map<std::string, LabelSet>& default_label_sets() {
  static const std::map<std::string, LabelSet> sets = [] {
    auto make = [](const std::vector<std::string>& names, const std::string& neutral) {
      std::vector<EmotionLabel> labels;
      std::map<std::string, double> angles;
      for (const std::string& n : names) {
        const bool is_neutral = (n == neutral);
        labels.push_back(EmotionLabel{n, is_neutral});
        if (!is_neutral) angles[n] = *canonical_wheel_angle(n);
      }
      return LabelSet(std::move(labels), std::move(angles));
    };
    std::map<std::string, LabelSet> m;
    m.emplace("meld7", make({"anger", "disgust", "fear", "joy", "neutral", "sadness", "surprise"},
                            "neutral"));
    m.emplace("iemocap4", make({"angry", "happy", "neutral", "sad"}, "neutral"));
    return m;
  }();
  return sets;
}

std::string transition_matrix_to_csv(const TransitionMatrix& matrix) {
  const LabelSet& set = matrix.label_set();
  std::string out = "label";
  for (const EmotionLabel& l : set.labels()) {
    out += ',';
    out += l.name;
  }
  out += '\n';
  char buf[32];
  for (int i = 0; i < set.size(); ++i) {
    out += set.label(i).name;
    for (int j = 0; j < set.size(); ++j) {
      std::snprintf(buf, sizeof(buf), ",%.6f", matrix.at(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace emorl
