#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emorl/emotion_geometry.hpp"
#include "emorl/errors.hpp"

namespace emorl {

// Gold-by-predicted counts. Rows are gold classes; the extra trailing column
// collects invalid predictions (absent answers or labels outside the set),
// which count toward every total/denominator but can never be correct.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(LabelSet set);

  // Throws UnknownGoldLabel when `gold` is outside the set. An absent or
  // out-of-set prediction lands in the invalid column.
  void add(const std::string& gold, const std::optional<std::string>& pred);
  void add_indexed(int gold_index, std::optional<int> pred_index);

  long count(int gold_index, int pred_index) const;
  long invalid_count(int gold_index) const;
  long gold_total(int gold_index) const;
  long total() const { return total_; }
  const LabelSet& label_set() const { return set_; }

  // Element-wise sum; label sets must match. Accumulation is associative and
  // commutative, so shards may be built in parallel and merged.
  ConfusionMatrix& merge(const ConfusionMatrix& other);

 private:
  LabelSet set_;
  std::vector<long> counts_;  // C rows x (C + 1) columns
  long total_ = 0;
};

ConfusionMatrix accumulate(const std::vector<std::pair<std::string, std::optional<std::string>>>& records,
                           const LabelSet& set);

struct PerClassMetrics {
  std::string label;
  long gold_count = 0;
  long predicted_count = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double ua = 0.0;        // macro-averaged recall over classes present in gold
  double wa = 0.0;        // overall accuracy
  double macro_f1 = 0.0;
  std::vector<PerClassMetrics> per_class;
  long n = 0;
};

struct ReportOptions {
  // Per-class means skip classes that appear in neither gold nor predictions.
  // Set to average over every class in the label set instead (such classes
  // contribute recall/precision/F1 of 0).
  bool include_empty_classes = false;
};

// WA = trace/total; UA = mean recall over classes with at least one gold
// instance; macro-F1 = mean of 2PR/(P+R) with undefined P or R scored 0.
// Throws EmptyMatrix when the matrix holds no records.
MetricsReport report(const ConfusionMatrix& matrix, const ReportOptions& options = {});

struct ComparisonRow {
  std::string name;
  double ua = 0.0;
  double wa = 0.0;
  double macro_f1 = 0.0;
  // Relative deltas versus the baseline, in percent; NaN when the baseline
  // metric is 0.
  double delta_ua_pct = 0.0;
  double delta_wa_pct = 0.0;
  double delta_f1_pct = 0.0;
  bool is_baseline = false;
};

struct ComparisonTable {
  std::string baseline;
  std::vector<ComparisonRow> rows;  // sorted by UA, best first
};

// Throws ConfigError when fewer than 2 runs are given or the baseline name is
// missing from the map.
ComparisonTable compare_runs(const std::map<std::string, MetricsReport>& reports,
                             const std::string& baseline);

std::string format_comparison(const ComparisonTable& table);
std::string comparison_to_csv(const ComparisonTable& table);

}  // namespace emorl
