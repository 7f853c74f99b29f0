#include "emorl/metrics_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace emorl {

ConfusionMatrix::ConfusionMatrix(LabelSet set) : set_(std::move(set)) {
  const std::size_t c = static_cast<std::size_t>(set_.size());
  counts_.assign(c * (c + 1), 0);
}

void ConfusionMatrix::add(const std::string& gold, const std::optional<std::string>& pred) {
  const auto gi = set_.index_of(gold);
  if (!gi) throw UnknownGoldLabel("gold label '" + gold + "' is not in the label set");
  std::optional<int> pi;
  if (pred) pi = set_.index_of(*pred);
  add_indexed(*gi, pi);
}

void ConfusionMatrix::add_indexed(int gold_index, std::optional<int> pred_index) {
  const int c = set_.size();
  if (gold_index < 0 || gold_index >= c) throw UnknownGoldLabel("gold index out of range");
  int col = c;  // invalid column
  if (pred_index && *pred_index >= 0 && *pred_index < c) col = *pred_index;
  counts_[static_cast<std::size_t>(gold_index) * static_cast<std::size_t>(c + 1) +
          static_cast<std::size_t>(col)] += 1;
  total_ += 1;
}

long ConfusionMatrix::count(int gold_index, int pred_index) const {
  const int c = set_.size();
  return counts_.at(static_cast<std::size_t>(gold_index) * static_cast<std::size_t>(c + 1) +
                    static_cast<std::size_t>(pred_index));
}

long ConfusionMatrix::invalid_count(int gold_index) const {
  return count(gold_index, set_.size());
}

long ConfusionMatrix::gold_total(int gold_index) const {
  long sum = 0;
  for (int j = 0; j <= set_.size(); ++j) sum += count(gold_index, j);
  return sum;
}

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (!(set_ == other.set_)) throw ConfigError("cannot merge matrices over different label sets");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  return *this;
}

ConfusionMatrix accumulate(
    const std::vector<std::pair<std::string, std::optional<std::string>>>& records,
    const LabelSet& set) {
  ConfusionMatrix m(set);
  for (const auto& [gold, pred] : records) m.add(gold, pred);
  return m;
}

MetricsReport report(const ConfusionMatrix& matrix, const ReportOptions& options) {
  if (matrix.total() == 0) throw EmptyMatrix("confusion matrix holds no records");
  const LabelSet& set = matrix.label_set();
  const int c = set.size();

  MetricsReport out;
  out.n = matrix.total();
  long correct = 0;
  double recall_sum = 0.0;
  int recall_classes = 0;
  double f1_sum = 0.0;
  int f1_classes = 0;

  for (int i = 0; i < c; ++i) {
    PerClassMetrics pc;
    pc.label = set.label(i).name;
    pc.gold_count = matrix.gold_total(i);
    long pred_count = 0;
    for (int g = 0; g < c; ++g) pred_count += matrix.count(g, i);
    pc.predicted_count = pred_count;
    const long tp = matrix.count(i, i);
    correct += tp;
    pc.recall = pc.gold_count > 0 ? static_cast<double>(tp) / static_cast<double>(pc.gold_count) : 0.0;
    pc.precision = pred_count > 0 ? static_cast<double>(tp) / static_cast<double>(pred_count) : 0.0;
    pc.f1 = (pc.precision + pc.recall) > 0.0
                ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                : 0.0;
    if (pc.gold_count > 0) {
      recall_sum += pc.recall;
      ++recall_classes;
    }
    if (options.include_empty_classes || pc.gold_count > 0 || pc.predicted_count > 0) {
      f1_sum += pc.f1;
      ++f1_classes;
    }
    out.per_class.push_back(std::move(pc));
  }

  out.wa = static_cast<double>(correct) / static_cast<double>(matrix.total());
  out.ua = recall_classes > 0 ? recall_sum / static_cast<double>(recall_classes) : 0.0;
  out.macro_f1 = f1_classes > 0 ? f1_sum / static_cast<double>(f1_classes) : 0.0;
  return out;
}

ComparisonTable compare_runs(const std::map<std::string, MetricsReport>& reports,
                             const std::string& baseline) {
  if (reports.size() < 2) throw ConfigError("comparison needs at least 2 runs");
  const auto base_it = reports.find(baseline);
  if (base_it == reports.end()) throw ConfigError("baseline run '" + baseline + "' not found");
  const MetricsReport& base = base_it->second;

  auto rel_pct = [](double x, double b) {
    return b != 0.0 ? (x - b) / b * 100.0 : std::numeric_limits<double>::quiet_NaN();
  };

  ComparisonTable table;
  table.baseline = baseline;
  for (const auto& [name, r] : reports) {
    ComparisonRow row;
    row.name = name;
    row.ua = r.ua;
    row.wa = r.wa;
    row.macro_f1 = r.macro_f1;
    row.delta_ua_pct = rel_pct(r.ua, base.ua);
    row.delta_wa_pct = rel_pct(r.wa, base.wa);
    row.delta_f1_pct = rel_pct(r.macro_f1, base.macro_f1);
    row.is_baseline = (name == baseline);
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) { return a.ua > b.ua; });
  return table;
}

namespace {

std::string fmt_pct(double x) {
  if (std::isnan(x)) return "--";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%+.1f%%", x);
  return buf;
}

std::string fmt4(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

}  // namespace

std::string format_comparison(const ComparisonTable& table) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-20s %8s %8s %8s %10s %10s %10s\n", "run", "ua", "wa", "f1",
                "d_ua", "d_wa", "d_f1");
  out += line;
  for (const ComparisonRow& r : table.rows) {
    const std::string name = r.is_baseline ? r.name + "*" : r.name;
    std::snprintf(line, sizeof(line), "%-20s %8s %8s %8s %10s %10s %10s\n", name.c_str(),
                  fmt4(r.ua).c_str(), fmt4(r.wa).c_str(), fmt4(r.macro_f1).c_str(),
                  fmt_pct(r.delta_ua_pct).c_str(), fmt_pct(r.delta_wa_pct).c_str(),
                  fmt_pct(r.delta_f1_pct).c_str());
    out += line;
  }
  out += "(* baseline: " + table.baseline + "; deltas are relative to it)\n";
  return out;
}

std::string comparison_to_csv(const ComparisonTable& table) {
  std::string out = "run,ua,wa,macro_f1,delta_ua_pct,delta_wa_pct,delta_f1_pct,is_baseline\n";
  char line[256];
  for (const ComparisonRow& r : table.rows) {
    std::snprintf(line, sizeof(line), "%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n",
                  r.name.c_str(), r.ua, r.wa, r.macro_f1, r.delta_ua_pct, r.delta_wa_pct,
                  r.delta_f1_pct, r.is_baseline ? 1 : 0);
    out += line;
  }
  return out;
}

}  // namespace emorl
