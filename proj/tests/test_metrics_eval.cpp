#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "emorl/metrics_eval.hpp"
#include "emorl/rng.hpp"

using namespace emorl;

namespace {

LabelSet two_class() {
  return LabelSet({{"a", false}, {"b", false}}, {{"a", 0.0}, {"b", 180.0}});
}

LabelSet meld7() { return default_label_sets().at("meld7"); }

}  // namespace

TEST_CASE("hand-computed two-class example") {
  // gold counts {a: 2, b: 2}; row a: {2, 0}, row b: {1, 1}
  ConfusionMatrix m(two_class());
  m.add("a", std::optional<std::string>("a"));
  m.add("a", std::optional<std::string>("a"));
  m.add("b", std::optional<std::string>("a"));
  m.add("b", std::optional<std::string>("b"));

  const MetricsReport r = report(m);
  CHECK(r.n == 4);
  CHECK(r.wa == 0.75);
  CHECK(r.ua == doctest::Approx(0.75).epsilon(1e-12));
  // F1_a = 2*(2/3)*1 / (2/3 + 1) = 0.8; F1_b = 2*1*0.5/1.5 = 2/3
  CHECK(r.per_class[0].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.per_class[0].recall == 1.0);
  CHECK(r.per_class[0].f1 == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.per_class[1].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.macro_f1 == doctest::Approx(11.0 / 15.0).epsilon(1e-12));
}

TEST_CASE("perfect predictions score 1 everywhere") {
  ConfusionMatrix m(meld7());
  const LabelSet set = meld7();
  for (int i = 0; i < set.size(); ++i) {
    for (int k = 0; k < 3; ++k) m.add_indexed(i, i);
  }
  const MetricsReport r = report(m);
  CHECK(r.ua == 1.0);
  CHECK(r.wa == 1.0);
  CHECK(r.macro_f1 == 1.0);
}

TEST_CASE("class-balanced data gives ua == wa") {
  // power-of-two per-class gold counts keep the arithmetic exact
  Rng rng(4);
  ConfusionMatrix m(meld7());
  const int per_class = 4;
  for (int i = 0; i < 7; ++i) {
    for (int k = 0; k < per_class; ++k) m.add_indexed(i, rng.uniform_int(7));
  }
  const MetricsReport r = report(m);
  CHECK(r.ua == r.wa);
}

TEST_CASE("invalid predictions count as wrong but never as predictions") {
  ConfusionMatrix m(two_class());
  m.add("a", std::optional<std::string>("a"));
  m.add("a", std::nullopt);                          // absent answer
  m.add("b", std::optional<std::string>("zork"));    // out-of-set prediction
  m.add("b", std::optional<std::string>("b"));

  CHECK(m.invalid_count(0) == 1);
  CHECK(m.invalid_count(1) == 1);
  CHECK(m.total() == 4);
  const MetricsReport r = report(m);
  CHECK(r.wa == 0.5);
  CHECK(r.ua == 0.5);
  // invalid column inflates recall denominators but not precision ones
  CHECK(r.per_class[0].predicted_count == 1);
  CHECK(r.per_class[0].precision == 1.0);
  CHECK(r.per_class[0].recall == 0.5);
}

TEST_CASE("error paths") {
  ConfusionMatrix m(two_class());
  CHECK_THROWS_AS(m.add("zork", std::optional<std::string>("a")), UnknownGoldLabel);
  CHECK_THROWS_AS(report(m), EmptyMatrix);

  ConfusionMatrix other(meld7());
  CHECK_THROWS_AS(m.merge(other), ConfigError);
}

TEST_CASE("record order does not matter and shard merges are exact") {
  Rng rng(12);
  const LabelSet set = meld7();
  std::vector<std::pair<std::string, std::optional<std::string>>> records;
  for (int i = 0; i < 500; ++i) {
    const std::string gold = set.label(rng.uniform_int(7)).name;
    std::optional<std::string> pred;
    const int kind = rng.uniform_int(10);
    if (kind < 7) pred = set.label(rng.uniform_int(7)).name;
    else if (kind < 8) pred = "not_a_label";
    records.push_back({gold, pred});
  }

  const ConfusionMatrix whole = accumulate(records, set);
  const MetricsReport base = report(whole);

  // permuted order
  auto shuffled = records;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(99));
  const MetricsReport permuted = report(accumulate(shuffled, set));
  CHECK(permuted.ua == base.ua);
  CHECK(permuted.wa == base.wa);
  CHECK(permuted.macro_f1 == base.macro_f1);

  // random shard split, then merge
  for (int trial = 0; trial < 5; ++trial) {
    Rng srng(static_cast<std::uint64_t>(trial));
    std::vector<std::pair<std::string, std::optional<std::string>>> s1, s2;
    for (const auto& rec : records) {
      (srng.uniform() < 0.5 ? s1 : s2).push_back(rec);
    }
    ConfusionMatrix merged = accumulate(s1, set);
    merged.merge(accumulate(s2, set));
    const MetricsReport r = report(merged);
    CHECK(r.ua == base.ua);
    CHECK(r.wa == base.wa);
    CHECK(r.macro_f1 == base.macro_f1);
    CHECK(r.n == base.n);
  }
}

TEST_CASE("ua equals an independently coded macro recall") {
  Rng rng(77);
  const LabelSet set = meld7();
  ConfusionMatrix m(set);
  for (int i = 0; i < 300; ++i) {
    m.add_indexed(rng.uniform_int(6), rng.uniform_int(7));  // class 6 left gold-empty
  }
  const MetricsReport r = report(m);

  double recall_sum = 0.0;
  int classes = 0;
  long correct = 0;
  for (int i = 0; i < set.size(); ++i) {
    long gold = 0;
    for (int j = 0; j <= set.size(); ++j) gold += m.count(i, j);
    correct += m.count(i, i);
    if (gold == 0) continue;
    recall_sum += static_cast<double>(m.count(i, i)) / static_cast<double>(gold);
    ++classes;
  }
  CHECK(r.ua == recall_sum / classes);
  CHECK(r.wa == static_cast<double>(correct) / 300.0);
  CHECK(classes == 6);  // the gold-empty class is excluded from the mean
}

TEST_CASE("empty classes stay out of macro averages unless requested") {
  const LabelSet set = meld7();
  ConfusionMatrix m(set);
  m.add_indexed(0, 0);
  m.add_indexed(1, 0);

  const MetricsReport skip = report(m);
  // classes 2..6 appear in neither gold nor predictions
  CHECK(skip.macro_f1 == doctest::Approx((2.0 / 3.0 + 0.0) / 2.0).epsilon(1e-12));

  ReportOptions opts;
  opts.include_empty_classes = true;
  const MetricsReport all = report(m, opts);
  CHECK(all.macro_f1 == doctest::Approx((2.0 / 3.0) / 7.0).epsilon(1e-12));
}

TEST_CASE("compare_runs ranks by ua with relative deltas") {
  MetricsReport base;
  base.ua = 0.30;
  base.wa = 0.40;
  base.macro_f1 = 0.28;
  MetricsReport ours = base;
  ours.ua = 0.39;

  SUBCASE("identical reports have delta zero") {
    const ComparisonTable t = compare_runs({{"x", base}, {"y", base}}, "x");
    CHECK(t.rows.size() == 2);
    CHECK(t.rows[0].delta_ua_pct == 0.0);
    CHECK(t.rows[1].delta_ua_pct == 0.0);
  }
  SUBCASE("0.30 -> 0.39 is +30% relative") {
    const ComparisonTable t = compare_runs({{"base", base}, {"ours", ours}}, "base");
    CHECK(t.rows[0].name == "ours");  // sorted by ua, best first
    CHECK(t.rows[0].delta_ua_pct == doctest::Approx(30.0).epsilon(1e-9));
    CHECK(t.rows[1].is_baseline);
  }
  SUBCASE("missing baseline and short maps are rejected") {
    CHECK_THROWS_AS(compare_runs({{"base", base}, {"ours", ours}}, "nope"), ConfigError);
    CHECK_THROWS_AS(compare_runs({{"only", base}}, "only"), ConfigError);
  }
  SUBCASE("formatting mentions the baseline") {
    const ComparisonTable t = compare_runs({{"base", base}, {"ours", ours}}, "base");
    const std::string text = format_comparison(t);
    CHECK(text.find("base*") != std::string::npos);
    CHECK(text.find("+30.0%") != std::string::npos);
    const std::string csv = comparison_to_csv(t);
    CHECK(csv.find("run,ua,wa,macro_f1") == 0);
  }
}
