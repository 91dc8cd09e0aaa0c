#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emopred/corpus.hpp"

namespace emopred {

// Rows are gold classes, columns are predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}

  std::size_t classes() const { return k_; }
  std::int64_t& at(std::size_t gold, std::size_t pred) {
    return counts_[gold * k_ + pred];
  }
  std::int64_t at(std::size_t gold, std::size_t pred) const {
    return counts_[gold * k_ + pred];
  }
  std::int64_t row_sum(std::size_t gold) const;  // support of the class
  std::int64_t col_sum(std::size_t pred) const;  // times the class was chosen
  std::int64_t total() const;

 private:
  std::size_t k_ = 0;
  std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> golds, std::span<const int> preds,
                          std::size_t k);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mean_rank = 0.0;  // 0 when unavailable or support is zero
  std::int64_t support = 0;
};

struct Report {
  std::vector<ClassMetrics> per_class;
  // Unweighted means over all classes, and over classes with support > 0.
  double macro_p = 0, macro_r = 0, macro_f1 = 0;
  double macro_nz_p = 0, macro_nz_r = 0, macro_nz_f1 = 0;
  std::size_t zero_support_classes = 0;
  // Support-weighted means.
  double weighted_p = 0, weighted_r = 0, weighted_f1 = 0;
  ConfusionMatrix matrix;
  nlohmann::json provenance;  // resolved config, seed, tool version
};

// P = diag/column, R = diag/row (0 on empty), F1 = 2PR/(P+R).
Report prf(const ConfusionMatrix& matrix);

// Rank of one prediction: 1 + number of classes with strictly higher
// probability than the gold class (ties do not raise the rank).
int example_rank(std::span<const double> probs, int gold);

// Per-class mean rank over the examples of that gold class; 0 for classes
// with no examples.
std::vector<double> rank_metric(const std::vector<std::vector<double>>& prob_rows,
                                std::span<const int> golds, std::size_t k);

void add_ranks(Report& report, const std::vector<std::vector<double>>& prob_rows,
               std::span<const int> golds);

struct Annotation {
  std::string tweet_id;
  std::string annotator_id;
  std::string emoji;
};

// CSV with header tweet_id,annotator_id,emoji.
struct AnnotationSet {
  std::vector<Annotation> records;

  static AnnotationSet from_csv(const std::string& path);
  std::map<std::string, std::vector<Annotation>> by_tweet() const;
};

// Strict plurality winner; nullopt on a tie for the top count.
std::optional<int> majority_label(std::span<const int> votes);

// Micro-averaged fraction of agreeing unordered annotator pairs. Every
// tweet needs at least two annotations.
double pairwise_agreement(const AnnotationSet& annotations);

struct HumanComparison {
  Report human;
  Report model;
  std::size_t tie_tweets = 0;
  std::size_t compared = 0;
  double agreement = 0.0;  // over the full annotation set, ties included
};

// Majority vote per tweet against the model prediction, both scored on the
// gold labels; tie tweets drop out of both sides.
HumanComparison compare_human_model(
    const AnnotationSet& annotations,
    const std::map<std::string, int>& model_preds,
    const std::map<std::string, int>& golds, const LabelSet& labels);

nlohmann::json report_to_json(const Report& report, const LabelSet& labels);
std::string report_to_text(const Report& report, const LabelSet& labels);

nlohmann::json comparison_to_json(const HumanComparison& cmp,
                                  const LabelSet& labels);
std::string comparison_to_text(const HumanComparison& cmp,
                               const LabelSet& labels);

}  // namespace emopred
