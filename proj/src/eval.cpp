#include "emopred/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "emopred/errors.hpp"

namespace emopred {

using nlohmann::json;

std::int64_t ConfusionMatrix::row_sum(std::size_t gold) const {
  std::int64_t s = 0;
  for (std::size_t p = 0; p < k_; ++p) s += at(gold, p);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::int64_t s = 0;
  for (std::size_t g = 0; g < k_; ++g) s += at(g, pred);
  return s;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (std::int64_t c : counts_) s += c;
  return s;
}

ConfusionMatrix confusion(std::span<const int> golds, std::span<const int> preds,
                          std::size_t k) {
  if (golds.size() != preds.size())
    throw std::invalid_argument(
        "confusion: gold/prediction length mismatch (" +
        std::to_string(golds.size()) + " vs " + std::to_string(preds.size()) +
        ")");
  ConfusionMatrix m(k);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    int g = golds[i], p = preds[i];
    if (g < 0 || p < 0 || static_cast<std::size_t>(g) >= k ||
        static_cast<std::size_t>(p) >= k)
      throw std::invalid_argument("confusion: class out of range at index " +
                                  std::to_string(i));
    ++m.at(static_cast<std::size_t>(g), static_cast<std::size_t>(p));
  }
  return m;
}

Report prf(const ConfusionMatrix& matrix) {
  Report r;
  r.matrix = matrix;
  std::size_t k = matrix.classes();
  r.per_class.resize(k);

  std::int64_t total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t tp = matrix.at(c, c);
    std::int64_t col = matrix.col_sum(c);
    std::int64_t row = matrix.row_sum(c);
    ClassMetrics& m = r.per_class[c];
    m.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    m.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    m.support = row;
    total += row;
  }

  std::size_t nz = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const ClassMetrics& m = r.per_class[c];
    r.macro_p += m.precision;
    r.macro_r += m.recall;
    r.macro_f1 += m.f1;
    if (m.support > 0) {
      ++nz;
      r.macro_nz_p += m.precision;
      r.macro_nz_r += m.recall;
      r.macro_nz_f1 += m.f1;
      double w = static_cast<double>(m.support) / static_cast<double>(total);
      r.weighted_p += w * m.precision;
      r.weighted_r += w * m.recall;
      r.weighted_f1 += w * m.f1;
    }
  }
  if (k > 0) {
    r.macro_p /= static_cast<double>(k);
    r.macro_r /= static_cast<double>(k);
    r.macro_f1 /= static_cast<double>(k);
  }
  if (nz > 0) {
    r.macro_nz_p /= static_cast<double>(nz);
    r.macro_nz_r /= static_cast<double>(nz);
    r.macro_nz_f1 /= static_cast<double>(nz);
  }
  r.zero_support_classes = k - nz;
  return r;
}

int example_rank(std::span<const double> probs, int gold) {
  if (gold < 0 || static_cast<std::size_t>(gold) >= probs.size())
    throw std::invalid_argument("example_rank: gold out of range");
  double pg = probs[static_cast<std::size_t>(gold)];
  int above = 0;
  for (double p : probs)
    if (p > pg) ++above;
  return 1 + above;
}

std::vector<double> rank_metric(const std::vector<std::vector<double>>& prob_rows,
                                std::span<const int> golds, std::size_t k) {
  if (prob_rows.size() != golds.size())
    throw std::invalid_argument("rank_metric: rows/golds length mismatch");
  std::vector<double> sums(k, 0.0);
  std::vector<std::int64_t> counts(k, 0);
  for (std::size_t i = 0; i < prob_rows.size(); ++i) {
    int rank = example_rank(prob_rows[i], golds[i]);
    sums[static_cast<std::size_t>(golds[i])] += rank;
    ++counts[static_cast<std::size_t>(golds[i])];
  }
  for (std::size_t c = 0; c < k; ++c)
    sums[c] = counts[c] > 0 ? sums[c] / static_cast<double>(counts[c]) : 0.0;
  return sums;
}

void add_ranks(Report& report, const std::vector<std::vector<double>>& prob_rows,
               std::span<const int> golds) {
  std::vector<double> ranks =
      rank_metric(prob_rows, golds, report.per_class.size());
  for (std::size_t c = 0; c < ranks.size(); ++c)
    report.per_class[c].mean_rank = ranks[c];
}

AnnotationSet AnnotationSet::from_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open annotation file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tweet_id,annotator_id,emoji")
    throw DataError(path + ":1: expected header 'tweet_id,annotator_id,emoji'");

  AnnotationSet set;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        line.find(',', c2 + 1) != std::string::npos)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected three comma-separated fields");
    Annotation a;
    a.tweet_id = line.substr(0, c1);
    a.annotator_id = line.substr(c1 + 1, c2 - c1 - 1);
    a.emoji = line.substr(c2 + 1);
    if (a.tweet_id.empty() || a.annotator_id.empty() || a.emoji.empty())
      throw DataError(path + ":" + std::to_string(line_no) + ": empty field");
    set.records.push_back(std::move(a));
  }
  return set;
}

std::map<std::string, std::vector<Annotation>> AnnotationSet::by_tweet() const {
  std::map<std::string, std::vector<Annotation>> grouped;
  for (const Annotation& a : records) grouped[a.tweet_id].push_back(a);
  return grouped;
}

std::optional<int> majority_label(std::span<const int> votes) {
  if (votes.empty())
    throw std::invalid_argument("majority_label: no annotations");
  std::map<int, int> counts;
  for (int v : votes) ++counts[v];
  int best = -1, best_count = 0;
  bool tied = false;
  for (auto [label, count] : counts) {
    if (count > best_count) {
      best = label;
      best_count = count;
      tied = false;
    } else if (count == best_count) {
      tied = true;
    }
  }
  if (tied) return std::nullopt;
  return best;
}

double pairwise_agreement(const AnnotationSet& annotations) {
  std::int64_t agreeing = 0, total = 0;
  for (const auto& [tweet_id, anns] : annotations.by_tweet()) {
    std::int64_t n = static_cast<std::int64_t>(anns.size());
    if (n < 2)
      throw DataError("tweet '" + tweet_id +
                      "' has fewer than two annotations");
    std::map<std::string, std::int64_t> counts;
    for (const Annotation& a : anns) ++counts[a.emoji];
    for (auto& [emoji, c] : counts) agreeing += c * (c - 1) / 2;
    total += n * (n - 1) / 2;
  }
  return total > 0 ? static_cast<double>(agreeing) / static_cast<double>(total)
                   : 0.0;
}

HumanComparison compare_human_model(
    const AnnotationSet& annotations,
    const std::map<std::string, int>& model_preds,
    const std::map<std::string, int>& golds, const LabelSet& labels) {
  HumanComparison cmp;
  cmp.agreement = pairwise_agreement(annotations);

  std::vector<int> gold_list, human_list, model_list;
  for (const auto& [tweet_id, anns] : annotations.by_tweet()) {
    std::vector<int> votes;
    for (const Annotation& a : anns) {
      int cls = labels.index_of(a.emoji);
      if (cls < 0)
        throw DataError("annotation emoji '" + a.emoji +
                        "' is not in the label set (tweet '" + tweet_id + "')");
      votes.push_back(cls);
    }
    std::optional<int> majority = majority_label(votes);
    if (!majority) {
      ++cmp.tie_tweets;
      continue;
    }
    auto mp = model_preds.find(tweet_id);
    auto gp = golds.find(tweet_id);
    if (mp == model_preds.end() || gp == golds.end())
      throw DataError("annotated tweet '" + tweet_id +
                      "' has no model prediction or gold label");
    human_list.push_back(*majority);
    model_list.push_back(mp->second);
    gold_list.push_back(gp->second);
  }
  cmp.compared = gold_list.size();
  cmp.human = prf(confusion(gold_list, human_list, labels.size()));
  cmp.model = prf(confusion(gold_list, model_list, labels.size()));
  return cmp;
}

namespace {

json matrix_to_json(const ConfusionMatrix& m) {
  json rows = json::array();
  for (std::size_t g = 0; g < m.classes(); ++g) {
    json row = json::array();
    for (std::size_t p = 0; p < m.classes(); ++p) row.push_back(m.at(g, p));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void append_matrix_text(std::string& out, const ConfusionMatrix& m) {
  out += "confusion matrix (rows gold, cols predicted):\n";
  for (std::size_t g = 0; g < m.classes(); ++g) {
    char head[32];
    std::snprintf(head, sizeof head, "%4zu |", g);
    out += head;
    for (std::size_t p = 0; p < m.classes(); ++p) {
      char cell[32];
      std::snprintf(cell, sizeof cell, " %6lld",
                    static_cast<long long>(m.at(g, p)));
      out += cell;
    }
    out += "\n";
  }
}

}  // namespace

json report_to_json(const Report& report, const LabelSet& labels) {
  json per_class = json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const ClassMetrics& m = report.per_class[c];
    per_class.push_back({{"class", c},
                         {"emoji", labels.emoji(static_cast<int>(c))},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"rank", m.mean_rank},
                         {"support", m.support}});
  }
  json j;
  j["per_class"] = std::move(per_class);
  j["macro"] = {{"precision", report.macro_p},
                {"recall", report.macro_r},
                {"f1", report.macro_f1}};
  j["macro_nonzero_support"] = {{"precision", report.macro_nz_p},
                                {"recall", report.macro_nz_r},
                                {"f1", report.macro_nz_f1}};
  j["weighted"] = {{"precision", report.weighted_p},
                   {"recall", report.weighted_r},
                   {"f1", report.weighted_f1}};
  j["zero_support_classes"] = report.zero_support_classes;
  j["total_examples"] = report.matrix.total();
  j["confusion"] = matrix_to_json(report.matrix);
  if (!report.provenance.is_null()) j["provenance"] = report.provenance;
  return j;
}

std::string report_to_text(const Report& report, const LabelSet& labels) {
  std::string out;
  out += "class       P       R      F1    Rank      Num  emoji\n";
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const ClassMetrics& m = report.per_class[c];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%5zu  %6.4f  %6.4f  %6.4f  %6.2f  %7lld  %s\n",
                  c, m.precision, m.recall, m.f1, m.mean_rank,
                  static_cast<long long>(m.support),
                  labels.emoji(static_cast<int>(c)).c_str());
    out += buf;
  }
  out += "\n";
  out += "macro             P " + fmt("%6.4f", report.macro_p) + "  R " +
         fmt("%6.4f", report.macro_r) + "  F1 " + fmt("%6.4f", report.macro_f1) +
         "\n";
  out += "macro (support>0) P " + fmt("%6.4f", report.macro_nz_p) + "  R " +
         fmt("%6.4f", report.macro_nz_r) + "  F1 " +
         fmt("%6.4f", report.macro_nz_f1) + "\n";
  out += "weighted          P " + fmt("%6.4f", report.weighted_p) + "  R " +
         fmt("%6.4f", report.weighted_r) + "  F1 " +
         fmt("%6.4f", report.weighted_f1) + "\n";
  out += "zero-support classes: " + std::to_string(report.zero_support_classes) +
         "\n";
  out += "total examples: " + std::to_string(report.matrix.total()) + "\n\n";
  append_matrix_text(out, report.matrix);
  return out;
}

json comparison_to_json(const HumanComparison& cmp, const LabelSet& labels) {
  json j;
  j["human"] = report_to_json(cmp.human, labels);
  j["model"] = report_to_json(cmp.model, labels);
  j["tie_tweets_excluded"] = cmp.tie_tweets;
  j["tweets_compared"] = cmp.compared;
  j["pairwise_agreement"] = cmp.agreement;
  json choices = json::array();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    choices.push_back({{"class", c},
                       {"emoji", labels.emoji(static_cast<int>(c))},
                       {"support", cmp.human.matrix.row_sum(c)},
                       {"human_chosen", cmp.human.matrix.col_sum(c)},
                       {"model_chosen", cmp.model.matrix.col_sum(c)}});
  }
  j["choice_counts"] = std::move(choices);
  return j;
}

std::string comparison_to_text(const HumanComparison& cmp,
                               const LabelSet& labels) {
  std::string out;
  out += "            ----- human -----   ----- model -----\n";
  out += "class       P       R      F1       P       R      F1   emoji\n";
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const ClassMetrics& h = cmp.human.per_class[c];
    const ClassMetrics& m = cmp.model.per_class[c];
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "%5zu  %6.4f  %6.4f  %6.4f  %6.4f  %6.4f  %6.4f   %s\n", c,
                  h.precision, h.recall, h.f1, m.precision, m.recall, m.f1,
                  labels.emoji(static_cast<int>(c)).c_str());
    out += buf;
  }
  char avg[200];
  std::snprintf(avg, sizeof avg,
                "  avg  %6.4f  %6.4f  %6.4f  %6.4f  %6.4f  %6.4f   (macro)\n",
                cmp.human.macro_p, cmp.human.macro_r, cmp.human.macro_f1,
                cmp.model.macro_p, cmp.model.macro_r, cmp.model.macro_f1);
  out += avg;
  std::snprintf(avg, sizeof avg,
                "  avg  %6.4f  %6.4f  %6.4f  %6.4f  %6.4f  %6.4f   (weighted)\n",
                cmp.human.weighted_p, cmp.human.weighted_r, cmp.human.weighted_f1,
                cmp.model.weighted_p, cmp.model.weighted_r,
                cmp.model.weighted_f1);
  out += avg;
  out += "\n";
  out += "tweets compared: " + std::to_string(cmp.compared) +
         ", ties excluded: " + std::to_string(cmp.tie_tweets) + "\n";
  out += "pairwise agreement: " + fmt("%.4f", cmp.agreement) + "\n\n";
  out += "chosen vs support (class / support / human chose / model chose):\n";
  for (std::size_t c = 0; c < labels.size(); ++c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%5zu  %7lld  %7lld  %7lld   %s\n", c,
                  static_cast<long long>(cmp.human.matrix.row_sum(c)),
                  static_cast<long long>(cmp.human.matrix.col_sum(c)),
                  static_cast<long long>(cmp.model.matrix.col_sum(c)),
                  labels.emoji(static_cast<int>(c)).c_str());
    out += buf;
  }
  out += "\nhuman ";
  append_matrix_text(out, cmp.human.matrix);
  out += "\nmodel ";
  append_matrix_text(out, cmp.model.matrix);
  return out;
}

}  // namespace emopred
