#pragma once

// Binary classification metrics. The positive class is label 1 (true news).

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hoaxnet {

struct ConfusionMatrix {
  // counts[truth][prediction]: [[TN, FP], [FN, TP]].
  std::array<std::array<std::int64_t, 2>, 2> counts{};

  std::int64_t tn() const { return counts[0][0]; }
  std::int64_t fp() const { return counts[0][1]; }
  std::int64_t fn() const { return counts[1][0]; }
  std::int64_t tp() const { return counts[1][1]; }
  std::int64_t total() const { return tn() + fp() + fn() + tp(); }
};

struct ConfusionResult {
  ConfusionMatrix matrix;
  double accuracy = 0.0;
};

ConfusionResult confusion_and_accuracy(std::span<const int> pred, std::span<const int> truth);

// 0 when precision + recall is 0.
double f1_score(std::span<const int> pred, std::span<const int> truth);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  // auc == auc_numerator / auc_denominator exactly, denominator = 2 * P * N.
  std::int64_t auc_numerator = 0;
  std::int64_t auc_denominator = 1;
};

// Threshold sweep over distinct scores in descending order, one point per
// distinct score, trapezoidal area. Throws if only one class is present.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> truth);

struct EvalReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  ConfusionMatrix confusion;
  RocCurve roc;

  std::string to_key_value() const;
  // "fpr,tpr" header plus one row per ROC point.
  std::string roc_csv() const;
};

// Predictions are argmax labels; scores are P(true).
EvalReport evaluate(std::span<const double> scores, std::span<const int> pred,
                    std::span<const int> truth);

}  // namespace hoaxnet
