#include "hoaxnet/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hoaxnet {

namespace {

void check_inputs(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("metrics: length mismatch (" + std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
  }
  if (a == 0) throw std::invalid_argument("metrics: empty input");
}

void check_label(int v) {
  if (v != 0 && v != 1) throw std::invalid_argument("metrics: labels must be 0 or 1, got " + std::to_string(v));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

ConfusionResult confusion_and_accuracy(std::span<const int> pred, std::span<const int> truth) {
  check_inputs(pred.size(), truth.size());
  ConfusionResult r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    check_label(pred[i]);
    check_label(truth[i]);
    ++r.matrix.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
  }
  r.accuracy = static_cast<double>(r.matrix.tp() + r.matrix.tn()) / static_cast<double>(pred.size());
  return r;
}

double f1_score(std::span<const int> pred, std::span<const int> truth) {
  const auto m = confusion_and_accuracy(pred, truth).matrix;
  // 2PR / (P + R) == 2TP / (2TP + FP + FN).
  const std::int64_t denom = 2 * m.tp() + m.fp() + m.fn();
  if (m.tp() == 0 || denom == 0) return 0.0;
  return static_cast<double>(2 * m.tp()) / static_cast<double>(denom);
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> truth) {
  check_inputs(scores.size(), truth.size());
  std::int64_t positives = 0;
  for (int t : truth) {
    check_label(t);
    positives += t;
  }
  const std::int64_t negatives = static_cast<std::int64_t>(truth.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("roc_auc: both classes must be present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  std::int64_t tp = 0, fp = 0, twice_area = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    std::int64_t dtp = 0, dfp = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (truth[order[i]] == 1) ++dtp; else ++dfp;
    }
    // Trapezoid between (fp, tp) and (fp + dfp, tp + dtp), in counts.
    twice_area += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                          static_cast<double>(tp) / static_cast<double>(positives)});
  }
  roc.auc_numerator = twice_area;
  roc.auc_denominator = 2 * positives * negatives;
  roc.auc = static_cast<double>(roc.auc_numerator) / static_cast<double>(roc.auc_denominator);
  return roc;
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> pred,
                    std::span<const int> truth) {
  EvalReport r;
  const auto cm = confusion_and_accuracy(pred, truth);
  r.confusion = cm.matrix;
  r.accuracy = cm.accuracy;
  r.f1 = f1_score(pred, truth);
  r.roc = roc_auc(scores, truth);
  return r;
}

std::string EvalReport::to_key_value() const {
  std::ostringstream out;
  out << "samples=" << confusion.total() << '\n'
      << "accuracy=" << fmt(accuracy) << '\n'
      << "f1=" << fmt(f1) << '\n'
      << "auc=" << fmt(roc.auc) << '\n'
      << "tn=" << confusion.tn() << '\n'
      << "fp=" << confusion.fp() << '\n'
      << "fn=" << confusion.fn() << '\n'
      << "tp=" << confusion.tp() << '\n'
      << "positive_class=true\n";
  return out.str();
}

std::string EvalReport::roc_csv() const {
  std::ostringstream out;
  out << "fpr,tpr\n";
  for (const auto& p : roc.points) out << fmt(p.fpr) << ',' << fmt(p.tpr) << '\n';
  return out.str();
}

}  // namespace hoaxnet
