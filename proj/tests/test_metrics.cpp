#include <doctest.h>

#include "auc_oracle.hpp"
#include "hoaxnet/metrics.hpp"
#include "support.hpp"

using namespace hoaxnet;
using V = std::vector<int>;

TEST_CASE("confusion matrix and accuracy") {
  const V truth = {1, 0, 0, 1};
  auto r = confusion_and_accuracy(truth, truth);
  CHECK(r.accuracy == 1.0);
  CHECK(r.matrix.fp() == 0);
  CHECK(r.matrix.fn() == 0);
  const V flipped = {0, 1, 1, 0};
  r = confusion_and_accuracy(flipped, truth);
  CHECK(r.accuracy == 0.0);
  CHECK(r.matrix.tp() + r.matrix.tn() == 0);
  r = confusion_and_accuracy(V{1, 0, 1, 1}, truth);
  CHECK(r.matrix.counts[0][0] == 1);
  CHECK(r.matrix.counts[0][1] == 1);
  CHECK(r.matrix.counts[1][0] == 0);
  CHECK(r.matrix.counts[1][1] == 2);
  CHECK(r.accuracy == 0.75);
  CHECK_THROWS(confusion_and_accuracy(V{1}, truth));
  CHECK_THROWS(confusion_and_accuracy(V{2, 0, 0, 0}, truth));
}

TEST_CASE("f1") {
  CHECK(f1_score(V{1, 0, 1}, V{1, 0, 1}) == 1.0);
  CHECK(f1_score(V{0, 0, 0}, V{1, 0, 1}) == 0.0);
  CHECK(f1_score(V{1, 0, 1, 1}, V{1, 0, 0, 1}) == doctest::Approx(0.8));
  CHECK_THROWS(f1_score(V{1, 0}, V{1}));
}

TEST_CASE("roc examples") {
  const std::vector<double> ordered = {0.9, 0.8, 0.3, 0.1};
  const V truth = {1, 1, 0, 0};
  const auto roc = roc_auc(ordered, truth);
  CHECK(roc.auc == 1.0);
  CHECK(roc.points.front().fpr == 0.0);
  CHECK(roc.points.front().tpr == 0.0);
  CHECK(roc.points.back().fpr == 1.0);
  CHECK(roc.points.back().tpr == 1.0);

  const std::vector<double> flat(6, 0.4);
  const auto tie = roc_auc(flat, V{1, 0, 1, 0, 0, 1});
  CHECK(tie.auc == 0.5);
  CHECK(tie.points.size() == 2);
  CHECK_THROWS(roc_auc(flat, V{1, 1, 1, 1, 1, 1}));
}

TEST_CASE("auc matches the pairwise oracle and its invariants") {
  testing::Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> scores(n);
    V truth(n);
    const std::size_t levels = 1 + rng.below(8);  // few levels: many ties
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.bernoulli(0.5) ? static_cast<double>(rng.below(levels)) / 8.0 : rng.uniform();
      truth[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    truth[0] = 1;
    truth[1] = 0;
    const auto roc = roc_auc(scores, truth);
    const auto [num, den] = testing::pairwise_auc(scores, truth);
    CHECK(roc.auc_numerator == num);
    CHECK(roc.auc_denominator == den);

    std::vector<double> squashed(n);
    for (std::size_t i = 0; i < n; ++i) squashed[i] = std::exp(3.0 * scores[i]) - 7.0;
    CHECK(roc_auc(squashed, truth).auc_numerator == num);

    V relabeled(n);
    for (std::size_t i = 0; i < n; ++i) relabeled[i] = 1 - truth[i];
    const auto inverse = roc_auc(scores, relabeled);
    CHECK(inverse.auc_numerator == den - num);

    V pred(n);
    for (std::size_t i = 0; i < n; ++i) pred[i] = scores[i] > 0.5 ? 1 : 0;
    const auto cm = confusion_and_accuracy(pred, truth);
    CHECK(cm.accuracy == static_cast<double>(cm.matrix.tn() + cm.matrix.tp()) / static_cast<double>(n));
    CHECK(cm.matrix.total() == static_cast<std::int64_t>(n));
  }
}

TEST_CASE("report rendering") {
  const std::vector<double> scores = {0.9, 0.2, 0.6, 0.4};
  const V truth = {1, 0, 0, 1};
  const V pred = {1, 0, 1, 0};
  const auto r = evaluate(scores, pred, truth);
  const auto kv = r.to_key_value();
  CHECK(kv.find("accuracy=0.5\n") != std::string::npos);
  CHECK(kv.find("positive_class=true") != std::string::npos);
  const auto csv = r.roc_csv();
  CHECK(csv.rfind("fpr,tpr\n0,0\n", 0) == 0);
  CHECK(csv.size() >= 4);
  CHECK(csv.substr(csv.size() - 4) == "1,1\n");
}
