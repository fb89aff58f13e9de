// Paired runs on the synthetic corpus: for each seed, the validation accuracy
// of a short LSTM run with default hyperparameters against the best short run
// found by `tune` with the same seed, epochs and data.

#include <cstdio>
#include <iostream>

#include "cli_support.hpp"
#include "support.hpp"

int main() {
  int wins = 0;
  bool ok = true;
  for (int seed = 1; seed <= 10; ++seed) {
    testing::TempDir dir("tune-exp");
    const std::string s = std::to_string(seed), conf = (dir / "hoaxnet.conf").string();
    testing::run({"gen-synthetic", "--out", dir.path().string(), "--count", "2000", "--seed", s});
    testing::append(conf, "train.max_epochs=3\ntune.epochs=3\ntune.budget=10\ntune.n_init=3\n");
    const auto pre = testing::run({"preprocess", "--config", conf});
    const auto base = testing::run({"train", "--config", conf, "--arch", "lstm"});
    const auto tuned = testing::run({"tune", "--config", conf, "--arch", "lstm"});
    if (pre.code != 0 || base.code != 0 || tuned.code != 0) {
      std::cout << "seed " << seed << ": command failed: " << pre.err << base.err << tuned.err << '\n';
      ok = false;
      break;
    }
    const double def = std::stod(testing::key_values(testing::slurp(dir / "work" / "train_report.txt"))
                                     .at("best_validation_accuracy"));
    const double best = std::stod(testing::key_values(testing::slurp(dir / "work" / "best_params.txt")).at("objective"));
    if (best > def) ++wins;
    std::printf("seed %d: default %.4f tuned %.4f\n", seed, def, best);
  }
  ok = ok && wins >= 6;
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " tuned LSTM beats default hyperparameters on validation accuracy for "
            << wins << "/10 seeds (need >= 6)" << std::endl;
  return ok ? 0 : 1;
}
