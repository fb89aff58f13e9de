#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace testing {

// (2 * wins + ties, 2 * P * N) over every positive/negative pair.
inline std::pair<std::int64_t, std::int64_t> pairwise_auc(std::span<const double> scores,
                                                         std::span<const int> truth) {
  std::int64_t twice = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (truth[i] == 1) ++pos; else ++neg;
    if (truth[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (truth[j] != 0) continue;
      if (scores[i] > scores[j]) twice += 2;
      else if (scores[i] == scores[j]) twice += 1;
    }
  }
  return {twice, 2 * pos * neg};
}

}  // namespace testing
