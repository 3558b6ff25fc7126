#pragma once

// Reference Levenshtein distance: the full (|x|+1) x (|w|+1) table filled
// directly from the recursion. Slow and memory-hungry on purpose; it exists
// to cross-check `rse::levenshtein` and shares no code with it.

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <vector>

namespace rse {

inline std::uint32_t naive_levenshtein_oracle(std::string_view x, std::string_view w) {
  const std::size_t n = x.size();
  const std::size_t m = w.size();
  std::vector<std::vector<std::uint32_t>> d(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      if (i == 0 || j == 0) {
        d[i][j] = static_cast<std::uint32_t>(std::max(i, j));
        continue;
      }
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (x[i - 1] != w[j - 1] ? 1u : 0u)});
    }
  }
  return d[n][m];
}

}  // namespace rse
