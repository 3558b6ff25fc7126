#pragma once

// Levenshtein distance with unit insertion / deletion / substitution costs,
// and the two feature transforms built on it:
//   direct feature  phi_w(x) = d(x, w)
//   soft feature    phi_w(x) = exp(-gamma * d(x, w))
//
// The DP keeps a single rolling row over the shorter argument, so a data
// string of length L against a reference string of length D costs O(L*D)
// time and O(min(L, D)) memory. Distances stay integral until `feature`.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rse/errors.hpp"

namespace rse {

namespace detail {

template <class Row>
std::uint32_t levenshtein_rolling(std::string_view longer, std::string_view shorter, Row& row) {
  const std::size_t m = shorter.size();
  for (std::size_t j = 0; j <= m; ++j) row[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 0; i < longer.size(); ++i) {
    const char c = longer[i];
    std::uint32_t diag = row[0];
    std::uint32_t left = static_cast<std::uint32_t>(i + 1);
    row[0] = left;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t up = row[j];
      const std::uint32_t sub = diag + (c != shorter[j - 1] ? 1u : 0u);
      left = std::min(std::min(up, left) + 1u, sub);
      row[j] = left;
      diag = up;
    }
  }
  return row[m];
}

}  // namespace detail

inline std::uint32_t levenshtein(std::string_view x, std::string_view w) {
  if (x.size() < w.size()) std::swap(x, w);
  if (w.empty()) return static_cast<std::uint32_t>(x.size());
  constexpr std::size_t kStackRow = 256;
  if (w.size() < kStackRow) {
    std::array<std::uint32_t, kStackRow> row;
    return detail::levenshtein_rolling(x, w, row);
  }
  std::vector<std::uint32_t> row(w.size() + 1);
  return detail::levenshtein_rolling(x, w, row);
}

enum class FeatureMap { direct, soft };

inline const char* to_string(FeatureMap m) { return m == FeatureMap::direct ? "DF" : "SF"; }

inline FeatureMap parse_feature_map(std::string_view s) {
  if (s == "DF" || s == "df" || s == "direct") return FeatureMap::direct;
  if (s == "SF" || s == "sf" || s == "soft") return FeatureMap::soft;
  throw ArgumentError("unknown feature map '" + std::string(s) + "' (expected DF or SF)");
}

struct FeatureParams {
  FeatureMap map = FeatureMap::soft;
  double gamma = 1.0;  // only read by the soft map

  void validate() const {
    if (map == FeatureMap::soft && !(gamma > 0.0 && std::isfinite(gamma)))
      throw ArgumentError("gamma must be positive for SF features, got " + std::to_string(gamma));
  }

  friend bool operator==(const FeatureParams&, const FeatureParams&) = default;
};

inline double feature_from_distance(std::uint32_t d, const FeatureParams& params) {
  if (params.map == FeatureMap::direct) return static_cast<double>(d);
  return std::exp(-params.gamma * static_cast<double>(d));
}

inline double feature(std::string_view x, std::string_view w, const FeatureParams& params) {
  return feature_from_distance(levenshtein(x, w), params);
}

}  // namespace rse
