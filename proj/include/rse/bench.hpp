#pragma once

// Scaling measurements for the embedding step. Only `embed` is timed;
// dataset generation and bank sampling happen outside the measured region.

#include <chrono>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rse/embedding.hpp"
#include "rse/errors.hpp"
#include "rse/ingest.hpp"
#include "rse/rng.hpp"
#include "rse/sampler.hpp"
#include "rse/stats.hpp"

namespace rse {

// Protein one-letter codes first, so a size-20 alphabet matches protein data.
inline constexpr std::string_view kSyntheticSymbols =
    "ACDEFGHIKLMNPQRSTVWYBJOUXZabcdefghijklmnopqrstuvwxyz0123456789";

inline SequenceDataset gen_synthetic(std::size_t n, std::size_t length, std::size_t alphabet_size, std::uint64_t seed) {
  if (n < 1 || length < 1 || alphabet_size < 1) throw ArgumentError("synthetic sizes must be at least 1");
  if (alphabet_size > kSyntheticSymbols.size())
    throw ArgumentError("synthetic alphabet is limited to " + std::to_string(kSyntheticSymbols.size()) + " symbols");
  const Alphabet alphabet(kSyntheticSymbols.substr(0, alphabet_size));
  std::vector<LabeledString> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng(seed, "synthetic", i);
    records[i].chars = sample_rf(alphabet, length, rng);
  }
  return make_dataset(std::move(records), {}, {"0"}, &alphabet);
}

enum class ScalingAxis { n, l, r };

inline ScalingAxis parse_scaling_axis(std::string_view s) {
  if (s == "n" || s == "N") return ScalingAxis::n;
  if (s == "l" || s == "L") return ScalingAxis::l;
  if (s == "r" || s == "R") return ScalingAxis::r;
  throw ArgumentError("unknown scaling axis '" + std::string(s) + "' (expected n, l or r)");
}

inline const char* to_string(ScalingAxis a) {
  switch (a) {
    case ScalingAxis::n: return "N";
    case ScalingAxis::l: return "L";
    case ScalingAxis::r: return "R";
  }
  return "?";
}

struct ScalingParams {
  std::size_t n = 10000;
  std::size_t length = 512;
  std::size_t alphabet_size = 20;
  std::size_t d_max = 10;
  std::size_t r = 256;
  std::size_t repeats = 3;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  FeatureParams features{FeatureMap::soft, 1.0};
};

struct ScalingRun {
  ScalingAxis axis = ScalingAxis::n;
  std::vector<std::size_t> grid;
  std::vector<std::vector<double>> run_seconds;  // [grid point][repeat]
  std::vector<double> wall_times;                // median per grid point
  double fitted_slope = 0;
  double r2 = 0;
  std::size_t workers = 1;
};

inline ScalingRun run_scaling(ScalingAxis axis, std::span<const std::size_t> grid, const ScalingParams& p) {
  if (grid.size() < 4) throw ArgumentError("scaling grid needs at least 4 points");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (grid[k] <= grid[k - 1]) throw ArgumentError("scaling grid must be strictly increasing");
  if (p.repeats < 1) throw ArgumentError("need at least one repeat");

  ScalingRun run;
  run.axis = axis;
  run.grid.assign(grid.begin(), grid.end());
  run.workers = p.workers;

  auto measure = [&](std::size_t size, std::size_t repeats) {
    const std::size_t n = axis == ScalingAxis::n ? size : p.n;
    const std::size_t len = axis == ScalingAxis::l ? size : p.length;
    const std::size_t r = axis == ScalingAxis::r ? size : p.r;
    const auto ds = gen_synthetic(n, len, p.alphabet_size, p.seed);
    const auto bank = build_bank(ds, SamplerConfig{Strategy::rf, p.d_max, p.seed}, r, p.workers);
    std::vector<double> secs;
    for (std::size_t k = 0; k < repeats; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto z = embed(ds.train, bank, p.features, p.workers);
      const auto t1 = std::chrono::steady_clock::now();
      if (z.rows != n) throw Error("embedding produced the wrong row count");
      secs.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    return secs;
  };

  measure(grid.front(), 1);  // warm-up
  for (std::size_t size : grid) {
    run.run_seconds.push_back(measure(size, p.repeats));
    run.wall_times.push_back(median(run.run_seconds.back()));
  }
  std::vector<double> xs(grid.begin(), grid.end());
  const auto fit = fit_loglog(xs, run.wall_times);
  run.fitted_slope = fit.slope;
  run.r2 = fit.r2;
  return run;
}

// CSV rows `size,run,seconds` followed by a summary line.
inline void write_scaling_csv(std::ostream& out, const ScalingRun& run) {
  out << "size,run,seconds\n";
  for (std::size_t g = 0; g < run.grid.size(); ++g)
    for (std::size_t k = 0; k < run.run_seconds[g].size(); ++k)
      out << run.grid[g] << ',' << k << ',' << run.run_seconds[g][k] << '\n';
  out << "# axis=" << to_string(run.axis) << " slope=" << run.fitted_slope << " r2=" << run.r2
      << " workers=" << run.workers << '\n';
}

}  // namespace rse
