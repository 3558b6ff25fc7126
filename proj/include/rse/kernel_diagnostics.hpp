#pragma once

// Diagnostics for the random-string kernel:
//  - Monte-Carlo kernel estimates with standard errors,
//  - Gram matrices and their spectra (the embedding Gram is PSD by
//    construction; edit-distance substitution kernels need not be),
//  - an empirical convergence-rate harness over nested banks.
//
// The convergence harness only accepts SF features. Its rate argument needs
// bounded features (|phi| <= 1), which DF features do not satisfy.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rse/edit_distance.hpp"
#include "rse/embedding.hpp"
#include "rse/errors.hpp"
#include "rse/sampler.hpp"
#include "rse/stats.hpp"

namespace rse {

struct KernelEstimate {
  double value = 0;
  std::size_t r_used = 0;
  double std_error = 0;
};

// value = (1/R) sum_i phi_i(x) phi_i(y); std_error = sample std / sqrt(R).
inline KernelEstimate estimate_kernel(std::string_view x, std::string_view y, const RandomStringBank& bank,
                                      const FeatureParams& params) {
  if (bank.empty()) throw ArgumentError("kernel estimate needs a non-empty bank");
  params.validate();
  const std::size_t r = bank.size();
  std::vector<double> terms(r);
  double sum = 0;
  for (std::size_t i = 0; i < r; ++i) {
    terms[i] = feature(x, bank.strings[i], params) * feature(y, bank.strings[i], params);
    sum += terms[i];
  }
  KernelEstimate k;
  k.r_used = r;
  k.value = sum / static_cast<double>(r);
  if (r > 1) {
    double ss = 0;
    for (double t : terms) ss += (t - k.value) * (t - k.value);
    k.std_error = std::sqrt(ss / static_cast<double>(r - 1)) / std::sqrt(static_cast<double>(r));
  }
  return k;
}

struct GramMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  [[nodiscard]] bool is_symmetric(double tol) const {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs(at(i, j) - at(j, i)) > tol) return false;
    return true;
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline GramMatrix gram_from_embedding(const EmbeddingMatrix& z) {
  GramMatrix g{z.rows, std::vector<double>(z.rows * z.rows)};
  for (std::size_t i = 0; i < z.rows; ++i)
    for (std::size_t j = i; j < z.rows; ++j) g.values[i * g.n + j] = g.values[j * g.n + i] = dot(z.row(i), z.row(j));
  return g;
}

inline GramMatrix gram_matrix(std::span<const std::string> strings, const RandomStringBank& bank,
                              const FeatureParams& params, std::size_t workers = 1) {
  if (strings.size() < 2) throw ArgumentError("Gram matrix needs at least 2 strings");
  if (bank.empty()) throw ArgumentError("Gram matrix needs a non-empty bank");
  const auto views = views_of(strings);
  return gram_from_embedding(features_from_distances(compute_distances(views, bank.strings, workers), params));
}

// Ascending eigenvalues of a symmetric matrix.
inline std::vector<double> symmetric_eigenvalues(const GramMatrix& g) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(g.n), static_cast<Eigen::Index>(g.n));
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("symmetric eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

// Eigenvalue floor below which a Gram matrix is reported as not PSD.
inline constexpr double kPsdTolerance = -1e-8;

// mean(diagonal) / mean(off-diagonal).
inline double diagonal_dominance_ratio(const GramMatrix& g) {
  if (g.n < 2) throw ArgumentError("diagonal dominance needs at least 2 rows");
  double diag = 0, off = 0;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) (i == j ? diag : off) += g.at(i, j);
  diag /= static_cast<double>(g.n);
  off /= static_cast<double>(g.n * (g.n - 1));
  return diag / off;
}

enum class SubstitutionKernel { gaussian, laplacian };

inline SubstitutionKernel parse_substitution_kernel(std::string_view s) {
  if (s == "gaussian") return SubstitutionKernel::gaussian;
  if (s == "laplacian") return SubstitutionKernel::laplacian;
  throw ArgumentError("unknown substitution kernel '" + std::string(s) + "' (expected gaussian or laplacian)");
}

// exp(-gamma d^2) or exp(-gamma d) with d the edit distance.
inline double distance_substitution_kernel(std::string_view x, std::string_view y, SubstitutionKernel kind,
                                           double gamma) {
  if (!(gamma > 0)) throw ArgumentError("gamma must be positive");
  const double d = levenshtein(x, y);
  return std::exp(-gamma * (kind == SubstitutionKernel::gaussian ? d * d : d));
}

inline GramMatrix distance_substitution_gram(std::span<const std::string> strings, SubstitutionKernel kind,
                                             double gamma) {
  GramMatrix g{strings.size(), std::vector<double>(strings.size() * strings.size())};
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = i; j < g.n; ++j)
      g.values[i * g.n + j] = g.values[j * g.n + i] = distance_substitution_kernel(strings[i], strings[j], kind, gamma);
  return g;
}

// `count` pairs of distinct records drawn uniformly from `pool`.
inline std::vector<std::pair<std::string, std::string>> sample_probe_pairs(std::span<const LabeledString> pool,
                                                                           std::size_t count, std::uint64_t seed) {
  if (pool.size() < 2) throw ArgumentError("probe pool needs at least 2 strings");
  RandomStream rng(seed, "probes");
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto a = rng.below(pool.size());
    auto b = rng.below(pool.size() - 1);
    if (b >= a) ++b;
    pairs.emplace_back(pool[a].chars, pool[b].chars);
  }
  return pairs;
}

struct ConvergenceReport {
  std::vector<std::size_t> r_grid;
  std::vector<double> max_abs_error;
  std::vector<double> mean_abs_error;
  std::size_t r_ref = 0;
  double fitted_rate = 0;  // slope of log(max error) against log(R)
  double fit_r2 = 0;
};

// The reference estimate uses the whole bank; the estimate at R uses its
// first R strings, so the R-bank is nested inside the reference bank.
inline ConvergenceReport convergence_harness(std::span<const std::pair<std::string, std::string>> probe_pairs,
                                             const RandomStringBank& reference, const FeatureParams& params,
                                             std::span<const std::size_t> r_grid, std::size_t workers = 1) {
  params.validate();
  if (params.map != FeatureMap::soft) throw ArgumentError("convergence harness requires SF features");
  if (probe_pairs.empty()) throw ArgumentError("convergence harness needs at least one probe pair");
  if (r_grid.empty()) throw ArgumentError("R grid is empty");
  for (std::size_t k = 1; k < r_grid.size(); ++k)
    if (r_grid[k] <= r_grid[k - 1]) throw ArgumentError("R grid must be strictly increasing");
  if (r_grid.front() < 1) throw ArgumentError("R grid values must be positive");
  const std::size_t r_ref = reference.size();
  if (r_ref < 16 * r_grid.back())
    throw ArgumentError("R_ref = " + std::to_string(r_ref) + " must be at least 16 * max(R grid) = " +
                        std::to_string(16 * r_grid.back()));

  std::vector<std::string> unique;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = slot.try_emplace(s, unique.size());
    if (inserted) unique.push_back(s);
    return it->second;
  };
  for (const auto& [x, y] : probe_pairs) pairs.emplace_back(intern(x), intern(y));

  const auto views = views_of(unique);
  const DistanceMatrix d = compute_distances(views, reference.strings, workers);
  std::vector<double> phi(d.values.size());
  for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = feature_from_distance(d.values[k], params);

  ConvergenceReport report;
  report.r_grid.assign(r_grid.begin(), r_grid.end());
  report.r_ref = r_ref;
  report.max_abs_error.assign(r_grid.size(), 0.0);
  report.mean_abs_error.assign(r_grid.size(), 0.0);
  for (const auto& [a, b] : pairs) {
    const double* pa = phi.data() + a * r_ref;
    const double* pb = phi.data() + b * r_ref;
    double running = 0;
    std::size_t next = 0;
    std::vector<double> partial(r_grid.size());
    for (std::size_t i = 0; i < r_ref; ++i) {
      running += pa[i] * pb[i];
      if (next < r_grid.size() && i + 1 == r_grid[next]) partial[next++] = running / static_cast<double>(i + 1);
    }
    const double ref = running / static_cast<double>(r_ref);
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
      const double err = std::abs(partial[k] - ref);
      report.max_abs_error[k] = std::max(report.max_abs_error[k], err);
      report.mean_abs_error[k] += err / static_cast<double>(pairs.size());
    }
  }
  if (r_grid.size() >= 2) {
    std::vector<double> rs(r_grid.begin(), r_grid.end());
    const auto fit = fit_loglog(rs, report.max_abs_error);
    report.fitted_rate = fit.slope;
    report.fit_r2 = fit.r2;
  }
  return report;
}

}  // namespace rse
