#pragma once

// One-vs-rest linear SVM on embeddings.
//
// Each binary problem is the L2-regularized L1-hinge SVM
//     min_w  1/2 |w|^2 + C * sum_i max(0, 1 - y_i w.x_i)
// solved by dual coordinate descent over
//     min_a  1/2 |sum_i a_i y_i x_i|^2 - sum_i a_i,   0 <= a_i <= C.
// The bias is the weight of an appended constant feature equal to 1.
// Training stops when the duality gap falls to `tolerance * max(1, primal)`
// or after `max_epochs` passes. Coordinates are visited in a fresh seeded
// permutation every epoch.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rse/embedding.hpp"
#include "rse/errors.hpp"
#include "rse/ingest.hpp"
#include "rse/parallel.hpp"
#include "rse/rng.hpp"
#include "rse/sampler.hpp"

namespace rse {

struct TrainOptions {
  double reg_c = 1.0;
  std::size_t max_epochs = 1000;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct BinarySolution {
  std::vector<double> w;  // dim + 1 entries, bias last
  std::size_t epochs = 0;
  double primal = 0;
  double dual = 0;  // sum(a) - 1/2 |w|^2
  bool converged = false;
  std::vector<double> dual_objective;  // minimized form, one entry per epoch
};

namespace detail {

inline double dot_with_bias(std::span<const double> w, std::span<const double> x) {
  double s = w[x.size()];
  for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * x[k];
  return s;
}

inline double primal_objective(const EmbeddingMatrix& x, std::span<const std::int8_t> y, std::span<const double> w,
                               double c, double w_sq) {
  double loss = 0;
  for (std::size_t i = 0; i < x.rows; ++i) loss += std::max(0.0, 1.0 - y[i] * dot_with_bias(w, x.row(i)));
  return 0.5 * w_sq + c * loss;
}

// Exact line search along alpha_i += y_i t, alpha_j -= y_j t for consecutive
// pairs of `order`. The step leaves sum(y alpha) fixed, so w moves along
// z_i - z_j and the bias coordinate is untouched. Rows that share a large
// common component make single-coordinate steps crawl along that direction;
// these steps do not see it.
inline void pair_sweep(const EmbeddingMatrix& x, std::span<const std::int8_t> y, double c,
                       std::span<const std::size_t> order, std::span<const double> qd, std::vector<double>& alpha,
                       std::vector<double>& w) {
  const std::size_t dim = x.cols;
  for (std::size_t s = 0; s + 1 < order.size(); s += 2) {
    const std::size_t i = order[s], j = order[s + 1];
    const auto xi = x.row(i), xj = x.row(j);
    double wi = 0, wj = 0, xij = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      wi += w[k] * xi[k];
      wj += w[k] * xj[k];
      xij += xi[k] * xj[k];
    }
    const double curv = (qd[i] - 1.0) + (qd[j] - 1.0) - 2.0 * xij;
    if (curv <= 1e-15) continue;
    double t = -((wi - y[i]) - (wj - y[j])) / curv;
    // keep both alphas inside [0, c]
    const double lo_i = y[i] > 0 ? -alpha[i] : alpha[i] - c, hi_i = y[i] > 0 ? c - alpha[i] : alpha[i];
    const double lo_j = y[j] > 0 ? alpha[j] - c : -alpha[j], hi_j = y[j] > 0 ? alpha[j] : c - alpha[j];
    t = std::clamp(t, std::max(lo_i, lo_j), std::min(hi_i, hi_j));
    if (t == 0.0) continue;
    alpha[i] = std::clamp(alpha[i] + y[i] * t, 0.0, c);
    alpha[j] = std::clamp(alpha[j] - y[j] * t, 0.0, c);
    for (std::size_t k = 0; k < dim; ++k) w[k] += t * (xi[k] - xj[k]);
  }
}

}  // namespace detail

inline constexpr std::size_t kGapCheckInterval = 16;
inline constexpr double kShrinkResetSpread = 1e-3;

inline BinarySolution solve_binary(const EmbeddingMatrix& x, std::span<const std::int8_t> y, const TrainOptions& opt,
                                   RandomStream& rng, bool keep_trace = false) {
  const std::size_t n = x.rows;
  const std::size_t dim = x.cols;
  const double c = opt.reg_c;
  BinarySolution sol;
  sol.w.assign(dim + 1, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    qd[i] = 1.0 + std::inner_product(xi.begin(), xi.end(), xi.begin(), 0.0);
  }
  // Active set with shrinking: a coordinate stuck at a bound whose gradient
  // points outward past last epoch's extremes is dropped until the next
  // full sweep.
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), std::size_t{0});
  double pg_max_old = std::numeric_limits<double>::infinity();
  double pg_min_old = -std::numeric_limits<double>::infinity();

  auto& w = sol.w;
  while (sol.epochs < opt.max_epochs) {
    rng.shuffle(active.begin(), active.end());
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    std::size_t kept = 0;
    for (std::size_t s = 0; s < active.size(); ++s) {
      const std::size_t i = active[s];
      const auto xi = x.row(i);
      const double g = y[i] * detail::dot_with_bias(w, xi) - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) {
        if (g > pg_max_old) continue;
        pg = std::min(g, 0.0);
      } else if (alpha[i] == c) {
        if (g < pg_min_old) continue;
        pg = std::max(g, 0.0);
      }
      active[kept++] = i;
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) <= 1e-12) continue;
      const double old = alpha[i];
      alpha[i] = std::min(std::max(old - g / qd[i], 0.0), c);
      const double step = (alpha[i] - old) * y[i];
      for (std::size_t k = 0; k < dim; ++k) w[k] += step * xi[k];
      w[dim] += step;
    }
    active.resize(kept);
    if (kept >= 2) detail::pair_sweep(x, y, c, active, qd, alpha, w);
    ++sol.epochs;

    const double w_sq = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
    const double a_sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    sol.dual = a_sum - 0.5 * w_sq;
    if (keep_trace) sol.dual_objective.push_back(-sol.dual);
    const bool settled = active.empty() || pg_max - pg_min <= kShrinkResetSpread;
    // The primal pass costs a full sweep over the data, so the gap is only
    // checked periodically, when the active set looks solved, or at the cap.
    if (settled || sol.epochs % kGapCheckInterval == 0 || sol.epochs == opt.max_epochs) {
      sol.primal = detail::primal_objective(x, y, w, c, w_sq);
      if (sol.primal - sol.dual <= opt.tolerance * std::max(1.0, sol.primal)) {
        sol.converged = true;
        break;
      }
    }
    if (settled && active.size() < n) {
      active.resize(n);
      std::iota(active.begin(), active.end(), std::size_t{0});
      pg_max_old = std::numeric_limits<double>::infinity();
      pg_min_old = -std::numeric_limits<double>::infinity();
      continue;
    }
    pg_max_old = pg_max > 0 ? pg_max : std::numeric_limits<double>::infinity();
    pg_min_old = pg_min < 0 ? pg_min : -std::numeric_limits<double>::infinity();
  }
  return sol;
}

struct LinearModel {
  std::size_t num_classes = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // num_classes x dim, row-major
  std::vector<double> bias;
  double reg_c = 1.0;
  std::vector<std::string> classes;

  [[nodiscard]] std::span<const double> weights_of(std::size_t c) const { return {weights.data() + c * dim, dim}; }

  [[nodiscard]] std::vector<double> scores(std::span<const double> z) const {
    std::vector<double> s(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
      const auto wc = weights_of(c);
      s[c] = bias[c] + std::inner_product(wc.begin(), wc.end(), z.begin(), 0.0);
    }
    return s;
  }

  // argmax of the class scores; ties go to the lowest class id.
  [[nodiscard]] int predict(std::span<const double> z) const {
    const auto s = scores(z);
    return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
  }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

inline LinearModel train(const EmbeddingMatrix& x, std::span<const int> labels, std::size_t num_classes,
                         const TrainOptions& opt) {
  if (!(opt.reg_c > 0)) throw ArgumentError("reg_C must be positive");
  if (labels.size() != x.rows)
    throw DimensionError("got " + std::to_string(labels.size()) + " labels for " + std::to_string(x.rows) + " rows");
  std::vector<bool> present(num_classes, false);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
      throw ArgumentError("label " + std::to_string(l) + " outside [0, " + std::to_string(num_classes) + ")");
    present[static_cast<std::size_t>(l)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2)
    throw ArgumentError("training needs at least 2 classes present");

  LinearModel model;
  model.num_classes = num_classes;
  model.dim = x.cols;
  model.reg_c = opt.reg_c;
  model.weights.assign(num_classes * x.cols, 0.0);
  model.bias.assign(num_classes, 0.0);
  parallel_for(num_classes, opt.workers, [&](std::size_t c) {
    std::vector<std::int8_t> y(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) y[i] = static_cast<std::size_t>(labels[i]) == c ? 1 : -1;
    RandomStream rng(opt.seed, "solver", c);
    const auto sol = solve_binary(x, y, opt, rng);
    std::copy_n(sol.w.begin(), x.cols, model.weights.begin() + static_cast<std::ptrdiff_t>(c * x.cols));
    model.bias[c] = sol.w[x.cols];
  });
  return model;
}

inline LinearModel train(const EmbeddingMatrix& x, std::size_t num_classes, const TrainOptions& opt) {
  return train(x, x.labels, num_classes, opt);
}

struct EvalReport {
  double accuracy = 0;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::vector<double> per_class_accuracy;
  std::vector<std::size_t> support;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

inline EvalReport evaluate(const LinearModel& model, const EmbeddingMatrix& z, std::span<const int> labels) {
  if (z.cols != model.dim)
    throw DimensionError("embedding has " + std::to_string(z.cols) + " columns but the model expects " +
                         std::to_string(model.dim));
  if (labels.size() != z.rows)
    throw DimensionError("got " + std::to_string(labels.size()) + " labels for " + std::to_string(z.rows) + " rows");
  const std::size_t k = model.num_classes;
  EvalReport r;
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  r.support.assign(k, 0);
  r.per_class_accuracy.assign(k, 0.0);
  for (std::size_t i = 0; i < z.rows; ++i) {
    const int truth = labels[i];
    if (truth < 0 || static_cast<std::size_t>(truth) >= k)
      throw ArgumentError("label " + std::to_string(truth) + " unknown to the model");
    const int pred = model.predict(z.row(i));
    ++r.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
    ++r.support[static_cast<std::size_t>(truth)];
    if (pred == truth) ++r.correct;
  }
  r.total = z.rows;
  r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  for (std::size_t c = 0; c < k; ++c)
    if (r.support[c]) r.per_class_accuracy[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(r.support[c]);
  return r;
}

inline EvalReport evaluate(const LinearModel& model, const EmbeddingMatrix& z) { return evaluate(model, z, z.labels); }

inline nlohmann::ordered_json to_json(const EvalReport& r, std::span<const std::string> class_names = {}) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["correct"] = r.correct;
  j["total"] = r.total;
  j["per_class_accuracy"] = r.per_class_accuracy;
  j["support"] = r.support;
  j["confusion"] = r.confusion;
  if (!class_names.empty()) j["classes"] = std::vector<std::string>(class_names.begin(), class_names.end());
  return j;
}

// Text model file:
//   RSE-MODEL v1 num_classes=<k> R=<dim> reg_C=<c>
//   '#' comment lines (run configuration)
//   class <name>        (k lines, in class-id order)
//   bias <b_0> ... <b_k-1>
//   <w_c,1> ... <w_c,dim> (k lines)
inline void write_model(std::ostream& out, const LinearModel& m, std::string_view header = {}) {
  out << "RSE-MODEL v1 num_classes=" << m.num_classes << " R=" << m.dim << " reg_C=";
  detail::put_double(out, m.reg_c);
  out << '\n';
  std::istringstream lines{std::string(header)};
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  for (std::size_t c = 0; c < m.num_classes; ++c)
    out << "class " << (c < m.classes.size() ? m.classes[c] : std::to_string(c)) << '\n';
  out << "bias";
  for (double b : m.bias) {
    out << ' ';
    detail::put_double(out, b);
  }
  out << '\n';
  for (std::size_t c = 0; c < m.num_classes; ++c) {
    const auto wc = m.weights_of(c);
    for (std::size_t k = 0; k < m.dim; ++k) {
      if (k) out << ' ';
      detail::put_double(out, wc[k]);
    }
    out << '\n';
  }
}

inline LinearModel read_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next()) throw FormatError("empty model file");
  const auto head = detail::split_ws(line);
  if (head.size() != 5 || head[0] != "RSE-MODEL" || head[1] != "v1" || head[2].rfind("num_classes=", 0) != 0 ||
      head[3].rfind("R=", 0) != 0 || head[4].rfind("reg_C=", 0) != 0)
    throw FormatError("line " + std::to_string(line_no) + ": expected 'RSE-MODEL v1 num_classes=<k> R=<n> reg_C=<c>'");
  LinearModel m;
  try {
    m.num_classes = static_cast<std::size_t>(detail::get_long(head[2].substr(12), line_no));
    m.dim = static_cast<std::size_t>(detail::get_long(head[3].substr(2), line_no));
    m.reg_c = detail::get_double(head[4].substr(6), line_no);
    for (std::size_t c = 0; c < m.num_classes; ++c) {
      if (!next() || line.rfind("class ", 0) != 0) throw FormatError("line " + std::to_string(line_no) + ": expected 'class <name>'");
      m.classes.push_back(line.substr(6));
    }
    if (!next() || line.rfind("bias", 0) != 0) throw FormatError("line " + std::to_string(line_no) + ": expected bias row");
    for (auto tok : detail::split_ws(std::string_view(line).substr(4))) m.bias.push_back(detail::get_double(tok, line_no));
    if (m.bias.size() != m.num_classes) throw FormatError("line " + std::to_string(line_no) + ": wrong bias count");
    m.weights.reserve(m.num_classes * m.dim);
    for (std::size_t c = 0; c < m.num_classes; ++c) {
      if (!next()) throw FormatError("truncated model file: missing weight row " + std::to_string(c));
      const auto toks = detail::split_ws(line);
      if (toks.size() != m.dim)
        throw FormatError("line " + std::to_string(line_no) + ": weight row has " + std::to_string(toks.size()) +
                          " values, expected " + std::to_string(m.dim));
      for (auto tok : toks) m.weights.push_back(detail::get_double(tok, line_no));
    }
  } catch (const ParseError& e) {
    throw FormatError(e.what());
  }
  return m;
}

inline void save_model(const std::filesystem::path& path, const LinearModel& m, std::string_view header = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  write_model(out, m, header);
}

inline LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open model file '" + path.string() + "'");
  return read_model(in);
}

// ---------------------------------------------------------------------------
// Cross-validation over (gamma, d_max, reg_C).

struct HyperGrid {
  std::vector<double> gammas;
  std::vector<std::size_t> d_maxes;
  std::vector<double> reg_cs;
};

struct CvPoint {
  double gamma = 0;
  std::size_t d_max = 0;
  double reg_c = 0;
  double mean_accuracy = 0;
};

struct CvResult {
  CvPoint best;
  std::vector<CvPoint> all;
};

// Fold id of every index: a seeded shuffle dealt round-robin.
inline std::vector<std::size_t> make_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
  if (n < folds) throw ArgumentError("fewer records than folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RandomStream rng(seed, "cv");
  rng.shuffle(order.begin(), order.end());
  std::vector<std::size_t> fold(n);
  for (std::size_t k = 0; k < n; ++k) fold[order[k]] = k % folds;
  return fold;
}

// Selects the grid point with the highest mean validation accuracy over the
// folds of `ds.train` (first point wins ties). Banks are drawn from each
// fold's training part only. DF features ignore the gamma axis.
inline CvResult cross_validate(const SequenceDataset& ds, const SamplerConfig& sampler, const FeatureParams& features,
                               const HyperGrid& grid, std::size_t folds, std::size_t r, const TrainOptions& base) {
  const bool soft = features.map == FeatureMap::soft;
  if (grid.d_maxes.empty() || grid.reg_cs.empty() || (soft && grid.gammas.empty()))
    throw ArgumentError("hyperparameter grid is empty");
  const std::vector<double> gammas = soft ? grid.gammas : std::vector<double>{features.gamma};
  const auto fold_of = make_folds(ds.train.size(), folds, sampler.seed);

  CvResult result;
  for (std::size_t d_max : grid.d_maxes)
    for (double g : gammas)
      for (double c : grid.reg_cs) result.all.push_back({g, d_max, c, 0.0});

  std::size_t point = 0;
  for (std::size_t di = 0; di < grid.d_maxes.size(); ++di) {
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<LabeledString> fit, held;
      for (std::size_t i = 0; i < ds.train.size(); ++i) (fold_of[i] == f ? held : fit).push_back(ds.train[i]);
      const auto fold_ds = make_dataset(std::move(fit), {}, ds.class_names, &ds.alphabet);
      SamplerConfig sc = sampler;
      sc.d_max = grid.d_maxes[di];
      const auto bank = build_bank(fold_ds, sc, r, base.workers);
      const auto fit_d = compute_distances(views_of(fold_ds.train), bank.strings, base.workers);
      const auto held_d = compute_distances(views_of(held), bank.strings, base.workers);
      std::vector<int> fit_labels, held_labels;
      for (const auto& s : fold_ds.train) fit_labels.push_back(s.label);
      for (const auto& s : held) held_labels.push_back(s.label);

      std::size_t p = point;
      for (double g : gammas) {
        FeatureParams fp{features.map, g};
        const auto fit_z = features_from_distances(fit_d, fp);
        const auto held_z = features_from_distances(held_d, fp);
        for (double c : grid.reg_cs) {
          TrainOptions opt = base;
          opt.reg_c = c;
          const auto model = train(fit_z, fit_labels, ds.num_classes(), opt);
          result.all[p++].mean_accuracy += evaluate(model, held_z, held_labels).accuracy / static_cast<double>(folds);
        }
      }
    }
    point += gammas.size() * grid.reg_cs.size();
  }
  result.best = result.all.front();
  for (const auto& p : result.all)
    if (p.mean_accuracy > result.best.mean_accuracy) result.best = p;
  return result;
}

}  // namespace rse
