#pragma once

// End-to-end runs: ingest -> sample -> embed -> train -> evaluate, and the
// eight-variant comparison (four samplers x two feature maps).

#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rse/config.hpp"
#include "rse/embedding.hpp"
#include "rse/errors.hpp"
#include "rse/ingest.hpp"
#include "rse/linear_classifier.hpp"
#include "rse/sampler.hpp"

namespace rse {

enum class Stage { config, ingest, sample, embed, train, eval, diagnostics, bench, output };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::config: return "config";
    case Stage::ingest: return "ingest";
    case Stage::sample: return "sample";
    case Stage::embed: return "embed";
    case Stage::train: return "train";
    case Stage::eval: return "eval";
    case Stage::diagnostics: return "diagnostics";
    case Stage::bench: return "bench";
    case Stage::output: return "output";
  }
  return "?";
}

// Process exit code for a failure in `s`; 0 is success, 1 is reserved for
// unexpected errors.
inline int exit_code(Stage s) { return 2 + static_cast<int>(s); }

class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what)
      : Error(std::string(to_string(stage)) + " stage failed: " + what), stage_(stage) {}
  [[nodiscard]] Stage stage() const noexcept { return stage_; }
  [[nodiscard]] int exit_code() const noexcept { return rse::exit_code(stage_); }

 private:
  Stage stage_;
};

template <class Fn>
auto run_stage(Stage stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

// Loads the configured dataset and, without a test file, applies the
// seeded split.
inline SequenceDataset load_run_dataset(const RunConfig& cfg) {
  return run_stage(Stage::ingest, [&] {
    if (cfg.train_path.empty()) throw ArgumentError("no training dataset configured");
    if (!std::filesystem::exists(cfg.train_path)) throw ArgumentError("dataset '" + cfg.train_path + "' not found");
    if (!cfg.test_path.empty()) return parse_dataset(cfg.train_path, cfg.test_path, cfg.format);
    return split_dataset(parse_dataset(cfg.train_path, cfg.format), cfg.train_fraction, cfg.seed);
  });
}

inline TrainOptions train_options(const RunConfig& cfg, std::size_t workers) {
  return {cfg.reg_c, cfg.epochs, cfg.tolerance, cfg.seed, workers};
}

inline nlohmann::ordered_json dataset_summary(const SequenceDataset& ds) {
  nlohmann::ordered_json j;
  j["alphabet"] = ds.alphabet.symbols();
  j["num_classes"] = ds.num_classes();
  j["classes"] = ds.class_names;
  j["train"] = ds.train.size();
  j["test"] = ds.test.size();
  j["max_length"] = ds.max_length;
  return j;
}

struct PipelineResult {
  EvalReport report;
  nlohmann::ordered_json json;
  std::filesystem::path bank_file, train_embedding_file, test_embedding_file, model_file, report_file;
};

// Writes bank.txt, train.embedding, test.embedding, model.txt and
// report.json into `out_dir`. Every file carries the serialized config.
inline PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                   std::size_t workers = 1) {
  const std::string header = serialize(cfg);
  const auto ds = load_run_dataset(cfg);
  const auto bank = run_stage(Stage::sample, [&] { return build_bank(ds, cfg.sampler(), cfg.r, workers); });
  auto train_z = run_stage(Stage::embed, [&] { return embed(ds.train, bank, cfg.features(), workers); });
  auto test_z = run_stage(Stage::embed, [&] { return embed(ds.test, bank, cfg.features(), workers); });
  auto model = run_stage(Stage::train, [&] {
    require_same_bank(train_z, test_z);
    return train(train_z, ds.num_classes(), train_options(cfg, workers));
  });
  model.classes = ds.class_names;
  const auto report = run_stage(Stage::eval, [&] { return evaluate(model, test_z); });

  PipelineResult out;
  out.report = report;
  out.json["config"] = to_json(cfg);
  out.json["dataset"] = dataset_summary(ds);
  out.json["bank_fingerprint"] = bank.fingerprint();
  out.json["evaluation"] = to_json(report, ds.class_names);

  run_stage(Stage::output, [&] {
    std::filesystem::create_directories(out_dir);
    out.bank_file = out_dir / "bank.txt";
    out.train_embedding_file = out_dir / "train.embedding";
    out.test_embedding_file = out_dir / "test.embedding";
    out.model_file = out_dir / "model.txt";
    out.report_file = out_dir / "report.json";
    save_bank(out.bank_file, bank, header);
    save_embedding(out.train_embedding_file, train_z, MatrixFormat::dense, header);
    save_embedding(out.test_embedding_file, test_z, MatrixFormat::dense, header);
    save_model(out.model_file, model, header);
    std::ofstream rep(out.report_file, std::ios::binary);
    if (!rep) throw ArgumentError("cannot write '" + out.report_file.string() + "'");
    rep << out.json.dump(2) << '\n';
    return 0;
  });
  return out;
}

struct VariantRow {
  Strategy strategy;
  FeatureMap feature;
  std::vector<double> accuracies;  // one per seed
  double mean_accuracy = 0;
};

inline constexpr std::array<Strategy, 4> kAllStrategies{Strategy::rf, Strategy::rfd, Strategy::ss, Strategy::bss};

// All strategy x feature-map combinations, each run with the same seeds.
// SF rows use cfg.gamma; every row shares d_max, R and reg_C. One bank and
// one distance matrix per (strategy, seed) serve both feature maps.
inline std::vector<VariantRow> run_variants(const RunConfig& cfg, std::span<const std::uint64_t> seeds,
                                            std::size_t workers = 1) {
  if (seeds.empty()) throw StageError(Stage::config, "variants need at least one seed");
  std::vector<VariantRow> rows;
  for (Strategy s : kAllStrategies)
    for (FeatureMap f : {FeatureMap::direct, FeatureMap::soft}) rows.push_back({s, f, {}, 0.0});

  for (std::uint64_t seed : seeds) {
    RunConfig c = cfg;
    c.seed = seed;
    const auto ds = load_run_dataset(c);
    for (std::size_t si = 0; si < kAllStrategies.size(); ++si) {
      c.strategy = kAllStrategies[si];
      const auto bank = run_stage(Stage::sample, [&] { return build_bank(ds, c.sampler(), c.r, workers); });
      const auto train_d =
          run_stage(Stage::embed, [&] { return compute_distances(views_of(ds.train), bank.strings, workers); });
      const auto test_d =
          run_stage(Stage::embed, [&] { return compute_distances(views_of(ds.test), bank.strings, workers); });
      for (std::size_t fi = 0; fi < 2; ++fi) {
        auto& row = rows[si * 2 + fi];
        const FeatureParams fp{row.feature, c.gamma};
        const double acc = run_stage(Stage::train, [&] {
          auto train_z = features_from_distances(train_d, fp);
          auto test_z = features_from_distances(test_d, fp);
          for (std::size_t i = 0; i < ds.train.size(); ++i) train_z.labels[i] = ds.train[i].label;
          for (std::size_t i = 0; i < ds.test.size(); ++i) test_z.labels[i] = ds.test[i].label;
          const auto model = train(train_z, ds.num_classes(), train_options(c, workers));
          return evaluate(model, test_z).accuracy;
        });
        row.accuracies.push_back(acc);
      }
    }
  }
  for (auto& row : rows) {
    double sum = 0;
    for (double a : row.accuracies) sum += a;
    row.mean_accuracy = sum / static_cast<double>(row.accuracies.size());
  }
  return rows;
}

inline std::string variant_name(const VariantRow& row) {
  return std::string("RSE(") + to_string(row.strategy) + "-" + to_string(row.feature) + ")";
}

inline nlohmann::ordered_json to_json(std::span<const VariantRow> rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["variant"] = variant_name(r);
    o["strategy"] = to_string(r.strategy);
    o["feature"] = to_string(r.feature);
    o["accuracies"] = r.accuracies;
    o["mean_accuracy"] = r.mean_accuracy;
    j.push_back(o);
  }
  return j;
}

// Mean accuracy of SS/BSS rows minus mean accuracy of RF/RFD rows.
inline double data_dependent_advantage(std::span<const VariantRow> rows) {
  double dep = 0, indep = 0;
  std::size_t nd = 0, ni = 0;
  for (const auto& r : rows) {
    if (is_data_dependent(r.strategy)) {
      dep += r.mean_accuracy;
      ++nd;
    } else {
      indep += r.mean_accuracy;
      ++ni;
    }
  }
  return dep / static_cast<double>(nd) - indep / static_cast<double>(ni);
}

}  // namespace rse
