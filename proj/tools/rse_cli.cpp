// rse: command-line front end for random string embeddings.
//
//   rse sample       draw a random string bank
//   rse embed        embed a dataset against a saved bank
//   rse train        fit a one-vs-rest linear SVM on an embedding file
//   rse eval         score a model on an embedding file (JSON report)
//   rse pipeline     ingest -> sample -> embed -> train -> eval
//   rse variants     the eight sampler x feature-map combinations
//   rse cv           cross-validate (gamma, d_max, reg_C)
//   rse kernel-check kernel convergence against a nested reference bank
//   rse gram         Gram matrix and its extreme eigenvalues
//   rse bench        embedding wall-time scaling in N, L or R
//
// Dataset and model settings come from defaults, then `--config FILE`, then
// individual flags (flags win).

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rse/rse.hpp"

namespace {

using rse::RunConfig;
using rse::Stage;
using rse::StageError;

// Config-backed flags shared by the dataset-driven subcommands.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;  // config key -> flag text

  void add(CLI::App* app, bool model_flags) {
    app->add_option("--config", config_file, "key=value run configuration file");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
      app->add_option_function<std::string>(name, [this, key](const std::string& v) { values[key] = v; }, help);
    };
    flag("--train,--data", "train", "dataset file (all records; split unless --test is given)");
    flag("--test", "test", "predefined test file");
    flag("--format", "format", "dataset format: tsv or fasta");
    flag("--train-fraction", "train_fraction", "train share for the seeded split");
    flag("--strategy", "strategy", "sampler: RF, RFD, SS or BSS");
    flag("--d-max", "d_max", "maximum random string length");
    flag("--feature", "feature", "feature map: DF or SF");
    flag("--gamma", "gamma", "SF feature scale");
    flag("-R,--R", "R", "number of random strings");
    flag("--seed", "seed", "master seed");
    if (model_flags) {
      flag("--reg-c", "reg_C", "SVM regularization C");
      flag("--epochs", "epochs", "maximum solver epochs");
      flag("--tolerance", "tolerance", "relative duality-gap stopping tolerance");
    }
  }

  [[nodiscard]] RunConfig resolve() const {
    return rse::run_stage(Stage::config, [&] {
      RunConfig cfg;
      if (!config_file.empty()) rse::apply_config_file(cfg, config_file);
      for (const auto& [key, value] : values) rse::set_config_value(cfg, key, value);
      return cfg;
    });
  }
};

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    if constexpr (std::is_floating_point_v<T>)
      out.push_back(static_cast<T>(std::stod(tok)));
    else
      out.push_back(static_cast<T>(std::stoull(tok)));
  }
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rse::ArgumentError("cannot write '" + path + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random string embeddings: edit-distance features, linear SVM and kernel diagnostics"};
  app.require_subcommand(1);
  std::size_t workers = 1;
  app.add_option("--workers", workers, "worker threads (0 = all cores)")->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "draw a random string bank from the training split");
  ConfigFlags sample_flags;
  sample_flags.add(sample, false);
  std::string sample_out;
  sample->add_option("--out", sample_out, "bank file (default: stdout)");

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "embed dataset records against a saved bank");
  ConfigFlags embed_flags;
  embed_flags.add(embed_cmd, false);
  std::string embed_bank, embed_out, embed_format = "dense", embed_part = "train";
  embed_cmd->add_option("--bank", embed_bank, "bank file from `rse sample`")->required();
  embed_cmd->add_option("--out", embed_out, "embedding file (default: stdout)");
  embed_cmd->add_option("--out-format", embed_format, "dense or svmlight")->capture_default_str();
  embed_cmd->add_option("--part", embed_part, "train, test or all")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "fit a one-vs-rest linear SVM");
  std::string train_embedding, train_out;
  rse::TrainOptions train_opts;
  train_cmd->add_option("--embedding", train_embedding, "training embedding file")->required();
  train_cmd->add_option("--out", train_out, "model file")->required();
  train_cmd->add_option("--reg-c", train_opts.reg_c, "regularization C")->capture_default_str();
  train_cmd->add_option("--epochs", train_opts.max_epochs, "maximum epochs")->capture_default_str();
  train_cmd->add_option("--tolerance", train_opts.tolerance, "relative duality gap")->capture_default_str();
  train_cmd->add_option("--seed", train_opts.seed, "solver seed")->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model; prints a JSON report");
  std::string eval_model, eval_embedding;
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--embedding", eval_embedding, "test embedding file")->required();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "run the full pipeline and write all artifacts");
  ConfigFlags pipeline_flags;
  pipeline_flags.add(pipeline, true);
  std::string pipeline_dir = "rse-out";
  pipeline->add_option("--out-dir", pipeline_dir, "artifact directory")->capture_default_str();

  // variants
  auto* variants = app.add_subcommand("variants", "compare all sampler x feature-map variants");
  ConfigFlags variants_flags;
  variants_flags.add(variants, true);
  std::string variants_seeds = "0", variants_out;
  variants->add_option("--seeds", variants_seeds, "comma-separated seeds")->capture_default_str();
  variants->add_option("--out", variants_out, "JSON table file");

  // cv
  auto* cv = app.add_subcommand("cv", "cross-validate gamma, d_max and reg_C on the training split");
  ConfigFlags cv_flags;
  cv_flags.add(cv, true);
  std::string cv_gammas = "1e-5,1e-4,1e-3,1e-2,1e-1,1", cv_dmax = "5,10,20,40", cv_c = "0.001,0.01,0.1,1,10,100,1000,10000,100000";
  std::size_t cv_folds = 5;
  cv->add_option("--gammas", cv_gammas, "gamma grid")->capture_default_str();
  cv->add_option("--d-maxes", cv_dmax, "d_max grid")->capture_default_str();
  cv->add_option("--reg-cs", cv_c, "reg_C grid")->capture_default_str();
  cv->add_option("--folds", cv_folds, "number of folds")->capture_default_str();

  // kernel-check
  auto* kcheck = app.add_subcommand("kernel-check", "kernel estimate convergence in R (SF features)");
  ConfigFlags kcheck_flags;
  kcheck_flags.add(kcheck, false);
  std::size_t kcheck_pairs = 50, kcheck_ref = 65536;
  std::string kcheck_grid = "64,256,1024,4096";
  kcheck->add_option("--pairs", kcheck_pairs, "number of probe pairs")->capture_default_str();
  kcheck->add_option("--grid", kcheck_grid, "R grid")->capture_default_str();
  kcheck->add_option("--r-ref", kcheck_ref, "reference bank size")->capture_default_str();

  // gram
  auto* gram = app.add_subcommand("gram", "Gram matrix over probe strings with its eigenvalue range");
  ConfigFlags gram_flags;
  gram_flags.add(gram, false);
  std::size_t gram_count = 100;
  std::string gram_kind = "embedding";
  gram->add_option("--count", gram_count, "number of probe strings (first records)")->capture_default_str();
  gram->add_option("--kind", gram_kind, "embedding, gaussian or laplacian")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "embedding wall time against N, L or R");
  std::string bench_axis = "n", bench_grid;
  rse::ScalingParams bench_params;
  bench->add_option("--axis", bench_axis, "n, l or r")->capture_default_str();
  bench->add_option("--grid", bench_grid, "comma-separated sizes (at least 4)")->required();
  bench->add_option("--n", bench_params.n, "fixed number of strings")->capture_default_str();
  bench->add_option("--length", bench_params.length, "fixed string length")->capture_default_str();
  bench->add_option("--r", bench_params.r, "fixed bank size")->capture_default_str();
  bench->add_option("--d-max", bench_params.d_max, "random string length bound")->capture_default_str();
  bench->add_option("--alphabet", bench_params.alphabet_size, "alphabet size")->capture_default_str();
  bench->add_option("--repeats", bench_params.repeats, "timed runs per size")->capture_default_str();
  bench->add_option("--seed", bench_params.seed, "seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  Stage stage = Stage::config;
  try {
    if (*sample) {
      const auto cfg = sample_flags.resolve();
      const auto ds = rse::load_run_dataset(cfg);
      stage = Stage::sample;
      const auto bank = rse::build_bank(ds, cfg.sampler(), cfg.r, workers);
      if (sample_out.empty()) {
        rse::write_bank(std::cout, bank, rse::serialize(cfg));
      } else {
        rse::save_bank(sample_out, bank, rse::serialize(cfg));
      }
    } else if (*embed_cmd) {
      const auto cfg = embed_flags.resolve();
      const auto ds = rse::load_run_dataset(cfg);
      stage = Stage::embed;
      std::vector<rse::LabeledString> records;
      if (embed_part == "train" || embed_part == "all") records.insert(records.end(), ds.train.begin(), ds.train.end());
      if (embed_part == "test" || embed_part == "all") records.insert(records.end(), ds.test.begin(), ds.test.end());
      if (embed_part != "train" && embed_part != "test" && embed_part != "all")
        throw rse::ArgumentError("--part must be train, test or all");
      const auto z = rse::embed_with_saved_bank(records, embed_bank, cfg.features(), workers);
      const auto format = rse::parse_matrix_format(embed_format);
      if (embed_out.empty()) {
        rse::write_embedding(std::cout, z, format, rse::serialize(cfg));
      } else {
        rse::save_embedding(embed_out, z, format, rse::serialize(cfg));
      }
    } else if (*train_cmd) {
      stage = Stage::train;
      train_opts.workers = workers;
      const auto z = rse::load_embedding(train_embedding);
      int max_label = 0;
      for (int l : z.labels) max_label = std::max(max_label, l);
      const auto model = rse::train(z, static_cast<std::size_t>(max_label) + 1, train_opts);
      std::ostringstream header;
      header << "embedding=" << train_embedding << "\nreg_C=" << train_opts.reg_c << "\nepochs="
             << train_opts.max_epochs << "\nseed=" << train_opts.seed;
      rse::save_model(train_out, model, header.str());
    } else if (*eval_cmd) {
      stage = Stage::eval;
      const auto model = rse::load_model(eval_model);
      const auto z = rse::load_embedding(eval_embedding);
      std::cout << rse::to_json(rse::evaluate(model, z), model.classes).dump(2) << '\n';
    } else if (*pipeline) {
      const auto cfg = pipeline_flags.resolve();
      const auto result = rse::run_pipeline(cfg, pipeline_dir, workers);
      std::cout << result.json.dump(2) << '\n';
    } else if (*variants) {
      const auto cfg = variants_flags.resolve();
      const auto seeds = parse_list<std::uint64_t>(variants_seeds);
      const auto rows = rse::run_variants(cfg, seeds, workers);
      for (const auto& row : rows)
        std::cerr << std::left << std::setw(14) << rse::variant_name(row) << std::fixed << std::setprecision(2)
                  << 100.0 * row.mean_accuracy << '\n';
      nlohmann::ordered_json j;
      j["config"] = rse::to_json(cfg);
      j["seeds"] = seeds;
      j["variants"] = rse::to_json(rows);
      j["data_dependent_advantage"] = rse::data_dependent_advantage(rows);
      if (variants_out.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        open_output(variants_out) << j.dump(2) << '\n';
      }
    } else if (*cv) {
      const auto cfg = cv_flags.resolve();
      const auto ds = rse::load_run_dataset(cfg);
      stage = Stage::train;
      rse::HyperGrid grid{parse_list<double>(cv_gammas), parse_list<std::size_t>(cv_dmax), parse_list<double>(cv_c)};
      const auto result = rse::cross_validate(ds, cfg.sampler(), cfg.features(), grid, cv_folds, cfg.r,
                                              rse::train_options(cfg, workers));
      nlohmann::ordered_json j;
      j["config"] = rse::to_json(cfg);
      auto point = [](const rse::CvPoint& p) {
        return nlohmann::ordered_json{{"gamma", p.gamma}, {"d_max", p.d_max}, {"reg_C", p.reg_c},
                                      {"mean_accuracy", p.mean_accuracy}};
      };
      j["best"] = point(result.best);
      for (const auto& p : result.all) j["grid"].push_back(point(p));
      std::cout << j.dump(2) << '\n';
    } else if (*kcheck) {
      const auto cfg = kcheck_flags.resolve();
      const auto ds = rse::load_run_dataset(cfg);
      stage = Stage::diagnostics;
      const auto grid = parse_list<std::size_t>(kcheck_grid);
      const auto pairs = rse::sample_probe_pairs(ds.train, kcheck_pairs, cfg.seed);
      const auto bank = rse::build_bank(ds, cfg.sampler(), kcheck_ref, workers);
      auto params = cfg.features();
      const auto report = rse::convergence_harness(pairs, bank, params, grid, workers);
      for (std::size_t k = 0; k < report.r_grid.size(); ++k) {
        nlohmann::ordered_json line{{"R", report.r_grid[k]},
                                    {"max_abs_error", report.max_abs_error[k]},
                                    {"mean_abs_error", report.mean_abs_error[k]}};
        std::cout << line.dump() << '\n';
      }
      std::cerr << "fitted_rate=" << report.fitted_rate << " r2=" << report.fit_r2 << " R_ref=" << report.r_ref
                << '\n';
    } else if (*gram) {
      const auto cfg = gram_flags.resolve();
      const auto ds = rse::load_run_dataset(cfg);
      stage = Stage::diagnostics;
      std::vector<std::string> probes;
      for (std::size_t i = 0; i < std::min(gram_count, ds.train.size()); ++i) probes.push_back(ds.train[i].chars);
      rse::GramMatrix g;
      if (gram_kind == "embedding") {
        const auto bank = rse::build_bank(ds, cfg.sampler(), cfg.r, workers);
        g = rse::gram_matrix(probes, bank, cfg.features(), workers);
      } else {
        g = rse::distance_substitution_gram(probes, rse::parse_substitution_kernel(gram_kind), cfg.gamma);
      }
      const auto ev = rse::symmetric_eigenvalues(g);
      for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = 0; j < g.n; ++j) {
          if (j) std::cout << ' ';
          rse::detail::put_double(std::cout, g.at(i, j));
        }
        std::cout << '\n';
      }
      std::cout << "# min_eigenvalue=" << ev.front() << " max_eigenvalue=" << ev.back()
                << " diagonal_dominance=" << rse::diagonal_dominance_ratio(g) << '\n';
    } else if (*bench) {
      stage = Stage::bench;
      bench_params.workers = workers;
      const auto grid = parse_list<std::size_t>(bench_grid);
      const auto run = rse::run_scaling(rse::parse_scaling_axis(bench_axis), grid, bench_params);
      rse::write_scaling_csv(std::cout, run);
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const rse::Error& e) {
    std::cerr << "error: " << to_string(stage) << " stage failed: " << e.what() << '\n';
    return rse::exit_code(stage);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
