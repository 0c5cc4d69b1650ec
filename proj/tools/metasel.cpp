// metasel: meta-learning pipeline for classifier/hyperparameter
// recommendation on tabular classification datasets.
//
// Subcommands: generate, extract, label, build, train, recommend,
// importance. Every stage reads and writes plain CSV/JSON so intermediate
// results can be inspected or swapped out, and every stage is deterministic
// for a fixed seed regardless of --jobs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metasel/csv.hpp"
#include "metasel/dataset.hpp"
#include "metasel/metafeatures.hpp"
#include "metasel/metalearn.hpp"
#include "metasel/model_io.hpp"
#include "metasel/modelzoo.hpp"
#include "metasel/parallel.hpp"
#include "metasel/synthgen.hpp"

namespace fs = std::filesystem;
using namespace metasel;

namespace {

struct CommonOptions {
  int jobs = hardware_jobs();
};

ModelGrid resolve_grid(const std::string& grid_file,
                       const std::string& grid_profile) {
  if (!grid_file.empty()) return load_grid_json(grid_file);
  if (grid_profile == "desk") return desk_grid();
  if (grid_profile == "full") return default_grid();
  throw Error("unknown grid profile: " + grid_profile);
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path);
}

ModelGrid grid_from_schema(const std::vector<ModelId>& schema) {
  ModelGrid grid;
  grid.models = schema;
  return grid;
}

void add_jobs_option(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--jobs", common.jobs, "worker threads (default: cores)")
      ->envname("METASEL_JOBS")
      ->check(CLI::PositiveNumber);
}

void add_config_option(CLI::App* cmd, std::string& sink) {
  cmd->add_option("--config", sink,
                  "key=value config file; explicit flags override it");
  // repeated flags resolve to the last occurrence, which is what lets a
  // command-line flag override the same key spliced in from the config file
  for (auto* opt : cmd->get_options())
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

/// Rewrites argv so that `--key=value` pairs from a `--config FILE` land
/// right after the subcommand name. Explicit flags come later and win.
std::vector<std::string> splice_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw Error("cannot open config file: " + config_path);
  std::vector<std::string> spliced;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config file line is not key=value: " + line);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error("config file line has an empty key: " + line);
    spliced.push_back("--" + key + "=" + value);
  }

  // insert after the subcommand (the first bare token)
  std::size_t at = args.size();
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (!args[i].empty() && args[i][0] != '-') {
      at = i + 1;
      break;
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at),
              spliced.begin(), spliced.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metasel: meta-learning for model selection on tabular data"};
  app.require_subcommand(1);
  CommonOptions common;
  std::string config_path;

  // -------------------------------------------------------------- generate
  auto* generate_cmd =
      app.add_subcommand("generate", "generate a synthetic dataset corpus");
  add_config_option(generate_cmd, config_path);
  std::size_t gen_count = 10;
  std::uint64_t gen_seed = 1;
  std::string gen_profile = "full";
  std::string gen_out = "corpus";
  generate_cmd->add_option("--count", gen_count, "number of datasets");
  generate_cmd->add_option("--seed", gen_seed, "master seed");
  generate_cmd->add_option("--profile", gen_profile, "desk|full")
      ->check(CLI::IsMember({"desk", "full"}));
  generate_cmd->add_option("--out", gen_out, "output directory")->required();
  add_jobs_option(generate_cmd, common);
  generate_cmd->callback([&] {
    const auto manifest =
        generate_corpus(gen_count, gen_seed, gen_out,
                        gen_profile_from_string(gen_profile), common.jobs);
    std::cout << "wrote " << manifest.entries.size() << " datasets to "
              << gen_out << " (manifest: "
              << (fs::path(gen_out) / "manifest.csv").string() << ")\n";
  });

  // --------------------------------------------------------------- extract
  auto* extract_cmd =
      app.add_subcommand("extract", "compute meta-features for one dataset");
  add_config_option(extract_cmd, config_path);
  std::string ext_data, ext_target = "class", ext_out;
  std::uint64_t ext_seed = 1;
  extract_cmd->add_option("--data", ext_data, "dataset CSV")->required();
  extract_cmd->add_option("--target", ext_target, "target column name");
  extract_cmd->add_option("--seed", ext_seed, "seed");
  extract_cmd->add_option("--out", ext_out, "meta-feature CSV to append to")
      ->required();
  extract_cmd->callback([&] {
    const Dataset ds = load_csv(ext_data, ext_target);
    const MetaFeatureVector mf = extract_all(ds, ext_seed);
    std::vector<std::string> header = {"dataset_id"};
    header.insert(header.end(), meta_feature_names().begin(),
                  meta_feature_names().end());
    CsvTable table;
    if (fs::exists(ext_out)) {
      table = read_csv_table(ext_out);
      if (table.header != header)
        throw Error(ext_out + ": existing file has a different header");
    } else {
      table.header = header;
    }
    std::vector<std::string> row = {fs::path(ext_data).stem().string()};
    for (double v : mf.values) row.push_back(format_double(v));
    table.rows.push_back(std::move(row));
    write_csv_table(ext_out, table);
    std::cout << "extracted " << kMetaFeatureCount << " meta-features from "
              << ext_data << " -> " << ext_out << "\n";
  });

  // ----------------------------------------------------------------- label
  auto* label_cmd = app.add_subcommand(
      "label", "grid-search labels for every dataset in a manifest");
  add_config_option(label_cmd, config_path);
  std::string lab_manifest, lab_grid, lab_out, lab_grid_profile = "desk";
  double lab_threshold = 0.01;
  std::uint64_t lab_seed = 1;
  label_cmd->add_option("--manifest", lab_manifest, "corpus manifest CSV")
      ->required();
  label_cmd->add_option("--grid", lab_grid, "grid JSON (default: profile grid)");
  label_cmd->add_option("--grid-profile", lab_grid_profile, "desk|full")
      ->check(CLI::IsMember({"desk", "full"}));
  label_cmd->add_option("--threshold", lab_threshold,
                        "near-optimality accuracy threshold");
  label_cmd->add_option("--seed", lab_seed, "seed");
  label_cmd->add_option("--out", lab_out, "labels CSV")->required();
  add_jobs_option(label_cmd, common);
  label_cmd->callback([&] {
    if (!(lab_threshold > 0.0 && lab_threshold < 0.5))
      throw Error("threshold must lie in (0, 0.5)");
    const ModelGrid grid = resolve_grid(lab_grid, lab_grid_profile);
    const CorpusManifest manifest = read_manifest(lab_manifest);

    CsvTable table;
    table.header = {"dataset_id"};
    for (const auto& id : grid.models)
      table.header.push_back("label_" + id.short_name());
    for (const auto& id : grid.models)
      table.header.push_back("acc_" + id.short_name());

    const std::size_t n = manifest.entries.size();
    std::vector<std::vector<std::string>> rows(n);
    const int inner_jobs =
        n >= static_cast<std::size_t>(common.jobs)
            ? 1
            : std::max(1, common.jobs / static_cast<int>(std::max<std::size_t>(n, 1)));
    parallel_for(n, common.jobs, [&](std::size_t i) {
      const auto& entry = manifest.entries[i];
      const Dataset ds = load_csv(entry.path, "class");
      const std::uint64_t ds_seed = mix_seed(lab_seed, fnv1a64(entry.dataset_id));
      const LabelVector lv = label_dataset(ds, grid, lab_threshold,
                                           mix_seed(ds_seed, 0x1abe), inner_jobs);
      std::vector<std::string> row = {entry.dataset_id};
      for (std::uint8_t b : lv.bits) row.push_back(b ? "1" : "0");
      for (double a : lv.accuracies) row.push_back(format_double(a));
      rows[i] = std::move(row);
    });
    table.rows = std::move(rows);
    write_csv_table(lab_out, table);
    if (lab_grid.empty()) write_grid_json(grid, lab_out + ".grid.json");
    std::cout << "labeled " << n << " datasets with " << grid.size()
              << " models -> " << lab_out << "\n";
  });

  // ----------------------------------------------------------------- build
  auto* build_cmd = app.add_subcommand(
      "build", "extract + label a whole corpus into a meta-dataset CSV");
  add_config_option(build_cmd, config_path);
  std::string bld_manifest, bld_grid, bld_out, bld_grid_profile = "desk";
  double bld_threshold = 0.01;
  std::uint64_t bld_seed = 1;
  build_cmd->add_option("--manifest", bld_manifest, "corpus manifest CSV")
      ->required();
  build_cmd->add_option("--grid", bld_grid, "grid JSON (default: profile grid)");
  build_cmd->add_option("--grid-profile", bld_grid_profile, "desk|full")
      ->check(CLI::IsMember({"desk", "full"}));
  build_cmd->add_option("--threshold", bld_threshold,
                        "near-optimality accuracy threshold");
  build_cmd->add_option("--seed", bld_seed, "seed");
  build_cmd->add_option("--out", bld_out, "meta-dataset CSV")->required();
  add_jobs_option(build_cmd, common);
  build_cmd->callback([&] {
    if (!(bld_threshold > 0.0 && bld_threshold < 0.5))
      throw Error("threshold must lie in (0, 0.5)");
    const ModelGrid grid = resolve_grid(bld_grid, bld_grid_profile);
    const CorpusManifest manifest = read_manifest(bld_manifest);

    MetaDataset existing;
    bool have_existing = false;
    if (fs::exists(bld_out)) {
      existing = read_meta_csv(bld_out, grid);
      have_existing = true;
      std::cout << "resuming: " << existing.size()
                << " meta-instances already in " << bld_out << "\n";
    }
    BuildReport report;
    const MetaDataset md = build_meta_dataset(
        manifest, grid, bld_threshold, bld_seed, &report, common.jobs,
        have_existing ? &existing : nullptr);
    write_meta_csv(md, bld_out);
    if (bld_grid.empty()) write_grid_json(grid, bld_out + ".grid.json");
    std::cout << "meta-dataset: " << md.size() << " instances ("
              << report.built << " built, " << report.resumed << " reused, "
              << report.skipped << " skipped) -> " << bld_out << "\n";
    for (const auto& failure : report.failures)
      std::cerr << "skipped " << failure << "\n";
  });

  // ----------------------------------------------------------------- train
  auto* train_cmd = app.add_subcommand(
      "train", "cross-validate a meta-learner and fit the final model");
  add_config_option(train_cmd, config_path);
  std::string trn_meta, trn_learner = "mlknn", trn_report, trn_model;
  std::string trn_grid, trn_grid_profile = "desk";
  int trn_folds = 5;
  std::uint64_t trn_seed = 1;
  train_cmd->add_option("--meta", trn_meta, "meta-dataset CSV")->required();
  train_cmd->add_option("--learner", trn_learner, "mlknn|birel|rakel")
      ->check(CLI::IsMember({"mlknn", "birel", "rakel"}));
  train_cmd->add_option("--folds", trn_folds, "fold count")
      ->check(CLI::Range(2, 1000));
  train_cmd->add_option("--seed", trn_seed, "seed");
  train_cmd->add_option("--grid", trn_grid, "grid JSON matching the meta CSV");
  train_cmd->add_option("--grid-profile", trn_grid_profile, "desk|full")
      ->check(CLI::IsMember({"desk", "full"}));
  train_cmd->add_option("--report", trn_report, "evaluation report JSON")
      ->required();
  train_cmd->add_option("--model", trn_model, "output model file");
  train_cmd->callback([&] {
    const ModelGrid grid = resolve_grid(trn_grid, trn_grid_profile);
    const MetaDataset md = read_meta_csv(trn_meta, grid);
    MetaLearnerConfig config;
    config.kind = meta_learner_from_string(trn_learner);
    const EvalReport report =
        cross_validate_meta(md, config, trn_folds, trn_seed);
    write_json_file(report_to_json(report, trn_learner), trn_report);
    std::cout << trn_learner << " " << trn_folds
              << "-fold: hit_rate=" << format_double(report.averaged.hit_rate)
              << " hamming=" << format_double(report.averaged.hamming_loss)
              << " f1=" << format_double(report.averaged.macro_f1) << "\n";
    if (!trn_model.empty()) {
      std::string chosen;
      const MetaLearnerModel model =
          fit_meta_learner(md, config, mix_seed(trn_seed, 0xf17), &chosen);
      save_model(model, trn_model);
      std::cout << "final model (" << chosen << ") -> " << trn_model << "\n";
    }
  });

  // ------------------------------------------------------------- recommend
  auto* recommend_cmd = app.add_subcommand(
      "recommend", "rank grid models for a dataset with a trained model");
  add_config_option(recommend_cmd, config_path);
  std::string rec_model, rec_data, rec_target = "class", rec_grid;
  int rec_top = 3;
  std::uint64_t rec_seed = 1;
  recommend_cmd->add_option("--model", rec_model, "model file")->required();
  recommend_cmd->add_option("--data", rec_data, "dataset CSV")->required();
  recommend_cmd->add_option("--target", rec_target, "target column name");
  recommend_cmd->add_option("--top", rec_top, "lines to print")
      ->check(CLI::PositiveNumber);
  recommend_cmd->add_option("--seed", rec_seed, "seed");
  recommend_cmd->add_option("--grid", rec_grid,
                            "grid JSON the model must match");
  recommend_cmd->callback([&] {
    const MetaLearnerModel model = load_model(rec_model);
    if (model.label_count() == 0)
      throw Error("model has an empty label schema");
    if (!rec_grid.empty())
      verify_label_schema(model, load_grid_json(rec_grid));
    const Dataset ds = load_csv(rec_data, rec_target);
    const auto ranked = recommend(model, ds, rec_seed);
    const int top = std::min<int>(rec_top, static_cast<int>(ranked.size()));
    for (int i = 0; i < top; ++i) {
      const auto& [id, score] = ranked[static_cast<std::size_t>(i)];
      std::cout << id.short_name() << " " << format_double(score) << " "
                << id.describe() << "\n";
    }
  });

  // ------------------------------------------------------------ importance
  auto* importance_cmd = app.add_subcommand(
      "importance", "permutation importance of the meta-features");
  add_config_option(importance_cmd, config_path);
  std::string imp_model, imp_meta, imp_report;
  int imp_repeats = 10;
  std::uint64_t imp_seed = 1;
  importance_cmd->add_option("--model", imp_model, "model file")->required();
  importance_cmd->add_option("--meta", imp_meta, "meta-dataset CSV")
      ->required();
  importance_cmd->add_option("--repeats", imp_repeats, "shuffle repeats")
      ->check(CLI::PositiveNumber);
  importance_cmd->add_option("--seed", imp_seed, "seed");
  importance_cmd->add_option("--report", imp_report, "importance report JSON")
      ->required();
  importance_cmd->callback([&] {
    const MetaLearnerModel model = load_model(imp_model);
    const MetaDataset md =
        read_meta_csv(imp_meta, grid_from_schema(model.label_schema));
    const ImportanceReport report =
        permutation_importance(model, md, imp_repeats, imp_seed);
    write_json_file(importance_to_json(report), imp_report);
    std::cout << "baseline hit_rate="
              << format_double(report.baseline_hit_rate) << "; top feature: "
              << report.ranking.front().feature << " (mean drop "
              << format_double(report.ranking.front().mean_drop) << ") -> "
              << imp_report << "\n";
  });

  try {
    std::vector<std::string> args = splice_config_args(argc, argv);
    args.erase(args.begin());  // drop the program name
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
