#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metasel/csv.hpp"
#include "metasel/dataset.hpp"
#include "metasel/ensemble.hpp"
#include "metasel/metafeatures.hpp"
#include "metasel/parallel.hpp"
#include "metasel/rng.hpp"
#include "metasel/synthgen.hpp"

namespace metasel {

enum class ModelFamily { kRf, kGbm };

inline const char* to_string(ModelFamily f) {
  return f == ModelFamily::kRf ? "RF" : "GBM";
}

/// One candidate model: a family plus a concrete hyperparameter setting,
/// addressed by its position in the grid.
struct ModelId {
  ModelFamily family = ModelFamily::kRf;
  std::vector<std::pair<std::string, std::string>> params;  // ordered
  int grid_index = 0;

  std::string get(const std::string& key) const {
    for (const auto& [k, v] : params)
      if (k == key) return v;
    throw Error(std::string("ModelId: missing parameter ") + key);
  }

  /// "RF_00".."GBM_11" — used for CSV column names.
  std::string short_name() const {
    char buf[16];
    const int family_size = 12;
    std::snprintf(buf, sizeof(buf), "%s_%02d", to_string(family),
                  grid_index % family_size);
    return buf;
  }

  std::string describe() const {
    std::string out = to_string(family);
    out += '[';
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i) out += ',';
      out += params[i].first + "=" + params[i].second;
    }
    out += ']';
    return out;
  }

  bool operator==(const ModelId& other) const {
    return family == other.family && params == other.params &&
           grid_index == other.grid_index;
  }
};

struct ModelGrid {
  std::vector<ModelId> models;
  std::string profile = "desk";
  int e1 = 50;
  int e2 = 100;

  std::size_t size() const { return models.size(); }
};

/// The 24-model default grid: RF over criterion x max_features x
/// n_estimators (2*3*2) followed by GBM over boosting x learning_rate x
/// n_estimators (2*3*2), rightmost axis fastest.
inline ModelGrid default_grid(int e1 = 500, int e2 = 1000,
                              const std::string& profile = "full") {
  if (e1 >= e2) throw Error("default_grid: requires E1 < E2");
  ModelGrid grid;
  grid.profile = profile;
  grid.e1 = e1;
  grid.e2 = e2;
  int index = 0;
  for (const char* criterion : {"gini", "entropy"})
    for (const char* max_features : {"sqrt", "log2", "all"})
      for (int estimators : {e1, e2}) {
        ModelId id;
        id.family = ModelFamily::kRf;
        id.params = {{"criterion", criterion},
                     {"max_features", max_features},
                     {"n_estimators", std::to_string(estimators)}};
        id.grid_index = index++;
        grid.models.push_back(std::move(id));
      }
  for (const char* boosting : {"standard", "dart"})
    for (const char* rate : {"0.1", "0.05", "0.01"})
      for (int estimators : {e1, e2}) {
        ModelId id;
        id.family = ModelFamily::kGbm;
        id.params = {{"boosting", boosting},
                     {"learning_rate", rate},
                     {"n_estimators", std::to_string(estimators)}};
        id.grid_index = index++;
        grid.models.push_back(std::move(id));
      }
  return grid;
}

inline ModelGrid desk_grid() { return default_grid(50, 100, "desk"); }

inline nlohmann::json grid_to_json(const ModelGrid& grid) {
  nlohmann::json j;
  j["version"] = 1;
  j["estimator_profile"] = {{"name", grid.profile},
                            {"e1", grid.e1},
                            {"e2", grid.e2}};
  nlohmann::json families = nlohmann::json::array();
  families.push_back(
      {{"family", "RF"},
       {"axes",
        {{{"name", "criterion"}, {"values", {"gini", "entropy"}}},
         {{"name", "max_features"}, {"values", {"sqrt", "log2", "all"}}},
         {{"name", "n_estimators"}, {"values", {grid.e1, grid.e2}}}}}});
  families.push_back(
      {{"family", "GBM"},
       {"axes",
        {{{"name", "boosting"}, {"values", {"standard", "dart"}}},
         {{"name", "learning_rate"}, {"values", {0.1, 0.05, 0.01}}},
         {{"name", "n_estimators"}, {"values", {grid.e1, grid.e2}}}}}});
  j["families"] = families;
  return j;
}

inline void write_grid_json(const ModelGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write grid file: " + path);
  out << grid_to_json(grid).dump(2) << '\n';
}

inline ModelGrid load_grid_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open grid file: " + path);
  nlohmann::json j;
  in >> j;
  const auto& profile = j.at("estimator_profile");
  return default_grid(profile.at("e1").get<int>(), profile.at("e2").get<int>(),
                      profile.at("name").get<std::string>());
}

// ---------------------------------------------------------------------------
// Model fitting by grid entry

inline std::vector<int> fit_predict_model(const ModelId& id,
                                          const Dataset& train,
                                          const Matrix& queries,
                                          std::uint64_t seed) {
  if (id.family == ModelFamily::kRf) {
    RandomForestParams params;
    params.criterion = criterion_from_string(id.get("criterion"));
    params.max_features = max_features_from_string(id.get("max_features"));
    params.n_estimators = std::stoi(id.get("n_estimators"));
    return fit_random_forest(train, params, seed).predict(queries);
  }
  GbmParams params;
  params.boosting = boosting_from_string(id.get("boosting"));
  const auto rate = parse_double(id.get("learning_rate"));
  if (!rate) throw Error("bad learning_rate in grid entry");
  params.learning_rate = *rate;
  params.n_estimators = std::stoi(id.get("n_estimators"));
  return fit_gbm(train, params, seed).predict(queries);
}

// ---------------------------------------------------------------------------
// Labeling

/// Near-optimality mask over the grid: bit i is set when model i's
/// validation accuracy comes within `threshold` of the best one.
struct LabelVector {
  std::vector<std::uint8_t> bits;
  std::vector<double> accuracies;
  double best_accuracy = 0.0;
};

inline LabelVector make_label_vector(std::span<const double> accuracies,
                                     double threshold) {
  LabelVector lv;
  lv.accuracies.assign(accuracies.begin(), accuracies.end());
  lv.best_accuracy = *std::max_element(accuracies.begin(), accuracies.end());
  lv.bits.resize(accuracies.size());
  for (std::size_t i = 0; i < accuracies.size(); ++i)
    lv.bits[i] = accuracies[i] >= lv.best_accuracy - threshold ? 1 : 0;
  return lv;
}

/// Fits every grid model on a stratified 80/20 split and labels the ones
/// within `threshold` (absolute accuracy difference) of the best.
inline LabelVector label_dataset(const Dataset& ds, const ModelGrid& grid,
                                 double threshold, std::uint64_t seed,
                                 int jobs = 1) {
  const SplitPair parts = split(ds, 0.2, mix_seed(seed, 0x5511));
  std::vector<double> accuracies(grid.size(), 0.0);
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    const auto pred =
        fit_predict_model(grid.models[i], parts.train,
                          parts.validation.features,
                          mix_seed(seed, static_cast<std::uint64_t>(
                                             grid.models[i].grid_index)));
    std::size_t correct = 0;
    for (std::size_t r = 0; r < pred.size(); ++r)
      if (pred[r] == parts.validation.target[r]) ++correct;
    accuracies[i] =
        static_cast<double>(correct) / static_cast<double>(pred.size());
  });
  return make_label_vector(accuracies, threshold);
}

// ---------------------------------------------------------------------------
// Meta-dataset

struct MetaInstance {
  std::string dataset_id;
  MetaFeatureVector features;
  LabelVector labels;
};

struct MetaDataset {
  std::vector<MetaInstance> instances;
  std::vector<std::string> feature_schema;  // 62 names
  std::vector<ModelId> label_schema;

  std::size_t size() const { return instances.size(); }
  std::size_t label_count() const { return label_schema.size(); }
};

inline std::vector<std::string> meta_csv_header(const MetaDataset& md) {
  std::vector<std::string> header = {"dataset_id"};
  header.insert(header.end(), md.feature_schema.begin(),
                md.feature_schema.end());
  for (const auto& id : md.label_schema)
    header.push_back("label_" + id.short_name());
  for (const auto& id : md.label_schema)
    header.push_back("acc_" + id.short_name());
  return header;
}

inline void write_meta_csv(const MetaDataset& md, const std::string& path) {
  CsvTable table;
  table.header = meta_csv_header(md);
  for (const auto& inst : md.instances) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    row.push_back(inst.dataset_id);
    for (double v : inst.features.values) row.push_back(format_double(v));
    for (std::uint8_t b : inst.labels.bits) row.push_back(b ? "1" : "0");
    for (double a : inst.labels.accuracies) row.push_back(format_double(a));
    table.rows.push_back(std::move(row));
  }
  write_csv_table(path, table);
}

inline MetaDataset read_meta_csv(const std::string& path,
                                 const ModelGrid& grid) {
  const CsvTable table = read_csv_table(path);
  MetaDataset md;
  md.feature_schema.assign(meta_feature_names().begin(),
                           meta_feature_names().end());
  md.label_schema = grid.models;
  const auto expected = meta_csv_header(md);
  if (table.header != expected)
    throw Error(path + ": meta-dataset header does not match the grid");
  const std::size_t p = grid.size();
  for (const auto& row : table.rows) {
    MetaInstance inst;
    inst.dataset_id = row[0];
    for (std::size_t f = 0; f < kMetaFeatureCount; ++f) {
      const auto v = parse_double(row[1 + f]);
      if (!v) throw Error(path + ": bad meta-feature value '" + row[1 + f] + "'");
      inst.features[f] = *v;
    }
    inst.labels.bits.resize(p);
    inst.labels.accuracies.resize(p);
    for (std::size_t j = 0; j < p; ++j)
      inst.labels.bits[j] = row[1 + kMetaFeatureCount + j] == "1" ? 1 : 0;
    for (std::size_t j = 0; j < p; ++j) {
      const std::string& cell = row[1 + kMetaFeatureCount + p + j];
      const auto v = parse_double(cell);
      if (!v) throw Error(path + ": bad accuracy value '" + cell + "'");
      inst.labels.accuracies[j] = *v;
    }
    inst.labels.best_accuracy =
        *std::max_element(inst.labels.accuracies.begin(),
                          inst.labels.accuracies.end());
    md.instances.push_back(std::move(inst));
  }
  return md;
}

struct BuildReport {
  std::size_t built = 0;
  std::size_t skipped = 0;
  std::size_t resumed = 0;
  std::vector<std::string> failures;  // "id: reason"
};

/// Extracts meta-features and grid labels for every manifest entry. Failures
/// are recorded and skipped, never fatal; ids already present in `existing`
/// are reused untouched, which makes reruns resumable.
inline MetaDataset build_meta_dataset(const CorpusManifest& manifest,
                                      const ModelGrid& grid, double threshold,
                                      std::uint64_t seed, BuildReport* report,
                                      int jobs = 1,
                                      const MetaDataset* existing = nullptr) {
  MetaDataset md;
  md.feature_schema.assign(meta_feature_names().begin(),
                           meta_feature_names().end());
  md.label_schema = grid.models;

  std::map<std::string, const MetaInstance*> done;
  if (existing)
    for (const auto& inst : existing->instances)
      done[inst.dataset_id] = &inst;

  // repeated manifest ids would break the unique-id invariant; the first
  // occurrence wins and the rest are recorded as skips
  std::map<std::string, std::size_t> first_occurrence;
  std::vector<bool> duplicate(manifest.entries.size(), false);
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (!first_occurrence.emplace(manifest.entries[i].dataset_id, i).second)
      duplicate[i] = true;
  }

  const std::size_t n = manifest.entries.size();
  std::vector<MetaInstance> slots(n);
  std::vector<int> status(n, 0);  // 1 ok, -1 failed, 2 resumed
  std::vector<std::string> errors(n);

  // spread workers over datasets first; leftover cores go to the per-model
  // loop when the corpus is smaller than the worker count
  const int inner_jobs =
      n >= static_cast<std::size_t>(jobs) ? 1 : std::max(1, jobs / static_cast<int>(std::max<std::size_t>(n, 1)));

  parallel_for(n, jobs, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.entries[i];
    if (duplicate[i]) {
      status[i] = -1;
      errors[i] = entry.dataset_id + ": duplicate dataset_id in manifest";
      return;
    }
    if (auto it = done.find(entry.dataset_id); it != done.end()) {
      slots[i] = *it->second;
      status[i] = 2;
      return;
    }
    try {
      const std::uint64_t ds_seed = mix_seed(seed, fnv1a64(entry.dataset_id));
      const Dataset ds = load_csv(entry.path, "class");
      MetaInstance inst;
      inst.dataset_id = entry.dataset_id;
      inst.features = extract_all(ds, mix_seed(ds_seed, 0xfea7));
      inst.labels = label_dataset(ds, grid, threshold,
                                  mix_seed(ds_seed, 0x1abe), inner_jobs);
      slots[i] = std::move(inst);
      status[i] = 1;
    } catch (const std::exception& e) {
      status[i] = -1;
      errors[i] = entry.dataset_id + ": " + e.what();
    }
  });

  BuildReport local;
  for (std::size_t i = 0; i < n; ++i) {
    if (status[i] == -1) {
      ++local.skipped;
      local.failures.push_back(errors[i]);
      continue;
    }
    if (status[i] == 2) ++local.resumed;
    else ++local.built;
    md.instances.push_back(std::move(slots[i]));
  }
  if (report) *report = std::move(local);
  return md;
}

}  // namespace metasel
