#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "metasel/csv.hpp"
#include "metasel/dataset.hpp"
#include "metasel/parallel.hpp"
#include "metasel/rng.hpp"

namespace metasel {

enum class GenProfile { kFull, kDesk };

inline const char* to_string(GenProfile p) {
  return p == GenProfile::kFull ? "full" : "desk";
}
inline GenProfile gen_profile_from_string(const std::string& s) {
  if (s == "full") return GenProfile::kFull;
  if (s == "desk") return GenProfile::kDesk;
  throw Error("unknown generator profile: " + s);
}

/// Randomized recipe for one synthetic classification problem: Gaussian
/// clusters on polytope vertices in the informative subspace, plus
/// redundant, repeated and noise features and a label-noise fraction.
struct GenSpec {
  int n_samples = 0;
  int n_classes = 0;
  int n_features = 0;
  int n_informative = 0;
  int n_redundant = 0;
  int n_repeated = 0;
  int n_clusters_per_class = 0;
  std::vector<double> weights;  // normalized, one per class
  double flip_y = 0.01;
  bool hypercube = true;
  int class_sep = 1;
  std::uint64_t seed = 0;
};

/// Draws a GenSpec. The desk profile caps n_samples at 2000 and n_features
/// at 60 so corpora stay cheap; the full profile uses the whole ranges.
inline GenSpec sample_spec(std::uint64_t seed,
                           GenProfile profile = GenProfile::kFull) {
  Rng rng(seed);
  GenSpec spec;
  spec.seed = seed;
  const int max_samples = profile == GenProfile::kDesk ? 2000 : 50000;
  spec.n_samples = static_cast<int>(rng.uniform_int(500, max_samples));
  spec.n_classes = static_cast<int>(rng.uniform_int(2, 10));
  int h_max = 20;
  if (profile == GenProfile::kDesk)
    h_max = std::min(h_max, 60 / spec.n_classes);
  const int h = static_cast<int>(rng.uniform_int(5, h_max));
  spec.n_features = h * spec.n_classes;
  spec.n_informative = static_cast<int>(
      std::floor(rng.uniform(0.2, 0.4) * spec.n_features));
  spec.n_redundant = static_cast<int>(std::floor(
      rng.uniform(0.2, 0.4) * (spec.n_features - spec.n_informative)));
  spec.n_repeated = static_cast<int>(std::floor(
      rng.uniform(0.2, 0.4) *
      (spec.n_features - spec.n_informative - spec.n_redundant)));

  // need n_clusters_per_class * n_classes <= 2^n_informative; resample until
  // it holds (1 is always feasible at these ranges)
  const std::uint64_t capacity =
      spec.n_informative >= 63
          ? std::numeric_limits<std::uint64_t>::max()
          : (static_cast<std::uint64_t>(1) << spec.n_informative);
  do {
    spec.n_clusters_per_class = static_cast<int>(rng.uniform_int(1, 5));
  } while (static_cast<std::uint64_t>(spec.n_clusters_per_class) *
               static_cast<std::uint64_t>(spec.n_classes) >
           capacity);

  spec.weights.resize(static_cast<std::size_t>(spec.n_classes));
  double weight_sum = 0.0;
  for (double& w : spec.weights) {
    w = rng.uniform(0.4, 1.0);
    weight_sum += w;
  }
  for (double& w : spec.weights) w /= weight_sum;

  spec.flip_y = rng.bernoulli(0.5) ? 0.01 : 0.05;
  spec.hypercube = rng.bernoulli(0.5);
  spec.class_sep = static_cast<int>(rng.uniform_int(1, 5));
  return spec;
}

namespace detail {

/// Distinct cluster centers for every (class, cluster) pair. Hypercube mode
/// places them on vertices of {-sep, +sep}^q; otherwise they are sampled
/// uniformly inside the box.
inline Matrix cluster_centers(const GenSpec& spec, Rng& rng) {
  const std::size_t q = static_cast<std::size_t>(spec.n_informative);
  const std::size_t m = static_cast<std::size_t>(spec.n_classes) *
                        static_cast<std::size_t>(spec.n_clusters_per_class);
  const double sep = static_cast<double>(spec.class_sep);
  Matrix centers(m, q);
  if (!spec.hypercube) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t f = 0; f < q; ++f)
        centers.at(i, f) = rng.uniform(-sep, sep);
    return centers;
  }
  if (q <= 20) {
    std::vector<std::uint64_t> ids(static_cast<std::size_t>(1) << q);
    std::iota(ids.begin(), ids.end(), 0);
    rng.shuffle(ids);
    ids.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t f = 0; f < q; ++f)
        centers.at(i, f) = (ids[i] >> f) & 1 ? sep : -sep;
    return centers;
  }
  // 2^q is astronomically larger than m: draw random vertices, retry the
  // (vanishingly unlikely) duplicates
  std::vector<std::vector<std::uint64_t>> seen;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::uint64_t> bits((q + 63) / 64);
    do {
      for (auto& word : bits) word = rng.next_u64();
      const std::size_t tail = q % 64;
      if (tail) bits.back() &= (static_cast<std::uint64_t>(1) << tail) - 1;
    } while (std::find(seen.begin(), seen.end(), bits) != seen.end());
    for (std::size_t f = 0; f < q; ++f)
      centers.at(i, f) = (bits[f / 64] >> (f % 64)) & 1 ? sep : -sep;
    seen.push_back(std::move(bits));
  }
  return centers;
}

inline std::vector<std::size_t> apportion(std::size_t total,
                                          std::span<const double> weights) {
  std::vector<std::size_t> out(weights.size());
  std::vector<double> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = weights[i] * static_cast<double>(total);
    out[i] = static_cast<std::size_t>(quota);
    remainder[i] = quota - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return a < b;
  });
  for (std::size_t i = 0; assigned < total; ++i) {
    ++out[order[i % order.size()]];
    ++assigned;
  }
  return out;
}

}  // namespace detail

/// Deterministic expansion of a GenSpec into a Dataset. All randomness comes
/// from spec.seed.
inline Dataset generate(const GenSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.n_samples);
  const std::size_t d = static_cast<std::size_t>(spec.n_features);
  const std::size_t q = static_cast<std::size_t>(spec.n_informative);
  const std::size_t n_red = static_cast<std::size_t>(spec.n_redundant);
  const std::size_t n_rep = static_cast<std::size_t>(spec.n_repeated);
  const std::size_t c = static_cast<std::size_t>(spec.n_classes);
  const std::size_t cpc = static_cast<std::size_t>(spec.n_clusters_per_class);

  // one derived stream per phase, so changing one knob (say flip_y) leaves
  // every other phase's randomness untouched
  Rng rng(mix_seed(spec.seed, 0x01));
  Rng flip_rng(mix_seed(spec.seed, 0x02));
  Rng perm_rng(mix_seed(spec.seed, 0x03));
  const Matrix centers = detail::cluster_centers(spec, rng);

  Dataset ds;
  ds.features = Matrix(n, d);
  ds.target.resize(n);
  ds.class_count = spec.n_classes;

  // per-class counts from the weights, split near-evenly across the class's
  // clusters
  const auto per_class = detail::apportion(n, spec.weights);
  std::size_t row = 0;
  for (std::size_t l = 0; l < c; ++l) {
    std::vector<double> even(cpc, 1.0 / static_cast<double>(cpc));
    const auto per_cluster = detail::apportion(per_class[l], even);
    for (std::size_t k = 0; k < cpc; ++k) {
      const auto center = centers.row(l * cpc + k);
      for (std::size_t s = 0; s < per_cluster[k]; ++s, ++row) {
        ds.target[row] = static_cast<int>(l);
        for (std::size_t f = 0; f < q; ++f)
          ds.features.at(row, f) = center[f] + rng.normal();
      }
    }
  }

  // redundant features: random linear combinations of the informative block
  for (std::size_t j = 0; j < n_red; ++j) {
    std::vector<double> mix(q);
    for (double& w : mix) w = rng.uniform(-1.0, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t f = 0; f < q; ++f) s += mix[f] * ds.features.at(r, f);
      ds.features.at(r, q + j) = s;
    }
  }

  // repeated features: exact copies of earlier informative/redundant columns
  for (std::size_t j = 0; j < n_rep; ++j) {
    const std::size_t src = rng.index(q + n_red);
    for (std::size_t r = 0; r < n; ++r)
      ds.features.at(r, q + n_red + j) = ds.features.at(r, src);
  }

  // remaining columns are pure noise
  for (std::size_t f = q + n_red + n_rep; f < d; ++f)
    for (std::size_t r = 0; r < n; ++r) ds.features.at(r, f) = rng.normal();

  // label noise: exactly floor(flip_y * n) rows get a uniformly random
  // class; redrawn whole if a class would disappear
  const std::size_t flips =
      static_cast<std::size_t>(spec.flip_y * static_cast<double>(n));
  if (flips > 0) {
    const std::vector<int> original = ds.target;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      ds.target = original;
      const auto rows = flip_rng.sample_without_replacement(n, flips);
      for (std::size_t r : rows)
        ds.target[r] = static_cast<int>(flip_rng.index(c));
      std::vector<bool> present(c, false);
      for (int y : ds.target) present[static_cast<std::size_t>(y)] = true;
      if (std::all_of(present.begin(), present.end(),
                      [](bool b) { return b; }))
        break;
      if (attempt == 9999)
        throw Error("generate: label noise kept removing a class");
    }
  }

  // random column order
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  perm_rng.shuffle(perm);
  Matrix shuffled(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t f = 0; f < d; ++f)
      shuffled.at(r, f) = ds.features.at(r, perm[f]);
  ds.features = std::move(shuffled);

  ds.feature_names.resize(d);
  for (std::size_t f = 0; f < d; ++f)
    ds.feature_names[f] = "f" + std::to_string(f);
  ds.class_labels.resize(c);
  for (std::size_t l = 0; l < c; ++l) ds.class_labels[l] = std::to_string(l);
  return ds;
}

// ---------------------------------------------------------------------------
// Corpus generation

struct ManifestEntry {
  std::string dataset_id;
  GenSpec spec;
  std::string path;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
};

inline std::vector<std::string> manifest_header() {
  return {"dataset_id",  "n_samples",   "n_classes",
          "n_features",  "n_informative", "n_redundant",
          "n_repeated",  "n_clusters_per_class", "weights",
          "flip_y",      "hypercube",   "class_sep",
          "seed",        "path"};
}

inline void write_manifest(const CorpusManifest& manifest,
                           const std::string& path) {
  CsvTable table;
  table.header = manifest_header();
  for (const auto& e : manifest.entries) {
    std::string weights;
    for (std::size_t i = 0; i < e.spec.weights.size(); ++i) {
      if (i) weights += ';';
      weights += format_double(e.spec.weights[i]);
    }
    table.rows.push_back({e.dataset_id, std::to_string(e.spec.n_samples),
                          std::to_string(e.spec.n_classes),
                          std::to_string(e.spec.n_features),
                          std::to_string(e.spec.n_informative),
                          std::to_string(e.spec.n_redundant),
                          std::to_string(e.spec.n_repeated),
                          std::to_string(e.spec.n_clusters_per_class), weights,
                          format_double(e.spec.flip_y),
                          e.spec.hypercube ? "1" : "0",
                          std::to_string(e.spec.class_sep),
                          std::to_string(e.spec.seed), e.path});
  }
  write_csv_table(path, table);
}

inline CorpusManifest read_manifest(const std::string& path) {
  const CsvTable table = read_csv_table(path);
  const auto expected = manifest_header();
  if (table.header != expected)
    throw Error(path + ": not a corpus manifest (unexpected header)");
  CorpusManifest manifest;
  for (const auto& row : table.rows) {
    ManifestEntry e;
    e.dataset_id = row[0];
    e.spec.n_samples = std::stoi(row[1]);
    e.spec.n_classes = std::stoi(row[2]);
    e.spec.n_features = std::stoi(row[3]);
    e.spec.n_informative = std::stoi(row[4]);
    e.spec.n_redundant = std::stoi(row[5]);
    e.spec.n_repeated = std::stoi(row[6]);
    e.spec.n_clusters_per_class = std::stoi(row[7]);
    {
      const std::string& w = row[8];
      std::size_t start = 0;
      while (start < w.size()) {
        std::size_t semi = w.find(';', start);
        if (semi == std::string::npos) semi = w.size();
        const auto v = parse_double(w.substr(start, semi - start));
        if (!v) throw Error(path + ": bad weight in '" + w + "'");
        e.spec.weights.push_back(*v);
        start = semi + 1;
      }
    }
    const auto flip = parse_double(row[9]);
    if (!flip) throw Error(path + ": bad flip_y '" + row[9] + "'");
    e.spec.flip_y = *flip;
    e.spec.hypercube = row[10] == "1";
    e.spec.class_sep = std::stoi(row[11]);
    e.spec.seed = std::stoull(row[12]);
    e.path = row[13];
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

/// Writes `count` dataset CSVs (target column "class") plus a manifest named
/// manifest.csv in out_dir. Dataset k uses seed master_seed + k, so the
/// corpus regenerates bit-identically and parallel order cannot matter.
inline CorpusManifest generate_corpus(std::size_t count,
                                      std::uint64_t master_seed,
                                      const std::string& out_dir,
                                      GenProfile profile = GenProfile::kFull,
                                      int jobs = 1) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir))
    throw Error("generate_corpus: cannot create directory " + out_dir);

  CorpusManifest manifest;
  manifest.entries.resize(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    char id[32];
    std::snprintf(id, sizeof(id), "ds_%05zu", i);
    const std::uint64_t seed = master_seed + i;
    const GenSpec spec = sample_spec(seed, profile);
    const Dataset ds = generate(spec);
    const std::string file = (fs::path(out_dir) / (std::string(id) + ".csv")).string();
    write_csv(ds, file, "class");
    manifest.entries[i] = {id, spec, file};
  });
  write_manifest(manifest, (fs::path(out_dir) / "manifest.csv").string());
  return manifest;
}

}  // namespace metasel
