#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "metasel/metafeatures.hpp"
#include "metasel/synthgen.hpp"
#include "metasel/weak.hpp"

using namespace metasel;
namespace fs = std::filesystem;

namespace {

GenSpec easy_two_class_spec(std::uint64_t seed, int class_sep) {
  GenSpec spec;
  spec.n_samples = 800;
  spec.n_classes = 2;
  spec.n_features = 10;
  spec.n_informative = 3;
  spec.n_redundant = 2;
  spec.n_repeated = 1;
  spec.n_clusters_per_class = 1;
  spec.weights = {0.5, 0.5};
  spec.flip_y = 0.01;
  spec.hypercube = true;
  spec.class_sep = class_sep;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("sample_spec is deterministic and respects the stated ranges") {
  const GenSpec a = sample_spec(123);
  const GenSpec b = sample_spec(123);
  CHECK(a.n_samples == b.n_samples);
  CHECK(a.weights == b.weights);
  CHECK(a.class_sep == b.class_sep);
  CHECK(a.hypercube == b.hypercube);

  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const GenSpec s = sample_spec(seed);
    CHECK(s.n_samples >= 500);
    CHECK(s.n_samples <= 50000);
    CHECK(s.n_classes >= 2);
    CHECK(s.n_classes <= 10);
    CHECK(s.n_features % s.n_classes == 0);
    const int h = s.n_features / s.n_classes;
    CHECK(h >= 5);
    CHECK(h <= 20);
    CHECK(s.n_informative >= 1);
    CHECK(s.n_informative <= s.n_features);
    CHECK(s.n_clusters_per_class >= 1);
    CHECK(s.n_clusters_per_class <= 5);
    // enforced constraint: clusters fit on distinct hypercube vertices
    CHECK(std::log2(double(s.n_clusters_per_class) * double(s.n_classes)) <=
          double(s.n_informative) + 1e-12);
    CHECK((s.flip_y == 0.01 || s.flip_y == 0.05));
    CHECK(s.class_sep >= 1);
    CHECK(s.class_sep <= 5);
    double wsum = 0.0;
    for (double w : s.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("desk profile caps sample and feature counts") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const GenSpec s = sample_spec(seed, GenProfile::kDesk);
    CHECK(s.n_samples <= 2000);
    CHECK(s.n_features <= 60);
    CHECK(s.n_features % s.n_classes == 0);
    CHECK(s.n_features / s.n_classes >= 5);
  }
}

TEST_CASE("generate: exact flip count, preserved classes, valid dataset") {
  const GenSpec spec = easy_two_class_spec(5, 3);
  const Dataset ds = generate(spec);
  CHECK(ds.n() == 800);
  CHECK(ds.d() == 10);
  CHECK(ds.class_count == 2);
  const auto counts = ds.class_counts();
  CHECK(counts[0] >= 1);
  CHECK(counts[1] >= 1);

  // same spec with flips disabled differs in exactly floor(flip_y*n) labels
  // or fewer visible ones (a flip may redraw the original class)
  GenSpec clean = spec;
  clean.flip_y = 0.0;
  const Dataset base = generate(clean);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < ds.n(); ++i)
    changed += ds.target[i] != base.target[i];
  const std::size_t flips =
      static_cast<std::size_t>(spec.flip_y * double(spec.n_samples));
  CHECK(changed <= flips);
  CHECK(changed >= 1);  // a redraw may land on the original class
  CHECK(ds.features.data == base.features.data);
}

TEST_CASE("generate: observed class counts track the weights") {
  GenSpec spec = sample_spec(404, GenProfile::kDesk);
  spec.n_samples = 5000;
  spec.flip_y = 0.01;
  const Dataset ds = generate(spec);
  const auto counts = ds.class_counts();
  const double n = static_cast<double>(ds.n());
  const double phi = spec.flip_y;
  double chi2 = 0.0;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    // flips move mass toward the uniform distribution
    const double expect =
        n * (spec.weights[l] * (1.0 - phi) + phi / double(spec.n_classes));
    const double diff = static_cast<double>(counts[l]) - expect;
    chi2 += diff * diff / expect;
  }
  CHECK(chi2 <= 40.0);
}

TEST_CASE("generate: repeated feature columns are bit-exact copies") {
  const GenSpec spec = easy_two_class_spec(9, 2);
  REQUIRE(spec.n_repeated >= 1);
  const Dataset ds = generate(spec);
  bool found = false;
  for (std::size_t i = 0; i < ds.d() && !found; ++i)
    for (std::size_t j = i + 1; j < ds.d() && !found; ++j)
      found = ds.features.column(i) == ds.features.column(j);
  CHECK(found);
}

TEST_CASE("generate: high separation gives near-perfect 1NN accuracy") {
  const Dataset ds = generate(easy_two_class_spec(11, 5));
  CHECK(cross_val_accuracy(LearnerSpec::one_nn(), ds, 5, 3) >= 0.95);
}

TEST_CASE("generate: random polytope mode also produces sane data") {
  GenSpec spec = easy_two_class_spec(13, 5);
  spec.hypercube = false;
  const Dataset ds = generate(spec);
  CHECK(ds.n() == 800);
  CHECK(ds.class_counts()[0] >= 1);
}

TEST_CASE("generate is bit-identical for a fixed spec") {
  const GenSpec spec = sample_spec(271, GenProfile::kDesk);
  const Dataset a = generate(spec);
  const Dataset b = generate(spec);
  CHECK(a.features.data == b.features.data);
  CHECK(a.target == b.target);
}

TEST_CASE("generate_corpus: files, manifest, reruns, empty count") {
  const fs::path dir = fs::temp_directory_path() / "metasel_corpus_test";
  fs::remove_all(dir);

  const CorpusManifest manifest =
      generate_corpus(10, 77, dir.string(), GenProfile::kDesk, 2);
  CHECK(manifest.entries.size() == 10);
  for (const auto& e : manifest.entries) CHECK(fs::exists(e.path));

  const CorpusManifest reread =
      read_manifest((dir / "manifest.csv").string());
  REQUIRE(reread.entries.size() == 10);
  CHECK(reread.entries[3].dataset_id == manifest.entries[3].dataset_id);
  CHECK(reread.entries[3].spec.n_samples == manifest.entries[3].spec.n_samples);
  CHECK(reread.entries[3].spec.weights == manifest.entries[3].spec.weights);

  // regenerating into a second directory yields byte-identical files
  const fs::path dir2 = fs::temp_directory_path() / "metasel_corpus_test2";
  fs::remove_all(dir2);
  generate_corpus(10, 77, dir2.string(), GenProfile::kDesk, 1);
  for (int i = 0; i < 10; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "ds_%05d.csv", i);
    std::ifstream a(dir / name, std::ios::binary), b(dir2 / name, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
    const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
    REQUIRE(!bytes_a.empty());
    CHECK(bytes_a == bytes_b);
  }

  const fs::path dir3 = fs::temp_directory_path() / "metasel_corpus_test3";
  fs::remove_all(dir3);
  const CorpusManifest empty = generate_corpus(0, 1, dir3.string());
  CHECK(empty.entries.empty());
  CHECK(fs::exists(dir3 / "manifest.csv"));
}

TEST_CASE("generated datasets load back through the CSV reader") {
  const fs::path dir = fs::temp_directory_path() / "metasel_corpus_load";
  fs::remove_all(dir);
  const CorpusManifest manifest =
      generate_corpus(2, 5, dir.string(), GenProfile::kDesk, 1);
  for (const auto& e : manifest.entries) {
    const Dataset ds = load_csv(e.path, "class");
    CHECK(ds.n() == static_cast<std::size_t>(e.spec.n_samples));
    CHECK(ds.d() == static_cast<std::size_t>(e.spec.n_features));
    CHECK(ds.class_count == e.spec.n_classes);
  }
}
