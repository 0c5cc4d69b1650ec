#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "metasel/dataset.hpp"
#include "metasel/synthgen.hpp"

using namespace metasel;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "metasel_tabular_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path path = scratch_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

Dataset small_dataset(std::size_t n, int c, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.features = Matrix(n, 3);
  ds.target.resize(n);
  ds.class_count = c;
  for (std::size_t i = 0; i < n; ++i) {
    ds.target[i] = static_cast<int>(i % static_cast<std::size_t>(c));
    for (std::size_t f = 0; f < 3; ++f) ds.features.at(i, f) = rng.normal();
  }
  ds.feature_names = {"a", "b", "c"};
  for (int l = 0; l < c; ++l) ds.class_labels.push_back(std::to_string(l));
  return ds;
}

}  // namespace

TEST_CASE("load_csv encodes the target in first-appearance order") {
  const auto path = write_file("encode.csv", "x1,x2,y\n1,4,a\n2,5,b\n3,6,a\n");
  const Dataset ds = load_csv(path.string(), "y");
  CHECK(ds.n() == 3);
  CHECK(ds.d() == 2);
  CHECK(ds.class_count == 2);
  CHECK(ds.target == std::vector<int>{0, 1, 0});
  CHECK(ds.class_labels == std::vector<std::string>{"a", "b"});
  CHECK(ds.feature_names == std::vector<std::string>{"x1", "x2"});
}

TEST_CASE("load_csv imputes empty cells with the column median") {
  const auto path =
      write_file("impute.csv", "x,y\n1.0,a\n,b\n3.0,a\n");
  const Dataset ds = load_csv(path.string(), "y");
  CHECK(ds.features.at(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("load_csv rejects a single-class target") {
  const auto path = write_file("oneclass.csv", "x,y\n1,a\n2,a\n3,a\n");
  CHECK_THROWS_WITH_AS(load_csv(path.string(), "y"),
                       doctest::Contains("fewer than 2 classes"), Error);
}

TEST_CASE("load_csv names the offending non-numeric column") {
  const auto path =
      write_file("cat.csv", "x,color,y\n1,red,a\n2,blue,b\n");
  CHECK_THROWS_WITH_AS(load_csv(path.string(), "y"),
                       doctest::Contains("color"), Error);
}

TEST_CASE("load_csv rejects a missing target column") {
  const auto path = write_file("notarget.csv", "x,y\n1,a\n2,b\n");
  CHECK_THROWS_AS(load_csv(path.string(), "z"), Error);
}

TEST_CASE("load_csv rejects a missing file") {
  CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv", "y"), Error);
}

TEST_CASE("CSV load/write/load round-trip is bit-exact") {
  const GenSpec spec = sample_spec(77, GenProfile::kDesk);
  const Dataset generated = generate(spec);
  const auto path = scratch_dir() / "roundtrip.csv";
  write_csv(generated, path.string(), "class");

  const Dataset first = load_csv(path.string(), "class");
  const auto path2 = scratch_dir() / "roundtrip2.csv";
  write_csv(first, path2.string(), "class");
  const Dataset second = load_csv(path2.string(), "class");

  REQUIRE(second.n() == first.n());
  REQUIRE(second.d() == first.d());
  CHECK(second.features.data == first.features.data);  // bitwise equality
  CHECK(second.target == first.target);
  CHECK(second.feature_names == first.feature_names);
  CHECK(second.class_labels == first.class_labels);

  const auto path3 = scratch_dir() / "roundtrip3.csv";
  write_csv(second, path3.string(), "class");
  std::ifstream a(path2, std::ios::binary), b(path3, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(bytes_a == bytes_b);
}

TEST_CASE("split stratifies a balanced binary dataset 80/20") {
  const Dataset ds = small_dataset(100, 2, 5);
  const SplitPair parts = split(ds, 0.2, 7);
  CHECK(parts.train.n() == 80);
  CHECK(parts.validation.n() == 20);
  const auto train_counts = parts.train.class_counts();
  const auto val_counts = parts.validation.class_counts();
  CHECK(train_counts == std::vector<std::size_t>{40, 40});
  CHECK(val_counts == std::vector<std::size_t>{10, 10});
}

TEST_CASE("split is deterministic for a fixed seed") {
  const Dataset ds = small_dataset(60, 3, 6);
  const SplitPair a = split(ds, 0.25, 42);
  const SplitPair b = split(ds, 0.25, 42);
  CHECK(a.train.features.data == b.train.features.data);
  CHECK(a.validation.target == b.validation.target);
}

TEST_CASE("split rejects a class with fewer than 2 instances") {
  Dataset ds = small_dataset(10, 2, 3);
  for (std::size_t i = 0; i < 10; ++i) ds.target[i] = i == 0 ? 1 : 0;
  CHECK_THROWS_AS(split(ds, 0.2, 1), Error);
}

TEST_CASE("split reconstructs the parent's row multiset") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const std::size_t n = 20 + rng.index(60);
    const int c = 2 + static_cast<int>(rng.index(3));
    const Dataset ds = small_dataset(n, c, seed + 100);
    const SplitPair parts = split(ds, 0.3, seed);

    auto collect = [](const Dataset& d) {
      std::multiset<std::vector<double>> rows;
      for (std::size_t r = 0; r < d.n(); ++r) {
        auto row = d.features.row(r);
        std::vector<double> v(row.begin(), row.end());
        v.push_back(static_cast<double>(d.target[r]));
        rows.insert(std::move(v));
      }
      return rows;
    };
    auto joined = collect(parts.train);
    const auto val = collect(parts.validation);
    joined.insert(val.begin(), val.end());
    CHECK(joined == collect(ds));
  }
}

TEST_CASE("stratified folds balance every class") {
  const Dataset ds = small_dataset(10, 2, 9);
  const FoldPlan plan = stratified_folds(ds, 5, 3);
  for (int fold = 0; fold < 5; ++fold) {
    std::vector<int> per_class(2, 0);
    for (std::size_t i = 0; i < ds.n(); ++i)
      if (plan.fold_assignments[i] == fold)
        per_class[static_cast<std::size_t>(ds.target[i])]++;
    CHECK(per_class == std::vector<int>{1, 1});
  }
}

TEST_CASE("stratified folds: per-class counts differ by at most one") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed);
    const int c = 2 + static_cast<int>(rng.index(3));
    const std::size_t n = 30 + rng.index(100);
    const int k = 2 + static_cast<int>(rng.index(4));
    const Dataset ds = small_dataset(n, c, seed + 50);
    const FoldPlan plan = stratified_folds(ds, k, seed);
    for (int l = 0; l < c; ++l) {
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (std::size_t i = 0; i < ds.n(); ++i)
        if (ds.target[i] == l)
          counts[static_cast<std::size_t>(plan.fold_assignments[i])]++;
      const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
      CHECK(*hi - *lo <= 1);
    }
  }
}

TEST_CASE("stratified folds are deterministic and reject small classes") {
  const Dataset ds = small_dataset(40, 2, 11);
  const FoldPlan a = stratified_folds(ds, 5, 13);
  const FoldPlan b = stratified_folds(ds, 5, 13);
  CHECK(a.fold_assignments == b.fold_assignments);

  Dataset skewed = small_dataset(20, 2, 12);
  for (std::size_t i = 0; i < skewed.n(); ++i)
    skewed.target[i] = i < 3 ? 1 : 0;  // class 1 has 3 members
  CHECK_THROWS_AS(stratified_folds(skewed, 5, 1), Error);
}
