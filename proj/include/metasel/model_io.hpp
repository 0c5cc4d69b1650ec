#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "metasel/metalearn.hpp"

namespace metasel {

// Versioned little-endian binary container for fitted meta-learners, with
// the feature and label schemas embedded.

namespace detail {

constexpr char kModelMagic[8] = {'M', 'S', 'E', 'L', 'M', 'D', 'L', '1'};

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write model file: " + path);
  }

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, 4);
  }
  void u64(std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, 8);
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void raw(const char* data, std::size_t n) {
    out_.write(data, static_cast<std::streamsize>(n));
  }
  void check() {
    if (!out_) throw Error("model write failed");
  }

 private:
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path)
      : in_(path, std::ios::binary) {
    if (!in_) throw Error("cannot open model file: " + path);
  }

  std::uint8_t u8() {
    int c = in_.get();
    if (c == EOF) fail();
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    char buf[4];
    if (!in_.read(buf, 4)) fail();
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    char buf[8];
    if (!in_.read(buf, 8)) fail();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    if (n && !in_.read(s.data(), n)) fail();
    return s;
  }
  void raw(char* data, std::size_t n) {
    if (n && !in_.read(data, static_cast<std::streamsize>(n))) fail();
  }

 private:
  [[noreturn]] void fail() { throw Error("model file truncated or corrupt"); }
  std::ifstream in_;
};

inline void write_matrix(BinaryWriter& w, const Matrix& m) {
  w.u64(m.rows);
  w.u64(m.cols);
  for (double v : m.data) w.f64(v);
}

inline Matrix read_matrix(BinaryReader& r) {
  Matrix m;
  m.rows = r.u64();
  m.cols = r.u64();
  m.data.resize(m.rows * m.cols);
  for (double& v : m.data) v = r.f64();
  return m;
}

inline void write_tree(BinaryWriter& w, const TreeModel& tree) {
  w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
  for (const auto& node : tree.nodes) {
    w.i32(node.feature);
    w.f64(node.threshold);
    w.i32(node.left);
    w.i32(node.right);
    w.i32(node.majority);
    w.u32(static_cast<std::uint32_t>(node.class_fraction.size()));
    for (double v : node.class_fraction) w.f64(v);
  }
  w.i32(tree.leaf_count);
  w.i32(tree.depth);
  w.u32(static_cast<std::uint32_t>(tree.gini_importances.size()));
  for (double v : tree.gini_importances) w.f64(v);
  w.i32(tree.class_count);
}

inline TreeModel read_tree(BinaryReader& r) {
  TreeModel tree;
  tree.nodes.resize(r.u32());
  for (auto& node : tree.nodes) {
    node.feature = r.i32();
    node.threshold = r.f64();
    node.left = r.i32();
    node.right = r.i32();
    node.majority = r.i32();
    node.class_fraction.resize(r.u32());
    for (double& v : node.class_fraction) v = r.f64();
  }
  tree.leaf_count = r.i32();
  tree.depth = r.i32();
  tree.gini_importances.resize(r.u32());
  for (double& v : tree.gini_importances) v = r.f64();
  tree.class_count = r.i32();
  return tree;
}

}  // namespace detail

inline void save_model(const MetaLearnerModel& model,
                       const std::string& path) {
  detail::BinaryWriter w(path);
  w.raw(detail::kModelMagic, 8);
  w.u32(1);  // container version
  w.u8(static_cast<std::uint8_t>(model.kind));

  w.u32(static_cast<std::uint32_t>(model.feature_schema.size()));
  for (const auto& name : model.feature_schema) w.str(name);

  w.u32(static_cast<std::uint32_t>(model.label_schema.size()));
  for (const auto& id : model.label_schema) {
    w.u8(static_cast<std::uint8_t>(id.family));
    w.i32(id.grid_index);
    w.u32(static_cast<std::uint32_t>(id.params.size()));
    for (const auto& [k, v] : id.params) {
      w.str(k);
      w.str(v);
    }
  }

  w.u32(static_cast<std::uint32_t>(model.standardizer.mean.size()));
  for (double v : model.standardizer.mean) w.f64(v);
  for (double v : model.standardizer.scale) w.f64(v);

  switch (model.kind) {
    case MetaLearnerKind::kMlknn: {
      const auto& st = model.mlknn;
      w.i32(st.k);
      w.f64(st.smoothing);
      detail::write_matrix(w, st.train_x);
      w.u64(st.train_y.size());
      for (const auto& row : st.train_y)
        for (std::uint8_t b : row) w.u8(b);
      for (double v : st.prior_pos) w.f64(v);
      detail::write_matrix(w, st.cond_pos);
      detail::write_matrix(w, st.cond_neg);
      break;
    }
    case MetaLearnerKind::kBirel: {
      w.u32(static_cast<std::uint32_t>(model.birel.trees.size()));
      for (const auto& tree : model.birel.trees) detail::write_tree(w, tree);
      break;
    }
    case MetaLearnerKind::kRakel: {
      const auto& st = model.rakel;
      w.u32(static_cast<std::uint32_t>(st.subsets.size()));
      for (std::size_t m = 0; m < st.subsets.size(); ++m) {
        w.u32(static_cast<std::uint32_t>(st.subsets[m].size()));
        for (std::size_t j : st.subsets[m]) w.u64(j);
        w.u32(static_cast<std::uint32_t>(st.patterns[m].size()));
        for (std::uint32_t bits : st.patterns[m]) w.u32(bits);
        detail::write_tree(w, st.trees[m]);
      }
      break;
    }
  }
  w.check();
}

inline MetaLearnerModel load_model(const std::string& path) {
  detail::BinaryReader r(path);
  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, detail::kModelMagic, 8) != 0)
    throw Error(path + ": not a meta-learner model file");
  const std::uint32_t version = r.u32();
  if (version != 1)
    throw Error(path + ": unsupported model container version " +
                std::to_string(version));

  MetaLearnerModel model;
  model.kind = static_cast<MetaLearnerKind>(r.u8());

  model.feature_schema.resize(r.u32());
  for (auto& name : model.feature_schema) name = r.str();

  model.label_schema.resize(r.u32());
  for (auto& id : model.label_schema) {
    id.family = static_cast<ModelFamily>(r.u8());
    id.grid_index = r.i32();
    id.params.resize(r.u32());
    for (auto& [k, v] : id.params) {
      k = r.str();
      v = r.str();
    }
  }

  const std::uint32_t d = r.u32();
  model.standardizer.mean.resize(d);
  model.standardizer.scale.resize(d);
  for (double& v : model.standardizer.mean) v = r.f64();
  for (double& v : model.standardizer.scale) v = r.f64();

  const std::size_t p = model.label_schema.size();
  switch (model.kind) {
    case MetaLearnerKind::kMlknn: {
      auto& st = model.mlknn;
      st.k = r.i32();
      st.smoothing = r.f64();
      st.train_x = detail::read_matrix(r);
      st.train_y.resize(r.u64());
      for (auto& row : st.train_y) {
        row.resize(p);
        for (auto& b : row) b = r.u8();
      }
      st.prior_pos.resize(p);
      for (double& v : st.prior_pos) v = r.f64();
      st.cond_pos = detail::read_matrix(r);
      st.cond_neg = detail::read_matrix(r);
      break;
    }
    case MetaLearnerKind::kBirel: {
      model.birel.trees.resize(r.u32());
      for (auto& tree : model.birel.trees) tree = detail::read_tree(r);
      break;
    }
    case MetaLearnerKind::kRakel: {
      auto& st = model.rakel;
      const std::uint32_t members = r.u32();
      st.subsets.resize(members);
      st.patterns.resize(members);
      st.trees.resize(members);
      for (std::uint32_t m = 0; m < members; ++m) {
        st.subsets[m].resize(r.u32());
        for (std::size_t& j : st.subsets[m]) j = r.u64();
        st.patterns[m].resize(r.u32());
        for (std::uint32_t& bits : st.patterns[m]) bits = r.u32();
        st.trees[m] = detail::read_tree(r);
      }
      break;
    }
  }
  return model;
}

}  // namespace metasel
