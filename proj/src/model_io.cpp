#include "pvedge/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "pvedge/errors.hpp"

namespace pvedge {

namespace {

constexpr char kMagic[4] = {'G', 'B', 'T', 'M'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xff));
  }
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int shift = 0; shift < 64; shift += 8) {
    out.push_back(static_cast<char>((bits >> shift) & 0xff));
  }
}

class Reader {
public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(raw(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
  double f64() { return std::bit_cast<double>(raw(8)); }
  std::uint8_t u8() { return static_cast<std::uint8_t>(raw(1)); }

  void expect_magic() {
    if (bytes_.size() < 4 || std::memcmp(bytes_.data(), kMagic, 4) != 0) {
      throw ModelFormatError("not a GBTM model file (bad magic)");
    }
    pos_ = 4;
  }

  void expect_end() const {
    if (pos_ != bytes_.size()) {
      throw ModelFormatError("trailing bytes after model payload");
    }
  }

private:
  std::uint64_t raw(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw ModelFormatError("truncated model payload");
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += n;
    return v;
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

// Caps a corrupted node count before it turns into a huge allocation.
std::size_t checked_nodes(std::uint32_t n_nodes, std::size_t payload_size) {
  // Each node needs at least 1 byte of nan flags in the payload.
  if (n_nodes == 0 || n_nodes > payload_size) {
    throw ModelFormatError("implausible node count in model payload");
  }
  return n_nodes;
}

}  // namespace

std::string serialize_model(const GBTEnsemble& model) {
  require_valid(model);
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kModelFormatVersion);
  put_u16(out, 0);  // reserved
  put_u32(out, model.n_features);
  put_f64(out, model.bias);
  put_u32(out, static_cast<std::uint32_t>(model.trees.size()));
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    const auto& tree = model.trees[k];
    const std::size_t n = tree.node_count();
    put_f64(out, model.weights[k]);
    put_u32(out, static_cast<std::uint32_t>(n));
    for (const auto v : tree.cut_predictor_index) put_u32(out, v);
    for (const auto v : tree.children) put_u32(out, v);
    for (const auto v : tree.cut_point) put_f64(out, v);
    for (const auto v : tree.nan_cut_points) {
      out.push_back(static_cast<char>(v ? 1 : 0));
    }
    for (const auto v : tree.node_mean) put_f64(out, v);
  }
  return out;
}

GBTEnsemble deserialize_model(const std::string& bytes) {
  Reader reader(bytes);
  reader.expect_magic();
  const std::uint16_t version = reader.u16();
  if (version != kModelFormatVersion) {
    throw ModelFormatError("unsupported model format version " +
                           std::to_string(version));
  }
  reader.u16();  // reserved

  GBTEnsemble model;
  model.n_features = reader.u32();
  model.bias = reader.f64();
  const std::uint32_t n_trees = reader.u32();
  // No reserve from the untrusted count; truncation throws on first read.
  for (std::uint32_t k = 0; k < n_trees; ++k) {
    model.weights.push_back(reader.f64());
    CompactRegressionTree tree;
    const std::size_t n = checked_nodes(reader.u32(), bytes.size());
    tree.cut_predictor_index.resize(n);
    for (auto& v : tree.cut_predictor_index) v = reader.u32();
    tree.children.resize(2 * n);
    for (auto& v : tree.children) v = reader.u32();
    tree.cut_point.resize(n);
    for (auto& v : tree.cut_point) v = reader.f64();
    tree.nan_cut_points.resize(n);
    for (auto& v : tree.nan_cut_points) v = reader.u8();
    tree.node_mean.resize(n);
    for (auto& v : tree.node_mean) v = reader.f64();
    model.trees.push_back(std::move(tree));
  }
  reader.expect_end();
  require_valid(model);
  return model;
}

void save_model(const GBTEnsemble& model, const std::string& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open model file for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed to write model file: " + path);
}

GBTEnsemble load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
    return deserialize_model(bytes);
  }
  return model_from_json(bytes);
}

namespace {

nlohmann::json finite_or_null_array(const std::vector<double>& values) {
  nlohmann::json arr = nlohmann::json::array();
  for (const double v : values) {
    if (std::isfinite(v)) {
      arr.push_back(v);
    } else {
      arr.push_back(nullptr);  // matches nlohmann's own NaN handling
    }
  }
  return arr;
}

std::vector<double> doubles_from(const nlohmann::json& arr, const char* field) {
  if (!arr.is_array()) {
    throw ModelFormatError(std::string("model JSON: '") + field +
                           "' must be an array");
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (v.is_null()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      throw ModelFormatError(std::string("model JSON: '") + field +
                             "' holds a non-numeric entry");
    }
  }
  return out;
}

}  // namespace

std::string model_to_json(const GBTEnsemble& model) {
  require_valid(model);
  nlohmann::json doc;
  doc["format"] = "GBTM";
  doc["version"] = kModelFormatVersion;
  doc["n_features"] = model.n_features;
  doc["bias"] = model.bias;
  doc["trees"] = nlohmann::json::array();
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    const auto& tree = model.trees[k];
    nlohmann::json t;
    t["weight"] = model.weights[k];
    t["cut_predictor_index"] = tree.cut_predictor_index;
    t["children"] = tree.children;
    t["cut_point"] = finite_or_null_array(tree.cut_point);
    t["nan_cut_points"] = nlohmann::json::array();
    for (const auto v : tree.nan_cut_points) {
      t["nan_cut_points"].push_back(v != 0);
    }
    t["node_mean"] = finite_or_null_array(tree.node_mean);
    doc["trees"].push_back(std::move(t));
  }
  return doc.dump(2);
}

GBTEnsemble model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelFormatError(std::string("model JSON parse failure: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "GBTM") {
      throw ModelFormatError("model JSON: missing or wrong 'format' tag");
    }
    if (doc.value("version", 0) != kModelFormatVersion) {
      throw ModelFormatError("model JSON: unsupported version");
    }
    GBTEnsemble model;
    model.n_features = doc.at("n_features").get<std::uint32_t>();
    model.bias = doc.at("bias").get<double>();
    for (const auto& t : doc.at("trees")) {
      model.weights.push_back(t.at("weight").get<double>());
      CompactRegressionTree tree;
      tree.cut_predictor_index =
          t.at("cut_predictor_index").get<std::vector<std::uint32_t>>();
      tree.children = t.at("children").get<std::vector<std::uint32_t>>();
      tree.cut_point = doubles_from(t.at("cut_point"), "cut_point");
      for (const auto& flag : t.at("nan_cut_points")) {
        tree.nan_cut_points.push_back(flag.get<bool>() ? 1 : 0);
      }
      tree.node_mean = doubles_from(t.at("node_mean"), "node_mean");
      model.trees.push_back(std::move(tree));
    }
    require_valid(model);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("model JSON: ") + e.what());
  }
}

void save_model_json(const GBTEnsemble& model, const std::string& path) {
  const std::string text = model_to_json(model);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open JSON file for writing: " + path);
  out << text << '\n';
  if (!out) throw ConfigError("failed to write JSON file: " + path);
}

}  // namespace pvedge
