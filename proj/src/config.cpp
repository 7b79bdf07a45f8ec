// Copyright 2026 The cdfn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cdfn/config.hpp"

#include <algorithm>
#include <charconv>
#include <concepts>
#include <fstream>
#include <iterator>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cdfn {
namespace {

using boost::property_tree::ptree;

ptree::path_type key(const std::string& k) { return ptree::path_type(k, '\0'); }

std::string format_u64(std::uint64_t v) { return std::to_string(v); }

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kConfig, what + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& s, const std::string& what) {
  try {
    return parse_double(s);
  } catch (const Error&) {
    throw Error(ErrorCode::kConfig, what + ": expected a number, got '" + s + "'");
  }
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(ErrorCode::kConfig, what + ": expected a boolean, got '" + s + "'");
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
}

// Reads optional keys of one INI section into typed fields.
class Section {
 public:
  Section(const ptree& tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& k) const {
    if (auto v = tree_.get_optional<std::string>(key(k))) return *v;
    return std::nullopt;
  }
  template <std::unsigned_integral T>
  void read(const std::string& k, T& out) const {
    if (auto v = raw(k)) out = static_cast<T>(parse_u64(*v, where(k)));
  }
  void read(const std::string& k, double& out) const {
    if (auto v = raw(k)) out = parse_real(*v, where(k));
  }
  void read(const std::string& k, bool& out) const {
    if (auto v = raw(k)) out = parse_bool(*v, where(k));
  }
  void read(const std::string& k, std::string& out) const {
    if (auto v = raw(k)) out = *v;
  }
  std::string where(const std::string& k) const { return "[" + name_ + "] " + k; }

  void check_known(const std::vector<std::string>& known) const {
    for (const auto& [k, _] : tree_) {
      if (std::ranges::find(known, k) == known.end()) {
        throw Error(ErrorCode::kConfig, "unknown key " + where(k));
      }
    }
  }

 private:
  const ptree& tree_;
  std::string name_;
};

const std::vector<std::string> kLayerKeys = {
    "filters", "patch",    "pool",    "stride",        "alpha",           "lcn_window",
    "lcn_sigma", "zca_epsilon", "patches", "kmeans_iters", "dense_preprocess"};

void read_layer(const Section& s, const std::string& prefix, LayerSpec& l) {
  s.read(prefix + "filters", l.filters);
  s.read(prefix + "patch", l.patch_side);
  s.read(prefix + "pool", l.pool_side);
  s.read(prefix + "stride", l.pool_stride);
  s.read(prefix + "alpha", l.pool_alpha);
  s.read(prefix + "lcn_window", l.lcn_window);
  s.read(prefix + "lcn_sigma", l.lcn_sigma);
  s.read(prefix + "zca_epsilon", l.zca_epsilon);
  s.read(prefix + "patches", l.n_patches);
  s.read(prefix + "kmeans_iters", l.kmeans_iters);
  s.read(prefix + "dense_preprocess", l.dense_preprocess);
}

void write_layer(ptree& t, const std::string& prefix, const LayerSpec& l) {
  t.put(key(prefix + "filters"), format_u64(l.filters));
  t.put(key(prefix + "patch"), format_u64(l.patch_side));
  t.put(key(prefix + "pool"), format_u64(l.pool_side));
  t.put(key(prefix + "stride"), format_u64(l.pool_stride));
  t.put(key(prefix + "alpha"), format_double(l.pool_alpha));
  t.put(key(prefix + "lcn_window"), format_u64(l.lcn_window));
  t.put(key(prefix + "lcn_sigma"), format_double(l.lcn_sigma));
  t.put(key(prefix + "zca_epsilon"), format_double(l.zca_epsilon));
  t.put(key(prefix + "patches"), format_u64(l.n_patches));
  t.put(key(prefix + "kmeans_iters"), format_u64(l.kmeans_iters));
  t.put(key(prefix + "dense_preprocess"), l.dense_preprocess ? "true" : "false");
}

std::vector<std::string> network_keys() {
  std::vector<std::string> keys = {"base",    "name",          "scale_factor",  "rectifier",
                                   "descriptor_mode", "group_size", "mirror", "rotations",
                                   "seed",    "seed_patches",  "seed_kmeans1",  "seed_kmeans2",
                                   "seed_grouping"};
  for (const auto& k : kLayerKeys) {
    keys.push_back("l1_" + k);
    keys.push_back("l2_" + k);
  }
  return keys;
}

NetworkConfig read_network(const ptree& tree, const std::string& section_name) {
  const Section s(tree, section_name);
  s.check_known(network_keys());
  NetworkConfig cfg;
  if (auto base = s.raw("base")) cfg = preset_network(*base);
  cfg.name = section_name;
  s.read("name", cfg.name);
  if (auto v = s.raw("scale_factor")) {
    if (*v == "none" || v->empty()) {
      cfg.scale_factor.reset();
    } else {
      cfg.scale_factor = parse_real(*v, s.where("scale_factor"));
    }
  }
  if (auto v = s.raw("rectifier")) cfg.rectifier = parse_rectifier(*v);
  if (auto v = s.raw("descriptor_mode")) cfg.descriptor_mode = parse_descriptor_mode(*v);
  s.read("group_size", cfg.group_size);
  read_layer(s, "l1_", cfg.layer1);
  read_layer(s, "l2_", cfg.layer2);
  s.read("mirror", cfg.augment.mirror);
  if (auto v = s.raw("rotations")) {
    cfg.augment.rotations_deg.clear();
    for (const auto& w : split_words(*v)) {
      cfg.augment.rotations_deg.push_back(parse_real(w, s.where("rotations")));
    }
  }
  if (auto v = s.raw("seed")) cfg.seeds = NetworkSeeds::from_base(parse_u64(*v, s.where("seed")));
  s.read("seed_patches", cfg.seeds.patches);
  s.read("seed_kmeans1", cfg.seeds.kmeans1);
  s.read("seed_kmeans2", cfg.seeds.kmeans2);
  s.read("seed_grouping", cfg.seeds.grouping);
  cfg.augment.scale_factor = cfg.scale_factor;
  cfg.validate();
  return cfg;
}

ptree read_ini_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return tree;
}

}  // namespace

NetworkSeeds NetworkSeeds::from_base(std::uint64_t base) {
  return {SeededRng::derive(base, 0), SeededRng::derive(base, 1), SeededRng::derive(base, 2),
          SeededRng::derive(base, 3)};
}

NetworkSeeds NetworkSeeds::for_fold(std::size_t fold) const {
  return {SeededRng::derive(patches, fold), SeededRng::derive(kmeans1, fold),
          SeededRng::derive(kmeans2, fold), SeededRng::derive(grouping, fold)};
}

std::string_view to_string(DescriptorMode m) {
  return m == DescriptorMode::kLayer2Only ? "layer2_only" : "concat_layers";
}

DescriptorMode parse_descriptor_mode(std::string_view s) {
  if (s == "layer2_only") return DescriptorMode::kLayer2Only;
  if (s == "concat_layers") return DescriptorMode::kConcatLayers;
  throw Error(ErrorCode::kConfig, "unknown descriptor mode '" + std::string(s) + "'");
}

LayerConfig NetworkConfig::layer_config(int layer) const {
  const LayerSpec& l = layer == 1 ? layer1 : layer2;
  LayerConfig c;
  c.rectifier = rectifier;
  c.pool_side = l.pool_side;
  c.pool_stride = l.pool_stride;
  c.pool_alpha = l.pool_alpha;
  c.lcn_window = l.lcn_window;
  c.lcn_sigma = l.lcn_sigma;
  c.dense_preprocess = l.dense_preprocess;
  return c;
}

void NetworkConfig::validate() const {
  if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
    throw Error(ErrorCode::kConfig, "network name must be a non-empty word");
  }
  for (const LayerSpec* l : {&layer1, &layer2}) {
    if (l->filters < 1 || l->patch_side < 1 || l->n_patches < 1 || l->kmeans_iters < 1) {
      throw Error(ErrorCode::kConfig, name + ": filters, patch, patches and kmeans_iters must be >= 1");
    }
    if (!(l->zca_epsilon > 0.0)) throw Error(ErrorCode::kConfig, name + ": zca_epsilon must be > 0");
    if (l->filters > l->n_patches) {
      throw Error(ErrorCode::kConfig, name + ": more filters than sampled patches");
    }
  }
  layer_config(1).validate();
  layer_config(2).validate();
  AugmentPlan plan = augment;
  plan.scale_factor = scale_factor;
  plan.validate();
  const std::size_t maps1 = layer1.filters * (rectifier == Rectifier::kOnOff ? 2 : 1);
  if (group_size == 0 || maps1 % group_size != 0) {
    throw Error(ErrorCode::kInvalidGrouping, name + ": group size " + std::to_string(group_size) +
                                                 " does not divide " + std::to_string(maps1) +
                                                 " layer-1 maps");
  }
}

LayerSpec default_layer2() {
  LayerSpec l;
  l.filters = 75;
  l.patch_side = 3;
  l.pool_side = 3;
  l.pool_stride = 3;
  l.lcn_window = 3;
  l.lcn_sigma = 3.0 / 4.0;
  l.zca_epsilon = 0.1;
  l.n_patches = 200000;
  return l;
}

NetworkConfig preset_network(std::string_view name) {
  NetworkConfig cfg;
  cfg.name = std::string(name);
  cfg.layer2 = default_layer2();
  if (name == "N1") return cfg;
  if (name == "N2") {
    cfg.layer1.pool_stride = 8;
    return cfg;
  }
  if (name == "N3") {
    cfg.layer1.pool_side = 9;
    cfg.layer1.pool_stride = 9;
    return cfg;
  }
  if (name == "N4") {
    // 32x32 input, 8x8 filters.
    cfg.scale_factor = 1.0 / 3.0;
    cfg.augment.scale_factor = cfg.scale_factor;
    cfg.layer1.patch_side = 8;
    cfg.layer1.pool_side = 4;
    cfg.layer1.pool_stride = 4;
    return cfg;
  }
  if (name == "N5") {
    cfg.rectifier = Rectifier::kOnOff;
    return cfg;
  }
  throw Error(ErrorCode::kConfig, "unknown preset network '" + std::string(name) + "'");
}

const NetworkConfig& ExperimentConfig::network(std::string_view name) const {
  const auto it = std::ranges::find(networks, name, &NetworkConfig::name);
  if (it == networks.end()) {
    throw Error(ErrorCode::kConfig, "experiment has no network '" + std::string(name) + "'");
  }
  return *it;
}

ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir) {
  const ptree tree = read_ini_text(text);
  const auto exp_tree = tree.get_child_optional(key("experiment"));
  if (!exp_tree) throw Error(ErrorCode::kConfig, "missing [experiment] section");
  const Section s(*exp_tree, "experiment");
  s.check_known({"train_images", "train_labels", "test_images", "test_labels", "fold_plan",
                 "num_folds", "fold_size", "num_train", "folds", "networks", "reg_c",
                 "cross_validate_c", "svm_max_epochs", "svm_tolerance", "standardize",
                 "num_classes", "normalization"});

  ExperimentConfig exp;
  auto path_key = [&](const std::string& k, std::filesystem::path& out) {
    if (auto v = s.raw(k)) {
      std::filesystem::path p(*v);
      out = p.is_absolute() ? p : base_dir / p;
    }
  };
  path_key("train_images", exp.train_images);
  path_key("train_labels", exp.train_labels);
  path_key("test_images", exp.test_images);
  path_key("test_labels", exp.test_labels);
  path_key("fold_plan", exp.fold_plan);
  s.read("num_folds", exp.fold_shape.num_folds);
  s.read("fold_size", exp.fold_shape.fold_size);
  s.read("num_train", exp.fold_shape.num_images);
  if (auto v = s.raw("folds")) {
    for (const auto& w : split_words(*v)) {
      exp.folds.push_back(static_cast<std::size_t>(parse_u64(w, s.where("folds"))));
    }
  }
  s.read("reg_c", exp.svm.reg_c);
  s.read("cross_validate_c", exp.cross_validate_c);
  s.read("svm_max_epochs", exp.svm.max_epochs);
  s.read("svm_tolerance", exp.svm.tolerance);
  s.read("standardize", exp.svm.standardize);
  std::uint64_t classes = 0;
  s.read("num_classes", classes);
  exp.svm.num_classes = static_cast<int>(classes);
  if (auto v = s.raw("normalization")) exp.normalization = parse_normalization(*v);

  const auto names = split_words(s.raw("networks").value_or(""));
  if (names.empty()) throw Error(ErrorCode::kConfig, "[experiment] networks is empty");
  for (const auto& n : names) {
    const auto sec = tree.get_child_optional(key(n));
    if (!sec) throw Error(ErrorCode::kConfig, "no section [" + n + "] for network " + n);
    NetworkConfig cfg = read_network(*sec, n);
    if (std::ranges::find(exp.networks, cfg.name, &NetworkConfig::name) != exp.networks.end()) {
      throw Error(ErrorCode::kConfig, "duplicate network name " + cfg.name);
    }
    exp.networks.push_back(std::move(cfg));
  }
  for (const auto f : exp.folds) {
    if (f >= exp.fold_shape.num_folds) {
      throw Error(ErrorCode::kConfig, "fold " + std::to_string(f) + " out of range");
    }
  }
  return exp;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_experiment(text, path.parent_path());
}

std::string format_network_ini(const NetworkConfig& cfg) {
  ptree t;
  t.put(key("name"), cfg.name);
  t.put(key("scale_factor"), cfg.scale_factor ? format_double(*cfg.scale_factor) : "none");
  t.put(key("rectifier"), std::string(to_string(cfg.rectifier)));
  t.put(key("descriptor_mode"), std::string(to_string(cfg.descriptor_mode)));
  t.put(key("group_size"), format_u64(cfg.group_size));
  write_layer(t, "l1_", cfg.layer1);
  write_layer(t, "l2_", cfg.layer2);
  t.put(key("mirror"), cfg.augment.mirror ? "true" : "false");
  std::string rotations;
  for (const double a : cfg.augment.rotations_deg) {
    if (!rotations.empty()) rotations += ' ';
    rotations += format_double(a);
  }
  t.put(key("rotations"), rotations);
  t.put(key("seed_patches"), format_u64(cfg.seeds.patches));
  t.put(key("seed_kmeans1"), format_u64(cfg.seeds.kmeans1));
  t.put(key("seed_kmeans2"), format_u64(cfg.seeds.kmeans2));
  t.put(key("seed_grouping"), format_u64(cfg.seeds.grouping));
  ptree root;
  root.add_child(key("network"), t);
  std::ostringstream out;
  boost::property_tree::write_ini(out, root);
  return out.str();
}

NetworkConfig parse_network_ini(std::string_view text) {
  const ptree tree = read_ini_text(text);
  const auto sec = tree.get_child_optional(key("network"));
  if (!sec) throw Error(ErrorCode::kConfig, "missing [network] section");
  return read_network(*sec, "network");
}

bool operator==(const LayerSpec& a, const LayerSpec& b) {
  return a.filters == b.filters && a.patch_side == b.patch_side && a.pool_side == b.pool_side &&
         a.pool_stride == b.pool_stride && a.pool_alpha == b.pool_alpha &&
         a.lcn_window == b.lcn_window && a.lcn_sigma == b.lcn_sigma &&
         a.zca_epsilon == b.zca_epsilon && a.n_patches == b.n_patches &&
         a.kmeans_iters == b.kmeans_iters && a.dense_preprocess == b.dense_preprocess;
}

bool operator==(const NetworkConfig& a, const NetworkConfig& b) {
  return a.name == b.name && a.scale_factor == b.scale_factor && a.rectifier == b.rectifier &&
         a.layer1 == b.layer1 && a.layer2 == b.layer2 && a.group_size == b.group_size &&
         a.augment.mirror == b.augment.mirror &&
         a.augment.rotations_deg == b.augment.rotations_deg && a.seeds == b.seeds &&
         a.descriptor_mode == b.descriptor_mode;
}

}  // namespace cdfn
