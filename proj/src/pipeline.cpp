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

#include "cdfn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cdfn/patch.hpp"

namespace cdfn {
namespace {

void report_progress(const ProgressFn& progress, const std::string& line) {
  if (progress) progress(line);
}

std::vector<FeatureMapSet> as_feature_maps(const std::vector<LabeledImage>& images) {
  std::vector<FeatureMapSet> sets;
  sets.reserve(images.size());
  for (const auto& im : images) sets.push_back(im.as_feature_maps());
  return sets;
}

std::vector<double> to_doubles(const std::vector<std::size_t>& v) {
  return {v.begin(), v.end()};
}

void add_bank(Container& c, const std::string& prefix, const FilterBank& bank) {
  c.add_columns(prefix + ".filters", bank.filters);
  c.add_vector(prefix + ".zca.mean", bank.whitening.mean);
  c.add_columns(prefix + ".zca.matrix", bank.whitening.matrix);
  c.add(prefix + ".zca.epsilon", {1}, {bank.whitening.epsilon});
}

FilterBank get_bank(const Container& c, const std::string& prefix, std::size_t patch_side,
                    std::size_t depth, int layer_index) {
  FilterBank bank;
  bank.filters = c.get_columns(prefix + ".filters");
  bank.whitening.mean = c.get_vector(prefix + ".zca.mean");
  bank.whitening.matrix = c.get_columns(prefix + ".zca.matrix");
  const auto& eps = c.get(prefix + ".zca.epsilon");
  if (eps.values.size() != 1) throw Error(ErrorCode::kFormat, prefix + ".zca.epsilon");
  bank.whitening.epsilon = eps.values[0];
  bank.patch_side = patch_side;
  bank.depth = depth;
  bank.layer_index = layer_index;
  try {
    bank.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, prefix + ": " + e.what());
  }
  return bank;
}

boost::property_tree::ptree parse_block(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::kFormat, std::string("config block: ") + e.what());
  }
  return tree;
}

std::string block_kind(const boost::property_tree::ptree& tree) {
  return tree.get<std::string>(boost::property_tree::ptree::path_type("model\x1f" "kind", '\x1f'),
                               "");
}

void expect_kind(const Container& c, const std::string& kind) {
  const std::string got = block_kind(parse_block(c.text));
  if (got != kind) {
    throw Error(ErrorCode::kFormat, "container holds '" + got + "', expected '" + kind + "'");
  }
}

std::size_t read_size(const boost::property_tree::ptree& tree, const std::string& k) {
  const auto v = tree.get_optional<std::size_t>(
      boost::property_tree::ptree::path_type("model\x1f" + k, '\x1f'));
  if (!v) throw Error(ErrorCode::kFormat, "config block lacks model." + k);
  return *v;
}

}  // namespace

std::vector<LabeledImage> prepare_images(const NetworkConfig& cfg,
                                         const std::vector<LabeledImage>& images) {
  if (!cfg.scale_factor || *cfg.scale_factor == 1.0) return images;
  std::vector<LabeledImage> out;
  out.reserve(images.size());
  for (const auto& im : images) out.push_back(scale(im, *cfg.scale_factor));
  return out;
}

std::vector<LabeledImage> training_images(const NetworkConfig& cfg,
                                          const std::vector<LabeledImage>& images) {
  AugmentPlan plan = cfg.augment;
  plan.scale_factor.reset();
  return expand_set(prepare_images(cfg, images), plan);
}

FilterBank learn_filter_bank(std::span<const FeatureMapSet> sets, const LayerSpec& spec,
                             int layer_index, std::uint64_t patch_seed,
                             std::uint64_t kmeans_seed) {
  SeededRng patch_rng(patch_seed);
  PatchMatrix patches = extract_patches(sets, spec.patch_side, spec.n_patches, patch_rng);
  normalize_columns(patches.data);
  FilterBank bank;
  bank.whitening = fit_zca(patches, spec.zca_epsilon);
  const PatchMatrix white = apply_zca(bank.whitening, patches);
  SeededRng kmeans_rng(kmeans_seed);
  bank.filters = kmeans(white, spec.filters, spec.kmeans_iters, kmeans_rng).centroids;
  bank.patch_side = spec.patch_side;
  bank.depth = patches.depth;
  bank.layer_index = layer_index;
  return bank;
}

NetworkModel train_network(const NetworkConfig& cfg, const std::vector<LabeledImage>& fold_images,
                           const ProgressFn& progress) {
  cfg.validate();
  if (fold_images.empty()) throw Error(ErrorCode::kInvalidArgument, "no training images");
  const auto images = training_images(cfg, fold_images);
  for (const auto& im : images) {
    if (im.height != images[0].height || im.width != images[0].width) {
      throw Error(ErrorCode::kDim, "training images differ in size");
    }
  }
  // Fail on shape problems before any training work.
  network_shapes(cfg, fold_images[0].height, fold_images[0].width);

  NetworkModel model;
  model.config = cfg;
  model.input_height = images[0].height;
  model.input_width = images[0].width;

  const auto sets = as_feature_maps(images);
  report_progress(progress, cfg.name + ": layer 1 filters from " + std::to_string(sets.size()) +
                                " images");
  model.layer1 = learn_filter_bank(sets, cfg.layer1, 1, cfg.seeds.patches, cfg.seeds.kmeans1);

  const LayerConfig l1 = cfg.layer_config(1);
  std::vector<FeatureMapSet> outputs(sets.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < sets.size(); ++i) outputs[i] = run_layer(sets[i], model.layer1, l1);

  SeededRng group_rng(cfg.seeds.grouping);
  model.groups = make_groups(outputs[0].depth(), cfg.group_size, group_rng);
  report_progress(progress, cfg.name + ": layer 2 filters for " +
                                std::to_string(model.groups.groups.size()) + " groups");
  model.layer2.resize(model.groups.groups.size());
  for (std::size_t g = 0; g < model.groups.groups.size(); ++g) {
    std::vector<FeatureMapSet> sliced;
    sliced.reserve(outputs.size());
    for (const auto& o : outputs) sliced.push_back(tensor_slice(o, model.groups.groups[g]));
    model.layer2[g] = learn_filter_bank(sliced, cfg.layer2, 2, SeededRng::derive(cfg.seeds.patches, g + 1),
                                        SeededRng::derive(cfg.seeds.kmeans2, g));
  }
  return model;
}

NetworkOutputs run_network(const NetworkModel& model, const LabeledImage& image) {
  if (image.height != model.input_height || image.width != model.input_width) {
    throw Error(ErrorCode::kDim, "image is " + std::to_string(image.height) + "x" +
                                     std::to_string(image.width) + " but the model expects " +
                                     std::to_string(model.input_height) + "x" +
                                     std::to_string(model.input_width));
  }
  NetworkOutputs out;
  out.layer1 = run_layer(image.as_feature_maps(), model.layer1, model.config.layer_config(1));
  const LayerConfig l2 = model.config.layer_config(2);
  std::vector<FeatureMapSet> parts;
  parts.reserve(model.layer2.size());
  for (std::size_t g = 0; g < model.layer2.size(); ++g) {
    parts.push_back(run_layer(tensor_slice(out.layer1, model.groups.groups[g]), model.layer2[g], l2));
  }
  out.layer2 = concat_depth(parts);
  return out;
}

std::vector<double> descriptor_of(const NetworkModel& model, const LabeledImage& image) {
  const auto out = run_network(model, image);
  std::vector<double> d;
  if (model.config.descriptor_mode == DescriptorMode::kConcatLayers) {
    d.assign(out.layer1.values().begin(), out.layer1.values().end());
  }
  d.insert(d.end(), out.layer2.values().begin(), out.layer2.values().end());
  return d;
}

DescriptorSet extract_descriptors(const NetworkModel& model,
                                  const std::vector<LabeledImage>& images) {
  DescriptorSet set;
  set.labels.resize(images.size());
  set.image_ids.resize(images.size());
  if (images.empty()) return set;
  std::vector<std::vector<double>> rows(images.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < images.size(); ++i) rows[i] = descriptor_of(model, images[i]);
  set.data.resize(static_cast<Eigen::Index>(rows[0].size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    set.data.col(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(rows[i].data(), static_cast<Eigen::Index>(rows[i].size()));
    set.labels[i] = images[i].label;
    set.image_ids[i] = images[i].id;
  }
  return set;
}

NetworkShapes network_shapes(const NetworkConfig& cfg, std::size_t height, std::size_t width) {
  NetworkShapes s;
  const double f = cfg.scale_factor.value_or(1.0);
  s.input = {static_cast<std::size_t>(std::lround(static_cast<double>(height) * f)),
             static_cast<std::size_t>(std::lround(static_cast<double>(width) * f)), 1};
  const LayerConfig l1 = cfg.layer_config(1);
  const LayerConfig l2 = cfg.layer_config(2);
  s.layer1_conv = conv_output_shape(s.input, cfg.layer1.patch_side, cfg.layer1.filters);
  s.layer1_pooled = layer_output_shape(s.input, cfg.layer1.patch_side, cfg.layer1.filters, l1);
  if (cfg.group_size == 0 || s.layer1_pooled.depth % cfg.group_size != 0) {
    throw Error(ErrorCode::kInvalidGrouping, "group size does not divide layer-1 depth");
  }
  s.groups = s.layer1_pooled.depth / cfg.group_size;
  const MapShape group_in{s.layer1_pooled.height, s.layer1_pooled.width, cfg.group_size};
  s.layer2_conv = conv_output_shape(group_in, cfg.layer2.patch_side, cfg.layer2.filters);
  s.layer2_pooled = layer_output_shape(group_in, cfg.layer2.patch_side, cfg.layer2.filters, l2);
  s.descriptor_dim =
      s.groups * s.layer2_pooled.height * s.layer2_pooled.width * s.layer2_pooled.depth;
  if (cfg.descriptor_mode == DescriptorMode::kConcatLayers) {
    s.descriptor_dim += s.layer1_pooled.height * s.layer1_pooled.width * s.layer1_pooled.depth;
  }
  return s;
}

Container model_to_container(const NetworkModel& model) {
  Container c;
  add_bank(c, "layer1", model.layer1);
  std::vector<double> groups;
  for (const auto& g : model.groups.groups) {
    const auto v = to_doubles(g);
    groups.insert(groups.end(), v.begin(), v.end());
  }
  c.add("groups", {model.groups.groups.size(), model.groups.group_size()}, std::move(groups));
  for (std::size_t g = 0; g < model.layer2.size(); ++g) {
    add_bank(c, "layer2." + std::to_string(g), model.layer2[g]);
  }
  c.text = "[model]\nkind=network\ninput_height=" + std::to_string(model.input_height) +
           "\ninput_width=" + std::to_string(model.input_width) + "\n" +
           format_network_ini(model.config);
  return c;
}

NetworkModel model_from_container(const Container& c) {
  expect_kind(c, "network");
  const auto tree = parse_block(c.text);
  NetworkModel model;
  model.input_height = read_size(tree, "input_height");
  model.input_width = read_size(tree, "input_width");
  try {
    model.config = parse_network_ini(c.text);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, std::string("network config block: ") + e.what());
  }
  const auto& cfg = model.config;
  model.layer1 = get_bank(c, "layer1", cfg.layer1.patch_side, 1, 1);

  const auto& groups = c.get("groups");
  if (groups.dims.size() != 2 || groups.dims[1] != cfg.group_size) {
    throw Error(ErrorCode::kFormat, "group table does not match the configured group size");
  }
  const std::size_t maps1 =
      model.layer1.count() * (cfg.rectifier == Rectifier::kOnOff ? 2 : 1);
  if (groups.dims[0] * groups.dims[1] != maps1) {
    throw Error(ErrorCode::kFormat, "group table does not cover the layer-1 maps");
  }
  std::vector<bool> seen(maps1, false);
  for (std::uint64_t g = 0; g < groups.dims[0]; ++g) {
    std::vector<std::size_t> members;
    for (std::uint64_t j = 0; j < groups.dims[1]; ++j) {
      const double v = groups.values[g * groups.dims[1] + j];
      const auto idx = static_cast<std::size_t>(v);
      if (!(v >= 0.0) || static_cast<double>(idx) != v || idx >= maps1 || seen[idx]) {
        throw Error(ErrorCode::kFormat, "group table is not a partition of the layer-1 maps");
      }
      seen[idx] = true;
      members.push_back(idx);
    }
    model.groups.groups.push_back(std::move(members));
  }
  for (std::size_t g = 0; g < model.groups.groups.size(); ++g) {
    model.layer2.push_back(
        get_bank(c, "layer2." + std::to_string(g), cfg.layer2.patch_side, cfg.group_size, 2));
  }
  return model;
}

void save_model(const std::filesystem::path& path, const NetworkModel& model) {
  save_container(path, model_to_container(model));
}

NetworkModel load_model(const std::filesystem::path& path) {
  return model_from_container(load_container(path));
}

Container svm_to_container(const SvmModel& model) {
  Container c;
  c.add_columns("svm.weights", model.weights.transpose());
  c.add_vector("svm.biases", model.biases);
  c.add_vector("svm.feature_mean", model.feature_mean);
  c.add_vector("svm.feature_std", model.feature_std);
  c.text = "[model]\nkind=svm\nreg_c=" + format_double(model.reg_c) + "\n";
  return c;
}

SvmModel svm_from_container(const Container& c) {
  expect_kind(c, "svm");
  const auto tree = parse_block(c.text);
  SvmModel m;
  m.weights = c.get_columns("svm.weights").transpose();
  m.biases = c.get_vector("svm.biases");
  m.feature_mean = c.get_vector("svm.feature_mean");
  m.feature_std = c.get_vector("svm.feature_std");
  m.reg_c = parse_double(tree.get<std::string>(
      boost::property_tree::ptree::path_type("model\x1f" "reg_c", '\x1f'), "nan"));
  if (static_cast<std::size_t>(m.biases.size()) != m.num_classes() ||
      static_cast<std::size_t>(m.feature_mean.size()) != m.dim() ||
      static_cast<std::size_t>(m.feature_std.size()) != m.dim()) {
    throw Error(ErrorCode::kFormat, "inconsistent SVM tensor shapes");
  }
  return m;
}

void save_svm(const std::filesystem::path& path, const SvmModel& model) {
  save_container(path, svm_to_container(model));
}

SvmModel load_svm(const std::filesystem::path& path) {
  return svm_from_container(load_container(path));
}

Container descriptors_to_container(const DescriptorSet& set) {
  set.validate();
  Container c;
  c.add_columns("descriptors", set.data);
  c.add("labels", {set.count()}, std::vector<double>(set.labels.begin(), set.labels.end()));
  c.add("image_ids", {set.count()},
        std::vector<double>(set.image_ids.begin(), set.image_ids.end()));
  c.text = "[model]\nkind=descriptors\n";
  return c;
}

DescriptorSet descriptors_from_container(const Container& c) {
  expect_kind(c, "descriptors");
  DescriptorSet set;
  set.data = c.get_columns("descriptors");
  for (const double v : c.get("labels").values) set.labels.push_back(static_cast<int>(v));
  for (const double v : c.get("image_ids").values) {
    set.image_ids.push_back(static_cast<std::int64_t>(v));
  }
  try {
    set.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, e.what());
  }
  return set;
}

void save_descriptors(const std::filesystem::path& path, const DescriptorSet& set) {
  save_container(path, descriptors_to_container(set));
}

DescriptorSet load_descriptors(const std::filesystem::path& path) {
  return descriptors_from_container(load_container(path));
}

ScoreTable score_table(const SvmModel& model, const DescriptorSet& set, std::string network_id) {
  const Eigen::MatrixXd s = score_all(model, set);
  ScoreTable t;
  t.network_id = std::move(network_id);
  t.image_ids = set.image_ids;
  t.rows.reserve(set.count());
  for (Eigen::Index i = 0; i < s.cols(); ++i) {
    t.rows.push_back({std::vector<double>(s.col(i).data(), s.col(i).data() + s.rows()), false});
  }
  return t;
}

SvmModel train_classifier(const DescriptorSet& train, const ExperimentConfig& exp) {
  SvmOptions options = exp.svm;
  if (exp.cross_validate_c) options.reg_c = select_reg_c(train, options, kDefaultRegGrid);
  return train_ova_svm(train, options);
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (const double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / (n - 1.0));
  return out;
}

MeanStd ExperimentReport::network_summary(const std::string& name) const {
  const auto it = network_accuracy.find(name);
  if (it == network_accuracy.end()) {
    throw Error(ErrorCode::kInvalidArgument, "no network '" + name + "' in report");
  }
  return mean_std(it->second);
}

MeanStd ExperimentReport::committee_summary() const { return mean_std(committee_accuracy); }

void score_fold(const std::vector<ScoreTable>& tables, std::span<const int> labels,
                Normalization mode, std::size_t fold, ExperimentReport& report) {
  std::vector<ScoreTable> normalized;
  normalized.reserve(tables.size());
  for (const auto& t : tables) {
    report.network_accuracy[t.network_id].push_back(accuracy(t.predictions(), labels));
    normalized.push_back(normalize_table(t, mode));
    if (std::ranges::find(report.networks, t.network_id) == report.networks.end()) {
      report.networks.push_back(t.network_id);
    }
  }
  report.committee_accuracy.push_back(accuracy(committee_predict(normalized), labels));
  report.folds.push_back(fold);
}

ExperimentReport evaluate_protocol(const ExperimentConfig& exp,
                                   const std::vector<LabeledImage>& train,
                                   const std::vector<LabeledImage>& test, const FoldPlan& plan,
                                   const std::optional<std::filesystem::path>& out_dir,
                                   const ProgressFn& progress) {
  if (exp.networks.empty()) throw Error(ErrorCode::kConfig, "experiment has no networks");
  if (test.empty()) throw Error(ErrorCode::kInvalidArgument, "no test images");
  std::vector<std::size_t> folds = exp.folds;
  if (folds.empty()) {
    folds.resize(plan.folds.size());
    std::iota(folds.begin(), folds.end(), std::size_t{0});
  }
  std::vector<int> labels;
  labels.reserve(test.size());
  for (const auto& im : test) labels.push_back(im.label);

  constexpr std::size_t kBatch = 256;
  ExperimentReport report;
  for (const auto fold : folds) {
    if (fold >= plan.folds.size()) throw Error(ErrorCode::kIndex, "fold out of range");
    const auto fold_images = select_images(train, plan.folds[fold]);
    std::vector<ScoreTable> tables;
    for (const auto& base : exp.networks) {
      NetworkConfig cfg = base;
      cfg.seeds = base.seeds.for_fold(fold);
      report_progress(progress, "fold " + std::to_string(fold) + ": training " + cfg.name);
      const NetworkModel model = train_network(cfg, fold_images, progress);
      const DescriptorSet train_desc = extract_descriptors(model, training_images(cfg, fold_images));
      const SvmModel svm = train_classifier(train_desc, exp);

      report_progress(progress, "fold " + std::to_string(fold) + ": scoring " + cfg.name);
      ScoreTable table;
      table.network_id = cfg.name;
      for (std::size_t start = 0; start < test.size(); start += kBatch) {
        const std::vector<LabeledImage> batch(
            test.begin() + static_cast<std::ptrdiff_t>(start),
            test.begin() + static_cast<std::ptrdiff_t>(std::min(test.size(), start + kBatch)));
        const ScoreTable part =
            score_table(svm, extract_descriptors(model, prepare_images(cfg, batch)), cfg.name);
        table.image_ids.insert(table.image_ids.end(), part.image_ids.begin(), part.image_ids.end());
        table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
      }
      if (out_dir) {
        const auto dir = *out_dir / ("fold" + std::to_string(fold));
        std::filesystem::create_directories(dir);
        write_score_file(dir / (cfg.name + ".scores"), table);
      }
      tables.push_back(std::move(table));
    }
    score_fold(tables, labels, exp.normalization, fold, report);
    report_progress(progress, "fold " + std::to_string(fold) + ": committee accuracy " +
                                  format_double(report.committee_accuracy.back()));
  }
  return report;
}

ExperimentReport report_from_score_files(const ExperimentConfig& exp, std::span<const int> labels,
                                         const std::filesystem::path& out_dir) {
  ExperimentReport report;
  for (std::size_t fold = 0; fold < exp.fold_shape.num_folds; ++fold) {
    if (!exp.folds.empty() && std::ranges::find(exp.folds, fold) == exp.folds.end()) continue;
    const auto dir = out_dir / ("fold" + std::to_string(fold));
    if (!std::filesystem::is_directory(dir)) continue;
    std::vector<ScoreTable> tables;
    for (const auto& cfg : exp.networks) {
      tables.push_back(read_score_file(dir / (cfg.name + ".scores")));
    }
    score_fold(tables, labels, exp.normalization, fold, report);
  }
  if (report.folds.empty()) {
    throw Error(ErrorCode::kIo, "no fold directories with score files under " + out_dir.string());
  }
  return report;
}

std::string format_report(const ExperimentReport& report) {
  std::ostringstream out;
  out << "folds:";
  for (const auto f : report.folds) out << ' ' << f;
  out << '\n';
  auto line = [&](const std::string& label, const std::vector<double>& acc) {
    const MeanStd s = mean_std(acc);
    out << label << ": mean " << format_double(s.mean) << " std " << format_double(s.std)
        << " per-fold";
    for (const double a : acc) out << ' ' << format_double(a);
    out << '\n';
  };
  for (const auto& n : report.networks) line("network " + n, report.network_accuracy.at(n));
  std::string members;
  for (const auto& n : report.networks) members += (members.empty() ? "" : " ") + n;
  line("committee [" + members + "]", report.committee_accuracy);
  return out.str();
}

std::string format_report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "fold,network,accuracy\n";
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    for (const auto& n : report.networks) {
      out << report.folds[i] << ',' << n << ',' << format_double(report.network_accuracy.at(n)[i])
          << '\n';
    }
    out << report.folds[i] << ",committee," << format_double(report.committee_accuracy[i]) << '\n';
  }
  return out.str();
}

void write_report(const std::filesystem::path& out_dir, const ExperimentReport& report) {
  std::filesystem::create_directories(out_dir);
  std::ofstream txt(out_dir / "report.txt");
  std::ofstream csv(out_dir / "report.csv");
  if (!txt || !csv) throw Error(ErrorCode::kIo, "cannot write report into " + out_dir.string());
  txt << format_report(report);
  csv << format_report_csv(report);
}

}  // namespace cdfn
