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

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdfn/committee.hpp"
#include "cdfn/config.hpp"
#include "cdfn/container.hpp"
#include "cdfn/kmeans.hpp"
#include "cdfn/layer.hpp"
#include "cdfn/svm.hpp"

namespace cdfn {

/// A trained two-layer feature extractor.
struct NetworkModel {
  NetworkConfig config;
  std::size_t input_height = 0;  // after the configured rescaling
  std::size_t input_width = 0;
  FilterBank layer1;
  GroupAssignment groups;
  std::vector<FilterBank> layer2;  // one bank per group
};

/// Optional progress sink; receives one line per stage.
using ProgressFn = std::function<void(const std::string&)>;

/// Applies the network's resolution change (if any).
std::vector<LabeledImage> prepare_images(const NetworkConfig& cfg,
                                         const std::vector<LabeledImage>& images);

/// prepare_images followed by the configured augmentation.
std::vector<LabeledImage> training_images(const NetworkConfig& cfg,
                                          const std::vector<LabeledImage>& images);

/// Learns whitening + k-means filters from patches of the given sets.
FilterBank learn_filter_bank(std::span<const FeatureMapSet> sets, const LayerSpec& spec,
                             int layer_index, std::uint64_t patch_seed, std::uint64_t kmeans_seed);

/// Trains both layers on fold_images (augmented per cfg.augment).
NetworkModel train_network(const NetworkConfig& cfg, const std::vector<LabeledImage>& fold_images,
                           const ProgressFn& progress = {});

struct NetworkOutputs {
  FeatureMapSet layer1;
  FeatureMapSet layer2;  // group outputs stacked in group order
};

/// Runs both layers on one image that already has the model's resolution.
NetworkOutputs run_network(const NetworkModel& model, const LabeledImage& image);

std::vector<double> descriptor_of(const NetworkModel& model, const LabeledImage& image);

/// One descriptor per image; images are used as given (no scaling or
/// augmentation is applied here).
DescriptorSet extract_descriptors(const NetworkModel& model,
                                  const std::vector<LabeledImage>& images);

/// Shapes run_network would produce for an input of the given size.
struct NetworkShapes {
  MapShape input;
  MapShape layer1_conv;
  MapShape layer1_pooled;
  MapShape layer2_conv;    // per group
  MapShape layer2_pooled;  // per group
  std::size_t groups = 0;
  std::size_t descriptor_dim = 0;
};
NetworkShapes network_shapes(const NetworkConfig& cfg, std::size_t height, std::size_t width);

Container model_to_container(const NetworkModel& model);
NetworkModel model_from_container(const Container& c);
void save_model(const std::filesystem::path& path, const NetworkModel& model);
NetworkModel load_model(const std::filesystem::path& path);

Container svm_to_container(const SvmModel& model);
SvmModel svm_from_container(const Container& c);
void save_svm(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_svm(const std::filesystem::path& path);

Container descriptors_to_container(const DescriptorSet& set);
DescriptorSet descriptors_from_container(const Container& c);
void save_descriptors(const std::filesystem::path& path, const DescriptorSet& set);
DescriptorSet load_descriptors(const std::filesystem::path& path);

/// Raw (unnormalized) scores of every descriptor.
ScoreTable score_table(const SvmModel& model, const DescriptorSet& set, std::string network_id);

/// Trains the SVM on descriptors of the augmented fold, honoring the
/// experiment's reg_c selection.
SvmModel train_classifier(const DescriptorSet& train, const ExperimentConfig& exp);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

struct ExperimentReport {
  std::vector<std::size_t> folds;
  std::vector<std::string> networks;  // committee members, in order
  std::map<std::string, std::vector<double>> network_accuracy;  // per fold
  std::vector<double> committee_accuracy;                       // per fold

  MeanStd network_summary(const std::string& name) const;
  MeanStd committee_summary() const;
};

/// Runs the fold protocol: per fold, train every network and its SVM on the
/// fold's (augmented) images, score all test images, then fuse. When
/// out_dir is set, score files are written to out_dir/fold<k>/<net>.scores.
ExperimentReport evaluate_protocol(const ExperimentConfig& exp,
                                   const std::vector<LabeledImage>& train,
                                   const std::vector<LabeledImage>& test, const FoldPlan& plan,
                                   const std::optional<std::filesystem::path>& out_dir = {},
                                   const ProgressFn& progress = {});

/// Accuracy of each member and of the committee for one fold's tables.
void score_fold(const std::vector<ScoreTable>& tables, std::span<const int> labels,
                Normalization mode, std::size_t fold, ExperimentReport& report);

/// Rebuilds a report from the score files evaluate_protocol wrote under
/// out_dir. Folds without a fold<k> directory are skipped.
ExperimentReport report_from_score_files(const ExperimentConfig& exp, std::span<const int> labels,
                                         const std::filesystem::path& out_dir);

/// report.txt (human-readable summary) and report.csv (fold,network,accuracy).
void write_report(const std::filesystem::path& out_dir, const ExperimentReport& report);
std::string format_report(const ExperimentReport& report);
std::string format_report_csv(const ExperimentReport& report);

}  // namespace cdfn
