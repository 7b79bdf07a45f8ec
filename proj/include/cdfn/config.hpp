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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdfn/augment.hpp"
#include "cdfn/committee.hpp"
#include "cdfn/layer.hpp"
#include "cdfn/stl10.hpp"
#include "cdfn/svm.hpp"

namespace cdfn {

/// Filter learning and stage parameters of one layer.
struct LayerSpec {
  std::size_t filters = 300;  // per group for layer 2
  std::size_t patch_side = 16;
  std::size_t pool_side = 12;
  std::size_t pool_stride = 12;
  double pool_alpha = 1.0;
  std::size_t lcn_window = 9;
  double lcn_sigma = 9.0 / 4.0;
  double zca_epsilon = 0.01;
  std::size_t n_patches = 400000;  // per group for layer 2
  std::size_t kmeans_iters = 100;
  bool dense_preprocess = true;
};

/// Layer-2 defaults shared by all presets: 3x3 filters over groups of 4,
/// 75 filters per group, 3x3 pooling with stride 3.
LayerSpec default_layer2();

struct NetworkSeeds {
  std::uint64_t patches = 0;
  std::uint64_t kmeans1 = 0;
  std::uint64_t kmeans2 = 0;
  std::uint64_t grouping = 0;

  static NetworkSeeds from_base(std::uint64_t base);
  /// Independent seeds for fold k of the evaluation protocol.
  NetworkSeeds for_fold(std::size_t fold) const;

  bool operator==(const NetworkSeeds&) const = default;
};

enum class DescriptorMode { kLayer2Only, kConcatLayers };

std::string_view to_string(DescriptorMode m);
DescriptorMode parse_descriptor_mode(std::string_view s);

/// Complete hyperparameter record of one committee member.
struct NetworkConfig {
  std::string name = "network";
  std::optional<double> scale_factor;
  Rectifier rectifier = Rectifier::kAbs;
  LayerSpec layer1;
  LayerSpec layer2 = default_layer2();
  std::size_t group_size = 4;
  AugmentPlan augment;
  NetworkSeeds seeds = NetworkSeeds::from_base(0);
  DescriptorMode descriptor_mode = DescriptorMode::kLayer2Only;

  LayerConfig layer_config(int layer) const;
  void validate() const;
};

/// Base networks of the STL-10 experiments (no augmentation): N1..N5.
NetworkConfig preset_network(std::string_view name);

struct ExperimentConfig {
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  std::filesystem::path fold_plan;
  FoldPlanShape fold_shape;
  std::vector<std::size_t> folds;  // empty: every fold
  std::vector<NetworkConfig> networks;
  SvmOptions svm;
  bool cross_validate_c = false;
  Normalization normalization = Normalization::kPerImage;

  const NetworkConfig& network(std::string_view name) const;
};

/// Reads an INI experiment file. Relative paths resolve against the file's
/// directory. See configs/ for the recognised keys.
ExperimentConfig load_experiment(const std::filesystem::path& path);
ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir);

/// INI text of one network, every field explicit. parse(format(x)) == x.
std::string format_network_ini(const NetworkConfig& cfg);
NetworkConfig parse_network_ini(std::string_view text);

bool operator==(const LayerSpec& a, const LayerSpec& b);
bool operator==(const NetworkConfig& a, const NetworkConfig& b);

}  // namespace cdfn
