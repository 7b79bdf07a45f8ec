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

// cdfn-cli: command-line front end over the C API.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cdfn/cdfn.h"

namespace {

struct CallFailed : std::runtime_error {
  cdfn_status status;
  CallFailed(cdfn_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(cdfn_status s, const char* what) {
  if (s != CDFN_OK) {
    throw CallFailed(s, std::string(what) + ": " + cdfn_status_name(s) + ": " + cdfn_last_error());
  }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<cdfn_dataset, Deleter<cdfn_dataset, cdfn_dataset_free>>;
using FoldPlan = std::unique_ptr<cdfn_fold_plan, Deleter<cdfn_fold_plan, cdfn_fold_plan_free>>;
using Experiment = std::unique_ptr<cdfn_experiment, Deleter<cdfn_experiment, cdfn_experiment_free>>;
using Network = std::unique_ptr<cdfn_network, Deleter<cdfn_network, cdfn_network_free>>;
using Descriptors =
    std::unique_ptr<cdfn_descriptors, Deleter<cdfn_descriptors, cdfn_descriptors_free>>;
using Svm = std::unique_ptr<cdfn_svm, Deleter<cdfn_svm, cdfn_svm_free>>;
using Scores = std::unique_ptr<cdfn_scores, Deleter<cdfn_scores, cdfn_scores_free>>;
using Report = std::unique_ptr<cdfn_report, Deleter<cdfn_report, cdfn_report_free>>;

void print_progress(const char* line, void*) { std::cerr << line << '\n'; }

Experiment load_experiment(const std::string& path, std::optional<std::uint64_t> seed) {
  cdfn_experiment* raw = nullptr;
  check(cdfn_experiment_load(path.c_str(), &raw), "loading config");
  Experiment exp(raw);
  if (seed) check(cdfn_experiment_set_seed(exp.get(), *seed), "setting seed");
  return exp;
}

struct ExperimentData {
  Dataset train;
  Dataset test;
  FoldPlan plan;
};

ExperimentData load_data(const cdfn_experiment* exp) {
  cdfn_dataset* train = nullptr;
  cdfn_dataset* test = nullptr;
  cdfn_fold_plan* plan = nullptr;
  check(cdfn_experiment_load_data(exp, &train, &test, &plan), "loading data");
  return {Dataset(train), Dataset(test), FoldPlan(plan)};
}

Dataset load_images(const std::string& images, const std::string& labels) {
  cdfn_dataset* raw = nullptr;
  check(cdfn_dataset_load_stl10(images.c_str(), labels.c_str(), &raw), "loading images");
  return Dataset(raw);
}

Dataset fold_images(const ExperimentData& data, std::int64_t fold) {
  if (fold < 0) {
    size_t n = 0;
    check(cdfn_dataset_size(data.train.get(), &n), "dataset size");
    std::vector<size_t> all(n);
    for (size_t i = 0; i < n; ++i) all[i] = i;
    cdfn_dataset* raw = nullptr;
    check(cdfn_dataset_select(data.train.get(), all.data(), all.size(), &raw), "selecting");
    return Dataset(raw);
  }
  const size_t* idx = nullptr;
  size_t count = 0;
  check(cdfn_fold_plan_fold(data.plan.get(), static_cast<size_t>(fold), &idx, &count), "fold");
  cdfn_dataset* raw = nullptr;
  check(cdfn_dataset_select(data.train.get(), idx, count, &raw), "selecting fold");
  return Dataset(raw);
}

Descriptors load_descriptors(const std::string& path) {
  cdfn_descriptors* raw = nullptr;
  check(cdfn_descriptors_load(path.c_str(), &raw), "loading descriptors");
  return Descriptors(raw);
}

cdfn_normalization parse_normalization(const std::string& s) {
  if (s == "per_image") return CDFN_NORMALIZE_PER_IMAGE;
  if (s == "per_network") return CDFN_NORMALIZE_PER_NETWORK;
  throw std::invalid_argument("unknown normalization: " + s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cdfn: unsupervised feature networks, linear classifiers and committees"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cdfn_version()));

  // train
  auto* train = app.add_subcommand("train", "Learn the filters of one network");
  std::string train_config, train_network, train_out;
  std::int64_t train_fold = -1;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--config", train_config, "Experiment config (.ini)")->required();
  train->add_option("--network", train_network, "Network section name")->required();
  train->add_option("--fold", train_fold, "Train on this fold of the fold plan (default: all)");
  train->add_option("--seed", train_seed, "Base seed overriding the configured seeds");
  train->add_option("--out", train_out, "Output model file")->required();

  // extract
  auto* extract = app.add_subcommand("extract", "Compute descriptors with a trained network");
  std::string ex_model, ex_images, ex_labels, ex_out, ex_config;
  std::int64_t ex_fold = -1;
  bool ex_augment = false, ex_test = false;
  extract->add_option("--model", ex_model, "Trained network")->required();
  extract->add_option("--images", ex_images, "STL-10 image file");
  extract->add_option("--labels", ex_labels, "STL-10 label file");
  extract->add_option("--config", ex_config, "Take images from this experiment instead");
  extract->add_option("--fold", ex_fold, "With --config: use this training fold");
  extract->add_flag("--test", ex_test, "With --config: use the test set");
  extract->add_flag("--augment", ex_augment, "Expand with the network's augmentation plan");
  extract->add_option("--out", ex_out, "Output descriptor file")->required();

  // svm
  auto* svm = app.add_subcommand("svm", "Train a one-vs-all linear SVM");
  std::string svm_desc, svm_out;
  double svm_c = 0.0;
  svm->add_option("--descriptors", svm_desc, "Training descriptors")->required();
  svm->add_option("--reg-c", svm_c, "Regularization C (default: cross-validated)");
  svm->add_option("--out", svm_out, "Output classifier file")->required();

  // score
  auto* score = app.add_subcommand("score", "Score descriptors with a classifier");
  std::string sc_svm, sc_desc, sc_id, sc_out;
  score->add_option("--svm", sc_svm, "Classifier")->required();
  score->add_option("--descriptors", sc_desc, "Descriptors to score")->required();
  score->add_option("--network-id", sc_id, "Network id written to the score file")->required();
  score->add_option("--out", sc_out, "Output score file")->required();

  // committee
  auto* committee = app.add_subcommand("committee", "Fuse score files and predict");
  std::vector<std::string> cm_scores;
  std::string cm_norm = "per_image", cm_out, cm_images, cm_labels;
  committee->add_option("--scores", cm_scores, "Score files of the members")->required();
  committee->add_option("--normalization", cm_norm, "per_image or per_network");
  committee->add_option("--images", cm_images, "STL-10 images matching the score rows");
  committee->add_option("--labels", cm_labels, "STL-10 labels; prints accuracy");
  committee->add_option("--out", cm_out, "Write the summed score table here");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run the fold protocol");
  std::string ev_config, ev_out;
  std::int64_t ev_fold = -1;
  std::optional<std::uint64_t> ev_seed;
  evaluate->add_option("--config", ev_config, "Experiment config (.ini)")->required();
  evaluate->add_option("--fold", ev_fold, "Run a single fold");
  evaluate->add_option("--seed", ev_seed, "Base seed overriding the configured seeds");
  evaluate->add_option("--out", ev_out, "Output directory for scores and reports");

  // report
  auto* report = app.add_subcommand("report", "Recompute a report from saved score files");
  std::string rp_config, rp_out;
  report->add_option("--config", rp_config, "Experiment config (.ini)")->required();
  report->add_option("--out", rp_out, "Directory written by evaluate")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto exp = load_experiment(train_config, train_seed);
      auto data = load_data(exp.get());
      auto images = fold_images(data, train_fold);
      cdfn_network* raw = nullptr;
      check(cdfn_network_train(exp.get(), train_network.c_str(), images.get(), train_fold,
                               print_progress, nullptr, &raw),
            "training");
      Network net(raw);
      check(cdfn_network_save(net.get(), train_out.c_str()), "saving model");
    } else if (*extract) {
      cdfn_network* raw = nullptr;
      check(cdfn_network_load(ex_model.c_str(), &raw), "loading model");
      Network net(raw);
      Dataset images;
      if (!ex_config.empty()) {
        auto exp = load_experiment(ex_config, std::nullopt);
        auto data = load_data(exp.get());
        images = ex_test ? std::move(data.test) : fold_images(data, ex_fold);
      } else if (!ex_images.empty() && !ex_labels.empty()) {
        images = load_images(ex_images, ex_labels);
      } else {
        throw std::invalid_argument("extract needs --config or --images and --labels");
      }
      cdfn_descriptors* d = nullptr;
      check(cdfn_network_extract(net.get(), images.get(), ex_augment ? 1 : 0, &d), "extracting");
      Descriptors desc(d);
      check(cdfn_descriptors_save(desc.get(), ex_out.c_str()), "saving descriptors");
    } else if (*svm) {
      auto desc = load_descriptors(svm_desc);
      cdfn_svm* raw = nullptr;
      check(cdfn_svm_train(desc.get(), svm_c, &raw), "training classifier");
      Svm model(raw);
      check(cdfn_svm_save(model.get(), svm_out.c_str()), "saving classifier");
    } else if (*score) {
      cdfn_svm* raw = nullptr;
      check(cdfn_svm_load(sc_svm.c_str(), &raw), "loading classifier");
      Svm model(raw);
      auto desc = load_descriptors(sc_desc);
      cdfn_scores* s = nullptr;
      check(cdfn_svm_score(model.get(), desc.get(), sc_id.c_str(), &s), "scoring");
      Scores table(s);
      check(cdfn_scores_save(table.get(), sc_out.c_str()), "saving scores");
    } else if (*committee) {
      std::vector<Scores> tables;
      std::vector<const cdfn_scores*> ptrs;
      for (const auto& path : cm_scores) {
        cdfn_scores* s = nullptr;
        check(cdfn_scores_load(path.c_str(), &s), "loading scores");
        tables.emplace_back(s);
        ptrs.push_back(s);
      }
      size_t images = 0, classes = 0;
      check(cdfn_scores_shape(ptrs[0], &images, &classes), "score shape");
      std::vector<int32_t> predicted(images);
      cdfn_scores* summed = nullptr;
      check(cdfn_committee_predict(ptrs.data(), ptrs.size(), parse_normalization(cm_norm),
                                   predicted.data(), predicted.size(), &summed),
            "committee");
      Scores sum(summed);
      if (!cm_out.empty()) check(cdfn_scores_save(sum.get(), cm_out.c_str()), "saving scores");
      if (!cm_labels.empty()) {
        if (cm_images.empty()) throw std::invalid_argument("--labels needs --images");
        auto truth = load_images(cm_images, cm_labels);
        size_t n = 0;
        check(cdfn_dataset_size(truth.get(), &n), "dataset size");
        if (n != images) throw std::invalid_argument("label count != score rows");
        size_t correct = 0;
        for (size_t i = 0; i < n; ++i) {
          int64_t id = 0;
          std::vector<double> row(classes);
          check(cdfn_scores_row(sum.get(), i, &id, row.data(), row.size()), "score row");
          int32_t label = 0;
          check(cdfn_dataset_label(truth.get(), static_cast<size_t>(id), &label), "label");
          if (label == predicted[i]) ++correct;
        }
        std::cout << "accuracy " << static_cast<double>(correct) / static_cast<double>(n) << '\n';
      } else {
        for (auto p : predicted) std::cout << p << '\n';
      }
    } else if (*evaluate) {
      auto exp = load_experiment(ev_config, ev_seed);
      auto data = load_data(exp.get());
      cdfn_report* raw = nullptr;
      check(cdfn_evaluate(exp.get(), data.train.get(), data.test.get(), data.plan.get(), ev_fold,
                          ev_out.empty() ? nullptr : ev_out.c_str(), print_progress, nullptr,
                          &raw),
            "evaluating");
      Report rep(raw);
      const char* text = nullptr;
      check(cdfn_report_text(rep.get(), &text), "report");
      std::cout << text;
    } else if (*report) {
      auto exp = load_experiment(rp_config, std::nullopt);
      auto data = load_data(exp.get());
      cdfn_report* raw = nullptr;
      check(cdfn_report_from_scores(exp.get(), data.test.get(), rp_out.c_str(), &raw), "report");
      Report rep(raw);
      const char* text = nullptr;
      check(cdfn_report_text(rep.get(), &text), "report");
      std::cout << text;
    }
  } catch (const CallFailed& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.status) == 100 ? 100 : static_cast<int>(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
