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

#include "cdfn/cdfn.h"

#include <exception>
#include <memory>
#include <new>
#include <string>
#include <utility>

#include "cdfn/pipeline.hpp"

struct cdfn_dataset {
  std::vector<cdfn::LabeledImage> images;
};
struct cdfn_fold_plan {
  cdfn::FoldPlan plan;
};
struct cdfn_experiment {
  cdfn::ExperimentConfig config;
};
struct cdfn_network {
  cdfn::NetworkModel model;
};
struct cdfn_descriptors {
  cdfn::DescriptorSet set;
};
struct cdfn_svm {
  cdfn::SvmModel model;
};
struct cdfn_scores {
  cdfn::ScoreTable table;
};
struct cdfn_report {
  cdfn::ExperimentReport report;
  std::string text;
  std::string csv;
};

namespace {

thread_local std::string g_last_error;

cdfn_status fail(cdfn_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs body, translating exceptions into status codes.
template <typename Body>
cdfn_status guarded(Body&& body) {
  try {
    body();
    return CDFN_OK;
  } catch (const cdfn::Error& e) {
    return fail(static_cast<cdfn_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CDFN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CDFN_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CDFN_ERR_INTERNAL, "unknown exception");
  }
}

#define CDFN_REQUIRE(cond)                                                  \
  do {                                                                      \
    if (!(cond)) return fail(CDFN_ERR_INVALID_ARGUMENT, "null or invalid argument: " #cond); \
  } while (0)

cdfn::ProgressFn make_progress(cdfn_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](const std::string& line) { fn(line.c_str(), user); };
}

cdfn_report* make_report(cdfn::ExperimentReport report) {
  auto r = std::make_unique<cdfn_report>();
  r->text = cdfn::format_report(report);
  r->csv = cdfn::format_report_csv(report);
  r->report = std::move(report);
  return r.release();
}

}  // namespace

extern "C" {

const char* cdfn_version(void) { return "1.0.0"; }

const char* cdfn_last_error(void) { return g_last_error.c_str(); }

const char* cdfn_status_name(cdfn_status status) {
  if (status == CDFN_OK) return "Ok";
  if (status == CDFN_ERR_INTERNAL) return "InternalError";
  return cdfn::error_code_name(static_cast<cdfn::ErrorCode>(status));
}

cdfn_status cdfn_dataset_load_stl10(const char* images_path, const char* labels_path,
                                    cdfn_dataset** out) {
  CDFN_REQUIRE(images_path && labels_path && out);
  return guarded([&] {
    *out = new cdfn_dataset{cdfn::load_stl10(images_path, labels_path)};
  });
}

cdfn_status cdfn_dataset_from_pixels(const double* pixels, const int32_t* labels, size_t count,
                                     size_t height, size_t width, cdfn_dataset** out) {
  CDFN_REQUIRE(out && height > 0 && width > 0);
  CDFN_REQUIRE(count == 0 || (pixels && labels));
  return guarded([&] {
    auto set = std::make_unique<cdfn_dataset>();
    for (size_t i = 0; i < count; ++i) {
      if (labels[i] < 0) throw cdfn::Error(cdfn::ErrorCode::kInvalidArgument, "negative label");
      cdfn::LabeledImage im;
      im.height = height;
      im.width = width;
      im.label = labels[i];
      im.id = static_cast<std::int64_t>(i);
      im.pixels.assign(pixels + i * height * width, pixels + (i + 1) * height * width);
      set->images.push_back(std::move(im));
    }
    *out = set.release();
  });
}

cdfn_status cdfn_dataset_select(const cdfn_dataset* set, const size_t* indices, size_t count,
                                cdfn_dataset** out) {
  CDFN_REQUIRE(set && out && (count == 0 || indices));
  return guarded([&] {
    *out = new cdfn_dataset{
        cdfn::select_images(set->images, std::vector<std::size_t>(indices, indices + count))};
  });
}

cdfn_status cdfn_dataset_size(const cdfn_dataset* set, size_t* count) {
  CDFN_REQUIRE(set && count);
  *count = set->images.size();
  return CDFN_OK;
}

cdfn_status cdfn_dataset_label(const cdfn_dataset* set, size_t index, int32_t* label) {
  CDFN_REQUIRE(set && label);
  if (index >= set->images.size()) return fail(CDFN_ERR_INDEX, "image index out of range");
  *label = set->images[index].label;
  return CDFN_OK;
}

void cdfn_dataset_free(cdfn_dataset* set) { delete set; }

cdfn_status cdfn_fold_plan_load(const char* path, size_t num_folds, size_t fold_size,
                                size_t num_images, cdfn_fold_plan** out) {
  CDFN_REQUIRE(path && out);
  return guarded([&] {
    cdfn::FoldPlanShape shape;
    if (num_folds) shape.num_folds = num_folds;
    if (fold_size) shape.fold_size = fold_size;
    if (num_images) shape.num_images = num_images;
    *out = new cdfn_fold_plan{cdfn::load_fold_plan(path, shape)};
  });
}

cdfn_status cdfn_fold_plan_fold(const cdfn_fold_plan* plan, size_t fold, const size_t** indices,
                                size_t* count) {
  CDFN_REQUIRE(plan && indices && count);
  if (fold >= plan->plan.folds.size()) return fail(CDFN_ERR_INDEX, "fold out of range");
  *indices = plan->plan.folds[fold].data();
  *count = plan->plan.folds[fold].size();
  return CDFN_OK;
}

void cdfn_fold_plan_free(cdfn_fold_plan* plan) { delete plan; }

cdfn_status cdfn_experiment_load(const char* path, cdfn_experiment** out) {
  CDFN_REQUIRE(path && out);
  return guarded([&] { *out = new cdfn_experiment{cdfn::load_experiment(path)}; });
}

cdfn_status cdfn_experiment_parse(const char* text, const char* base_dir, cdfn_experiment** out) {
  CDFN_REQUIRE(text && out);
  return guarded([&] {
    *out = new cdfn_experiment{cdfn::parse_experiment(text, base_dir ? base_dir : ".")};
  });
}

cdfn_status cdfn_experiment_network_count(const cdfn_experiment* exp, size_t* count) {
  CDFN_REQUIRE(exp && count);
  *count = exp->config.networks.size();
  return CDFN_OK;
}

cdfn_status cdfn_experiment_network_name(const cdfn_experiment* exp, size_t index,
                                         const char** name) {
  CDFN_REQUIRE(exp && name);
  if (index >= exp->config.networks.size()) return fail(CDFN_ERR_INDEX, "network index out of range");
  *name = exp->config.networks[index].name.c_str();
  return CDFN_OK;
}

cdfn_status cdfn_experiment_set_seed(cdfn_experiment* exp, uint64_t base_seed) {
  CDFN_REQUIRE(exp);
  for (std::size_t i = 0; i < exp->config.networks.size(); ++i) {
    exp->config.networks[i].seeds =
        cdfn::NetworkSeeds::from_base(cdfn::SeededRng::derive(base_seed, i));
  }
  return CDFN_OK;
}

cdfn_status cdfn_experiment_load_data(const cdfn_experiment* exp, cdfn_dataset** train,
                                      cdfn_dataset** test, cdfn_fold_plan** plan) {
  CDFN_REQUIRE(exp && train && test && plan);
  return guarded([&] {
    const auto& c = exp->config;
    auto tr = std::make_unique<cdfn_dataset>(cdfn_dataset{cdfn::load_stl10(c.train_images, c.train_labels)});
    auto te = std::make_unique<cdfn_dataset>(cdfn_dataset{cdfn::load_stl10(c.test_images, c.test_labels)});
    auto fp = std::make_unique<cdfn_fold_plan>(cdfn_fold_plan{cdfn::load_fold_plan(c.fold_plan, c.fold_shape)});
    *train = tr.release();
    *test = te.release();
    *plan = fp.release();
  });
}

void cdfn_experiment_free(cdfn_experiment* exp) { delete exp; }

cdfn_status cdfn_network_train(const cdfn_experiment* exp, const char* network_name,
                               const cdfn_dataset* images, int64_t fold,
                               cdfn_progress_fn progress, void* user, cdfn_network** out) {
  CDFN_REQUIRE(exp && network_name && images && out);
  return guarded([&] {
    cdfn::NetworkConfig cfg = exp->config.network(network_name);
    if (fold >= 0) cfg.seeds = cfg.seeds.for_fold(static_cast<std::size_t>(fold));
    *out = new cdfn_network{cdfn::train_network(cfg, images->images, make_progress(progress, user))};
  });
}

cdfn_status cdfn_network_save(const cdfn_network* net, const char* path) {
  CDFN_REQUIRE(net && path);
  return guarded([&] { cdfn::save_model(path, net->model); });
}

cdfn_status cdfn_network_load(const char* path, cdfn_network** out) {
  CDFN_REQUIRE(path && out);
  return guarded([&] { *out = new cdfn_network{cdfn::load_model(path)}; });
}

cdfn_status cdfn_network_name(const cdfn_network* net, const char** name) {
  CDFN_REQUIRE(net && name);
  *name = net->model.config.name.c_str();
  return CDFN_OK;
}

cdfn_status cdfn_network_descriptor_dim(const cdfn_network* net, size_t* dim) {
  CDFN_REQUIRE(net && dim);
  return guarded([&] {
    const auto& m = net->model;
    // input_height/width are already rescaled.
    cdfn::NetworkConfig unscaled = m.config;
    unscaled.scale_factor.reset();
    *dim = cdfn::network_shapes(unscaled, m.input_height, m.input_width).descriptor_dim;
  });
}

cdfn_status cdfn_network_extract(const cdfn_network* net, const cdfn_dataset* images, int augment,
                                 cdfn_descriptors** out) {
  CDFN_REQUIRE(net && images && out);
  return guarded([&] {
    const auto& cfg = net->model.config;
    const auto prepared = augment ? cdfn::training_images(cfg, images->images)
                                  : cdfn::prepare_images(cfg, images->images);
    *out = new cdfn_descriptors{cdfn::extract_descriptors(net->model, prepared)};
  });
}

void cdfn_network_free(cdfn_network* net) { delete net; }

cdfn_status cdfn_descriptors_save(const cdfn_descriptors* d, const char* path) {
  CDFN_REQUIRE(d && path);
  return guarded([&] { cdfn::save_descriptors(path, d->set); });
}

cdfn_status cdfn_descriptors_load(const char* path, cdfn_descriptors** out) {
  CDFN_REQUIRE(path && out);
  return guarded([&] { *out = new cdfn_descriptors{cdfn::load_descriptors(path)}; });
}

cdfn_status cdfn_descriptors_shape(const cdfn_descriptors* d, size_t* count, size_t* dim) {
  CDFN_REQUIRE(d && count && dim);
  *count = d->set.count();
  *dim = d->set.dim();
  return CDFN_OK;
}

cdfn_status cdfn_descriptors_get(const cdfn_descriptors* d, size_t index, double* out,
                                 size_t out_len) {
  CDFN_REQUIRE(d && out);
  if (index >= d->set.count()) return fail(CDFN_ERR_INDEX, "descriptor index out of range");
  if (out_len != d->set.dim()) return fail(CDFN_ERR_DIM, "output buffer length != descriptor dim");
  const auto col = d->set.data.col(static_cast<Eigen::Index>(index));
  std::copy(col.data(), col.data() + col.size(), out);
  return CDFN_OK;
}

void cdfn_descriptors_free(cdfn_descriptors* d) { delete d; }

cdfn_status cdfn_svm_train(const cdfn_descriptors* train, double reg_c, cdfn_svm** out) {
  CDFN_REQUIRE(train && out);
  return guarded([&] {
    cdfn::SvmOptions options;
    options.reg_c = reg_c > 0.0 ? reg_c
                                : cdfn::select_reg_c(train->set, options, cdfn::kDefaultRegGrid);
    *out = new cdfn_svm{cdfn::train_ova_svm(train->set, options)};
  });
}

cdfn_status cdfn_svm_save(const cdfn_svm* svm, const char* path) {
  CDFN_REQUIRE(svm && path);
  return guarded([&] { cdfn::save_svm(path, svm->model); });
}

cdfn_status cdfn_svm_load(const char* path, cdfn_svm** out) {
  CDFN_REQUIRE(path && out);
  return guarded([&] { *out = new cdfn_svm{cdfn::load_svm(path)}; });
}

cdfn_status cdfn_svm_score(const cdfn_svm* svm, const cdfn_descriptors* d, const char* network_id,
                           cdfn_scores** out) {
  CDFN_REQUIRE(svm && d && network_id && out);
  return guarded([&] { *out = new cdfn_scores{cdfn::score_table(svm->model, d->set, network_id)}; });
}

void cdfn_svm_free(cdfn_svm* svm) { delete svm; }

cdfn_status cdfn_scores_save(const cdfn_scores* s, const char* path) {
  CDFN_REQUIRE(s && path);
  return guarded([&] { cdfn::write_score_file(path, s->table); });
}

cdfn_status cdfn_scores_load(const char* path, cdfn_scores** out) {
  CDFN_REQUIRE(path && out);
  return guarded([&] { *out = new cdfn_scores{cdfn::read_score_file(path)}; });
}

cdfn_status cdfn_scores_shape(const cdfn_scores* s, size_t* images, size_t* classes) {
  CDFN_REQUIRE(s && images && classes);
  *images = s->table.rows.size();
  *classes = s->table.num_classes();
  return CDFN_OK;
}

cdfn_status cdfn_scores_row(const cdfn_scores* s, size_t index, int64_t* image_id, double* out,
                            size_t out_len) {
  CDFN_REQUIRE(s && image_id && out);
  if (index >= s->table.rows.size()) return fail(CDFN_ERR_INDEX, "score row out of range");
  const auto& row = s->table.rows[index].scores;
  if (out_len != row.size()) return fail(CDFN_ERR_DIM, "output buffer length != class count");
  *image_id = s->table.image_ids[index];
  std::copy(row.begin(), row.end(), out);
  return CDFN_OK;
}

void cdfn_scores_free(cdfn_scores* s) { delete s; }

cdfn_status cdfn_committee_predict(const cdfn_scores* const* tables, size_t count,
                                   cdfn_normalization mode, int32_t* labels, size_t labels_len,
                                   cdfn_scores** summed) {
  CDFN_REQUIRE(tables && count > 0 && labels);
  CDFN_REQUIRE(mode == CDFN_NORMALIZE_PER_IMAGE || mode == CDFN_NORMALIZE_PER_NETWORK);
  for (size_t i = 0; i < count; ++i) CDFN_REQUIRE(tables[i]);
  return guarded([&] {
    const auto norm = mode == CDFN_NORMALIZE_PER_IMAGE ? cdfn::Normalization::kPerImage
                                                       : cdfn::Normalization::kPerNetwork;
    std::vector<cdfn::ScoreTable> normalized;
    for (size_t i = 0; i < count; ++i) normalized.push_back(cdfn::normalize_table(tables[i]->table, norm));
    cdfn::ScoreTable sum = cdfn::sum_scores(normalized);
    if (labels_len != sum.rows.size()) {
      throw cdfn::Error(cdfn::ErrorCode::kDim, "label buffer length != image count");
    }
    const auto preds = sum.predictions();
    std::copy(preds.begin(), preds.end(), labels);
    if (summed) *summed = new cdfn_scores{std::move(sum)};
  });
}

cdfn_status cdfn_evaluate(const cdfn_experiment* exp, const cdfn_dataset* train,
                          const cdfn_dataset* test, const cdfn_fold_plan* plan, int64_t fold,
                          const char* out_dir, cdfn_progress_fn progress, void* user,
                          cdfn_report** out) {
  CDFN_REQUIRE(exp && train && test && plan && out);
  return guarded([&] {
    cdfn::ExperimentConfig config = exp->config;
    if (fold >= 0) config.folds = {static_cast<std::size_t>(fold)};
    std::optional<std::filesystem::path> dir;
    if (out_dir) dir = std::filesystem::path(out_dir);
    auto report = cdfn::evaluate_protocol(config, train->images, test->images, plan->plan, dir,
                                          make_progress(progress, user));
    if (dir) cdfn::write_report(*dir, report);
    *out = make_report(std::move(report));
  });
}

cdfn_status cdfn_report_from_scores(const cdfn_experiment* exp, const cdfn_dataset* test,
                                    const char* out_dir, cdfn_report** out) {
  CDFN_REQUIRE(exp && test && out_dir && out);
  return guarded([&] {
    std::vector<int> labels;
    for (const auto& im : test->images) labels.push_back(im.label);
    *out = make_report(cdfn::report_from_score_files(exp->config, labels, out_dir));
  });
}

cdfn_status cdfn_report_committee(const cdfn_report* r, double* mean, double* std_dev) {
  CDFN_REQUIRE(r && mean && std_dev);
  const auto s = r->report.committee_summary();
  *mean = s.mean;
  *std_dev = s.std;
  return CDFN_OK;
}

cdfn_status cdfn_report_network(const cdfn_report* r, const char* name, double* mean,
                                double* std_dev) {
  CDFN_REQUIRE(r && name && mean && std_dev);
  return guarded([&] {
    const auto s = r->report.network_summary(name);
    *mean = s.mean;
    *std_dev = s.std;
  });
}

cdfn_status cdfn_report_text(const cdfn_report* r, const char** text) {
  CDFN_REQUIRE(r && text);
  *text = r->text.c_str();
  return CDFN_OK;
}

cdfn_status cdfn_report_csv(const cdfn_report* r, const char** csv) {
  CDFN_REQUIRE(r && csv);
  *csv = r->csv.c_str();
  return CDFN_OK;
}

void cdfn_report_free(cdfn_report* r) { delete r; }

}  // extern "C"
