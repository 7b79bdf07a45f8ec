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

#include "cdfn/patch.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace cdfn {
namespace {

void copy_window(const FeatureMapSet& set, std::size_t p, std::size_t row, std::size_t col,
                 double* dst) {
  for (std::size_t d = 0; d < set.depth(); ++d) {
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) *dst++ = set(d, row + r, col + c);
    }
  }
}

}  // namespace

PatchMatrix extract_patches(std::span<const FeatureMapSet> sets, std::size_t p,
                            std::size_t n_patches, SeededRng& rng) {
  if (sets.empty()) throw Error(ErrorCode::kInvalidArgument, "no feature maps to sample from");
  if (n_patches == 0) throw Error(ErrorCode::kInvalidArgument, "n_patches must be >= 1");
  if (p == 0) throw Error(ErrorCode::kInvalidPatchSize, "patch side must be >= 1");
  const std::size_t depth = sets[0].depth();
  for (const auto& s : sets) {
    if (p > s.height() || p > s.width()) {
      throw Error(ErrorCode::kInvalidPatchSize, "patch side " + std::to_string(p) +
                                                    " exceeds map " + std::to_string(s.height()) +
                                                    "x" + std::to_string(s.width()));
    }
    if (s.depth() != depth) throw Error(ErrorCode::kDim, "inconsistent depth across sets");
  }
  PatchMatrix out;
  out.patch_side = p;
  out.depth = depth;
  out.data.resize(static_cast<Eigen::Index>(out.dim()), static_cast<Eigen::Index>(n_patches));
  for (std::size_t i = 0; i < n_patches; ++i) {
    const auto& set = sets[rng.uniform_index(sets.size())];
    const auto row = static_cast<std::size_t>(rng.uniform_index(set.height() - p + 1));
    const auto col = static_cast<std::size_t>(rng.uniform_index(set.width() - p + 1));
    copy_window(set, p, row, col, out.data.col(static_cast<Eigen::Index>(i)).data());
  }
  return out;
}

PatchMatrix all_patches(const FeatureMapSet& set, std::size_t p) {
  if (p == 0 || p > set.height() || p > set.width()) {
    throw Error(ErrorCode::kInvalidPatchSize, "patch side does not fit the feature map");
  }
  const std::size_t oh = set.height() - p + 1;
  const std::size_t ow = set.width() - p + 1;
  PatchMatrix out;
  out.patch_side = p;
  out.depth = set.depth();
  out.data.resize(static_cast<Eigen::Index>(out.dim()), static_cast<Eigen::Index>(oh * ow));
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      copy_window(set, p, r, c, out.data.col(static_cast<Eigen::Index>(r * ow + c)).data());
    }
  }
  return out;
}

std::vector<double> normalize_patch(std::span<const double> patch) {
  Eigen::MatrixXd m = Eigen::Map<const Eigen::VectorXd>(patch.data(),
                                                        static_cast<Eigen::Index>(patch.size()));
  normalize_columns(m);
  return {m.data(), m.data() + m.size()};
}

void normalize_columns(Eigen::MatrixXd& patches) {
  if (patches.rows() == 0) return;
  for (Eigen::Index j = 0; j < patches.cols(); ++j) {
    auto col = patches.col(j);
    const double peak = col.cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    col /= peak;
    col.array() -= col.mean();
  }
}

Eigen::MatrixXd column_covariance(const Eigen::MatrixXd& data) {
  const Eigen::VectorXd mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - mean;
  return centered * centered.transpose() / static_cast<double>(data.cols());
}

ZcaTransform fit_zca(const PatchMatrix& patches, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ZCA epsilon must be > 0");
  if (patches.count() == 0) throw Error(ErrorCode::kInvalidArgument, "no patches to whiten");
  if (!patches.data.allFinite()) throw Error(ErrorCode::kNonFiniteValue, "patch matrix");

  ZcaTransform t;
  t.epsilon = epsilon;
  t.mean = patches.data.rowwise().mean();
  const Eigen::MatrixXd cov = column_covariance(patches.data);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNonFiniteValue, "eigendecomposition of patch covariance failed");
  }
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double top = std::max(lambda.maxCoeff(), 0.0);
  const double floor = 1e-12 * top;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = std::max(lambda[i], floor);
  const Eigen::VectorXd scale = (lambda.array() + epsilon).rsqrt();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd m = v * scale.asDiagonal() * v.transpose();
  t.matrix = (m + m.transpose()) / 2.0;
  return t;
}

PatchMatrix apply_zca(const ZcaTransform& t, const PatchMatrix& patches) {
  if (static_cast<std::size_t>(patches.data.rows()) != t.dim()) {
    throw Error(ErrorCode::kDim, "patch dimension " + std::to_string(patches.data.rows()) +
                                     " does not match transform dimension " +
                                     std::to_string(t.dim()));
  }
  PatchMatrix out;
  out.patch_side = patches.patch_side;
  out.depth = patches.depth;
  out.data = t.matrix * (patches.data.colwise() - t.mean);
  return out;
}

}  // namespace cdfn
