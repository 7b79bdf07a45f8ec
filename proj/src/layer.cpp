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

#include "cdfn/layer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cdfn/patch.hpp"

namespace cdfn {

std::string_view to_string(Rectifier r) { return r == Rectifier::kAbs ? "abs" : "on_off"; }

Rectifier parse_rectifier(std::string_view s) {
  if (s == "abs") return Rectifier::kAbs;
  if (s == "on_off") return Rectifier::kOnOff;
  throw Error(ErrorCode::kConfig, "unknown rectifier '" + std::string(s) + "'");
}

void LayerConfig::validate() const {
  if (pool_side < 1 || pool_stride < 1) {
    throw Error(ErrorCode::kConfig, "pool side and stride must be >= 1");
  }
  if (!(pool_alpha >= 1.0)) throw Error(ErrorCode::kConfig, "pool alpha must be >= 1");
  if (lcn_window < 3 || lcn_window % 2 == 0) {
    throw Error(ErrorCode::kConfig, "LCN window must be odd and >= 3");
  }
  if (!(lcn_sigma > 0.0)) throw Error(ErrorCode::kConfig, "LCN sigma must be > 0");
}

FeatureMapSet convolve_valid(const FeatureMapSet& input, const FilterBank& bank,
                             bool dense_preprocess) {
  if (input.depth() != bank.depth) {
    throw Error(ErrorCode::kDim, "input depth " + std::to_string(input.depth()) +
                                     " does not match filter depth " + std::to_string(bank.depth));
  }
  if (static_cast<std::size_t>(bank.filters.rows()) != bank.dim()) {
    throw Error(ErrorCode::kDim, "filter length does not match patch_side^2 * depth");
  }
  if (input.height() < bank.patch_side || input.width() < bank.patch_side) {
    throw Error(ErrorCode::kDim, "feature map smaller than filter");
  }
  PatchMatrix patches = all_patches(input, bank.patch_side);
  const std::size_t oh = input.height() - bank.patch_side + 1;
  const std::size_t ow = input.width() - bank.patch_side + 1;

  // responses is (positions x K), column-major, so column k is map k.
  Eigen::MatrixXd responses;
  if (dense_preprocess) {
    if (bank.whitening.dim() != bank.dim()) {
      throw Error(ErrorCode::kDim, "filter bank has no whitening transform of matching size");
    }
    normalize_columns(patches.data);
    const Eigen::MatrixXd projected = bank.filters.transpose() * bank.whitening.matrix;
    responses = (patches.data.colwise() - bank.whitening.mean).transpose() * projected.transpose();
  } else {
    responses = patches.data.transpose() * bank.filters;
  }
  std::vector<double> values(responses.data(), responses.data() + responses.size());
  return FeatureMapSet(oh, ow, bank.count(), std::move(values), input.source_image_id());
}

FeatureMapSet rectify_abs(const FeatureMapSet& x) {
  FeatureMapSet out = x;
  for (double& v : out.values()) v = std::abs(v);
  return out;
}

FeatureMapSet rectify_on_off(const FeatureMapSet& x) {
  FeatureMapSet out(x.height(), x.width(), 2 * x.depth(), x.source_image_id());
  for (std::size_t d = 0; d < x.depth(); ++d) {
    const auto in = x.map(d);
    auto on = out.map(2 * d);
    auto off = out.map(2 * d + 1);
    for (std::size_t i = 0; i < in.size(); ++i) {
      on[i] = std::max(0.0, in[i]);
      off[i] = std::max(0.0, -in[i]);
    }
  }
  return out;
}

namespace {

std::vector<double> gaussian_1d(std::size_t window, double sigma) {
  const auto half = static_cast<double>(window / 2);
  std::vector<double> g(window);
  for (std::size_t i = 0; i < window; ++i) {
    const double t = static_cast<double>(i) - half;
    g[i] = std::exp(-t * t / (2.0 * sigma * sigma));
  }
  const double total = std::accumulate(g.begin(), g.end(), 0.0);
  for (double& v : g) v /= total;
  return g;
}

void check_window(const FeatureMapSet& x, std::size_t window, double sigma) {
  if (window == 0 || window % 2 == 0) {
    throw Error(ErrorCode::kInvalidWindow, "LCN window must be odd, got " + std::to_string(window));
  }
  if (window > std::min(x.height(), x.width())) {
    throw Error(ErrorCode::kInvalidWindow,
                "LCN window " + std::to_string(window) + " larger than " +
                    std::to_string(x.height()) + "x" + std::to_string(x.width()) + " map");
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "LCN sigma must be > 0");
}

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  if (i < 0) i = -i;
  if (i > last) i = 2 * last - i;
  return static_cast<std::size_t>(i);
}

// Separable Gaussian blur of one h x w plane with reflected borders.
std::vector<double> blur(const std::vector<double>& plane, std::size_t h, std::size_t w,
                         const std::vector<double>& g) {
  const auto half = static_cast<std::ptrdiff_t>(g.size() / 2);
  std::vector<double> tmp(plane.size(), 0.0);
  std::vector<double> out(plane.size(), 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t q = -half; q <= half; ++q) {
        acc += g[static_cast<std::size_t>(q + half)] *
               plane[r * w + reflect(static_cast<std::ptrdiff_t>(c) + q, w)];
      }
      tmp[r * w + c] = acc;
    }
  }
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t p = -half; p <= half; ++p) {
        acc += g[static_cast<std::size_t>(p + half)] *
               tmp[reflect(static_cast<std::ptrdiff_t>(r) + p, h) * w + c];
      }
      out[r * w + c] = acc;
    }
  }
  return out;
}

}  // namespace

std::vector<double> gaussian_window(std::size_t window, double sigma) {
  const auto g = gaussian_1d(window, sigma);
  std::vector<double> w(window * window);
  for (std::size_t p = 0; p < window; ++p) {
    for (std::size_t q = 0; q < window; ++q) w[p * window + q] = g[p] * g[q];
  }
  return w;
}

FeatureMapSet lcn_subtractive(const FeatureMapSet& x, std::size_t window, double sigma) {
  check_window(x, window, sigma);
  const std::size_t n = x.map_size();
  const double inv_depth = 1.0 / static_cast<double>(x.depth());
  std::vector<double> avg(n, 0.0);
  for (std::size_t d = 0; d < x.depth(); ++d) {
    const auto m = x.map(d);
    for (std::size_t i = 0; i < n; ++i) avg[i] += m[i];
  }
  for (double& v : avg) v *= inv_depth;
  const auto local_mean = blur(avg, x.height(), x.width(), gaussian_1d(window, sigma));

  FeatureMapSet out = x;
  for (std::size_t d = 0; d < x.depth(); ++d) {
    auto m = out.map(d);
    for (std::size_t i = 0; i < n; ++i) m[i] -= local_mean[i];
  }
  return out;
}

FeatureMapSet lcn_divisive(const FeatureMapSet& v, std::size_t window, double sigma) {
  check_window(v, window, sigma);
  const std::size_t n = v.map_size();
  const double inv_depth = 1.0 / static_cast<double>(v.depth());
  std::vector<double> energy(n, 0.0);
  for (std::size_t d = 0; d < v.depth(); ++d) {
    const auto m = v.map(d);
    for (std::size_t i = 0; i < n; ++i) energy[i] += m[i] * m[i];
  }
  for (double& e : energy) e *= inv_depth;
  auto local_std = blur(energy, v.height(), v.width(), gaussian_1d(window, sigma));
  double floor = 0.0;
  for (double& s : local_std) {
    s = std::sqrt(std::max(s, 0.0));
    floor += s;
  }
  floor /= static_cast<double>(n);

  FeatureMapSet out(v.height(), v.width(), v.depth(), v.source_image_id());
  if (floor == 0.0) return out;
  for (std::size_t d = 0; d < v.depth(); ++d) {
    const auto in = v.map(d);
    auto o = out.map(d);
    for (std::size_t i = 0; i < n; ++i) o[i] = in[i] / std::max(floor, local_std[i]);
  }
  return out;
}

std::size_t pooled_extent(std::size_t extent, std::size_t p_pool, std::size_t stride) {
  if (p_pool == 0 || stride == 0) {
    throw Error(ErrorCode::kInvalidWindow, "pool side and stride must be >= 1");
  }
  if (p_pool > extent) {
    throw Error(ErrorCode::kInvalidWindow, "pool window " + std::to_string(p_pool) +
                                               " exceeds map extent " + std::to_string(extent));
  }
  return (extent - p_pool) / stride + 1;
}

FeatureMapSet pool(const FeatureMapSet& x, std::size_t p_pool, std::size_t stride, double alpha) {
  if (!(alpha >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "pool alpha must be >= 1");
  const std::size_t oh = pooled_extent(x.height(), p_pool, stride);
  const std::size_t ow = pooled_extent(x.width(), p_pool, stride);
  FeatureMapSet out(oh, ow, x.depth(), x.source_image_id());
  for (std::size_t d = 0; d < x.depth(); ++d) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t c = 0; c < ow; ++c) {
        const std::size_t r0 = r * stride;
        const std::size_t c0 = c * stride;
        double result = 0.0;
        if (alpha == 1.0) {
          for (std::size_t i = 0; i < p_pool; ++i) {
            for (std::size_t j = 0; j < p_pool; ++j) result += x(d, r0 + i, c0 + j);
          }
        } else {
          const bool integral = alpha == std::floor(alpha);
          double peak = 0.0;
          for (std::size_t i = 0; i < p_pool; ++i) {
            for (std::size_t j = 0; j < p_pool; ++j) {
              const double v = x(d, r0 + i, c0 + j);
              if (v < 0.0 && !integral) {
                throw Error(ErrorCode::kContract,
                            "pooling with a non-integer alpha needs inputs >= 0");
              }
              peak = std::max(peak, std::abs(v));
            }
          }
          if (peak > 0.0) {
            // Factor out the peak so large alpha does not overflow.
            double acc = 0.0;
            for (std::size_t i = 0; i < p_pool; ++i) {
              for (std::size_t j = 0; j < p_pool; ++j) {
                acc += std::pow(x(d, r0 + i, c0 + j) / peak, alpha);
              }
            }
            result = std::copysign(peak * std::pow(std::abs(acc), 1.0 / alpha), acc);
          }
        }
        out(d, r, c) = result;
      }
    }
  }
  return out;
}

GroupAssignment make_groups(std::size_t k1, std::size_t n_k, SeededRng& rng) {
  if (n_k == 0 || k1 == 0 || k1 % n_k != 0) {
    throw Error(ErrorCode::kInvalidGrouping, "group size " + std::to_string(n_k) +
                                                 " does not divide " + std::to_string(k1) +
                                                 " feature maps");
  }
  std::vector<std::size_t> order(k1);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  GroupAssignment out;
  for (std::size_t g = 0; g < k1 / n_k; ++g) {
    out.groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(g * n_k),
                            order.begin() + static_cast<std::ptrdiff_t>((g + 1) * n_k));
  }
  return out;
}

FeatureMapSet run_layer(const FeatureMapSet& input, const FilterBank& bank,
                        const LayerConfig& cfg) {
  cfg.validate();
  FeatureMapSet x = convolve_valid(input, bank, cfg.dense_preprocess);
  x = cfg.rectifier == Rectifier::kAbs ? rectify_abs(x) : rectify_on_off(x);
  x = lcn_subtractive(x, cfg.lcn_window, cfg.lcn_sigma);
  x = lcn_divisive(x, cfg.lcn_window, cfg.lcn_sigma);
  return pool(x, cfg.pool_side, cfg.pool_stride, cfg.pool_alpha);
}

MapShape conv_output_shape(const MapShape& input, std::size_t patch_side, std::size_t filters) {
  if (patch_side == 0 || patch_side > input.height || patch_side > input.width) {
    throw Error(ErrorCode::kDim, "feature map smaller than filter");
  }
  return {input.height - patch_side + 1, input.width - patch_side + 1, filters};
}

MapShape layer_output_shape(const MapShape& input, std::size_t patch_side, std::size_t filters,
                            const LayerConfig& cfg) {
  cfg.validate();
  MapShape s = conv_output_shape(input, patch_side, filters);
  if (cfg.rectifier == Rectifier::kOnOff) s.depth *= 2;
  if (cfg.lcn_window > std::min(s.height, s.width)) {
    throw Error(ErrorCode::kInvalidWindow, "LCN window larger than convolved map");
  }
  return {pooled_extent(s.height, cfg.pool_side, cfg.pool_stride),
          pooled_extent(s.width, cfg.pool_side, cfg.pool_stride), s.depth};
}

}  // namespace cdfn
