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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "cdfn/layer.hpp"
#include "support/check.hpp"
#include "support/synthetic.hpp"

using namespace cdfn;
using testing::conv_oracle;
using testing::random_bank;
using testing::random_maps;

namespace {

double max_diff(const FeatureMapSet& a, const FeatureMapSet& b) {
  REQUIRE(a.height() == b.height());
  REQUIRE(a.width() == b.width());
  REQUIRE(a.depth() == b.depth());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  }
  return worst;
}

// Mirror index without repeating the edge sample: -1 -> 1, n -> n-2.
std::size_t mirror_index(long i, long n) {
  const long period = 2 * (n - 1);
  long m = ((i % period) + period) % period;
  return static_cast<std::size_t>(m < n ? m : period - m);
}

// Weight of offset (p, q) in map i: Gaussian over the window, normalised so
// the total over every map and offset is 1.
double lcn_weight(long p, long q, std::size_t window, double sigma, std::size_t depth) {
  const long half = static_cast<long>(window / 2);
  double total = 0.0;
  for (long a = -half; a <= half; ++a) {
    for (long b = -half; b <= half; ++b) total += std::exp(-(a * a + b * b) / (2 * sigma * sigma));
  }
  return std::exp(-(p * p + q * q) / (2 * sigma * sigma)) / (total * static_cast<double>(depth));
}

FeatureMapSet lcn_sub_oracle(const FeatureMapSet& x, std::size_t window, double sigma) {
  const long half = static_cast<long>(window / 2);
  const long h = static_cast<long>(x.height()), w = static_cast<long>(x.width());
  FeatureMapSet v = x;
  for (long j = 0; j < h; ++j) {
    for (long k = 0; k < w; ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < x.depth(); ++i) {
        for (long p = -half; p <= half; ++p) {
          for (long q = -half; q <= half; ++q) {
            mean += lcn_weight(p, q, window, sigma, x.depth()) *
                    x(i, mirror_index(j + p, h), mirror_index(k + q, w));
          }
        }
      }
      for (std::size_t i = 0; i < x.depth(); ++i) {
        v(i, static_cast<std::size_t>(j), static_cast<std::size_t>(k)) -= mean;
      }
    }
  }
  return v;
}

FeatureMapSet lcn_div_oracle(const FeatureMapSet& v, std::size_t window, double sigma) {
  const long half = static_cast<long>(window / 2);
  const long h = static_cast<long>(v.height()), w = static_cast<long>(v.width());
  std::vector<double> sigma_map(static_cast<std::size_t>(h * w));
  for (long j = 0; j < h; ++j) {
    for (long k = 0; k < w; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < v.depth(); ++i) {
        for (long p = -half; p <= half; ++p) {
          for (long q = -half; q <= half; ++q) {
            const double val = v(i, mirror_index(j + p, h), mirror_index(k + q, w));
            acc += lcn_weight(p, q, window, sigma, v.depth()) * val * val;
          }
        }
      }
      sigma_map[static_cast<std::size_t>(j * w + k)] = std::sqrt(acc);
    }
  }
  const double c = std::accumulate(sigma_map.begin(), sigma_map.end(), 0.0) /
                   static_cast<double>(sigma_map.size());
  FeatureMapSet y = v;
  for (std::size_t i = 0; i < v.depth(); ++i) {
    for (long j = 0; j < h; ++j) {
      for (long k = 0; k < w; ++k) {
        auto& out = y(i, static_cast<std::size_t>(j), static_cast<std::size_t>(k));
        out /= std::max(c, sigma_map[static_cast<std::size_t>(j * w + k)]);
      }
    }
  }
  return y;
}

FeatureMapSet window_of(std::vector<double> v) {
  return FeatureMapSet(2, 2, 1, std::move(v));
}

}  // namespace

TEST_CASE("delta and constant-input convolution examples") {
  SeededRng rng(1);
  const FeatureMapSet x = random_maps(6, 7, 1, rng);
  FilterBank delta = random_bank(3, 1, 1, rng);
  delta.filters.setZero();
  delta.filters(0, 0) = 1.0;
  const FeatureMapSet y = convolve_valid(x, delta, false);
  CHECK(y.height() == 4);
  CHECK(y.width() == 5);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 5; ++c) CHECK(y(0, r, c) == x(0, r, c));
  }

  FeatureMapSet ones(5, 5, 2);
  for (auto& v : ones.values()) v = 1.0;
  const FilterBank u = random_bank(3, 2, 3, rng);
  const FeatureMapSet z = convolve_valid(ones, u, false);
  for (std::size_t k = 0; k < 3; ++k) {
    const double total = u.filters.col(static_cast<Eigen::Index>(k)).sum();
    for (double v : z.map(k)) CHECK(v == doctest::Approx(total).epsilon(1e-14));
  }
}

TEST_CASE("convolution matches the brute-force oracle on 100 random instances") {
  SeededRng rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t p = 1 + rng.uniform_index(4);
    const std::size_t depth = 1 + rng.uniform_index(3);
    const std::size_t h = p + rng.uniform_index(6);
    const std::size_t w = p + rng.uniform_index(6);
    const std::size_t k = 1 + rng.uniform_index(4);
    const FeatureMapSet x = random_maps(h, w, depth, rng);
    const FilterBank b = random_bank(p, depth, k, rng, true);
    const bool pre = (t % 2) == 1;
    CHECK(max_diff(convolve_valid(x, b, pre), conv_oracle(x, b, pre)) <= 1e-12);
  }
}

TEST_CASE("5x5 input and 3x3 filter against the oracle") {
  SeededRng rng(3);
  const FeatureMapSet x = random_maps(5, 5, 1, rng);
  const FilterBank b = random_bank(3, 1, 1, rng);
  CHECK(max_diff(convolve_valid(x, b, false), conv_oracle(x, b, false)) <= 1e-12);
}

TEST_CASE("convolution without preprocessing is linear") {
  SeededRng rng(4);
  const FeatureMapSet x = random_maps(9, 8, 2, rng);
  const FeatureMapSet y = random_maps(9, 8, 2, rng);
  const FilterBank b = random_bank(3, 2, 5, rng);
  const double a = 1.7, c = -0.3;
  FeatureMapSet mix = x;
  for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = a * x.values()[i] + c * y.values()[i];
  FeatureMapSet expected = convolve_valid(x, b, false);
  const FeatureMapSet cy = convolve_valid(y, b, false);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    expected.values()[i] = a * expected.values()[i] + c * cy.values()[i];
  }
  CHECK(max_diff(convolve_valid(mix, b, false), expected) <= 1e-10);
}

TEST_CASE("depth mismatch is a DimError") {
  SeededRng rng(5);
  const FeatureMapSet x = random_maps(6, 6, 2, rng);
  CHECK_ERROR_CODE(convolve_valid(x, random_bank(3, 1, 2, rng), false), ErrorCode::kDim);
}

TEST_CASE("rectifier examples and identities") {
  const FeatureMapSet x(1, 2, 1, {-1.0, 2.0});
  const FeatureMapSet a = rectify_abs(x);
  CHECK(a(0, 0, 0) == 1.0);
  CHECK(a(0, 0, 1) == 2.0);
  CHECK(rectify_abs(a) == a);
  FeatureMapSet neg = x;
  for (auto& v : neg.values()) v = -v;
  CHECK(rectify_abs(neg) == a);

  const FeatureMapSet three = rectify_on_off(FeatureMapSet(1, 1, 1, std::vector<double>{3.0}));
  CHECK(three(0, 0, 0) == 3.0);
  CHECK(three(1, 0, 0) == 0.0);
  const FeatureMapSet two = rectify_on_off(FeatureMapSet(1, 1, 1, std::vector<double>{-2.0}));
  CHECK(two(0, 0, 0) == 0.0);
  CHECK(two(1, 0, 0) == 2.0);

  SeededRng rng(6);
  const FeatureMapSet r = random_maps(7, 6, 3, rng);
  const FeatureMapSet oo = rectify_on_off(r);
  const FeatureMapSet ab = rectify_abs(r);
  CHECK(oo.depth() == 6);
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::size_t i = 0; i < r.map_size(); ++i) {
      const double on = oo.map(2 * d)[i], off = oo.map(2 * d + 1)[i], v = r.map(d)[i];
      CHECK(on >= 0.0);
      CHECK(off >= 0.0);
      CHECK(on * off == 0.0);
      CHECK(on - off == v);
      CHECK(on + off == ab.map(d)[i]);
    }
  }
}

TEST_CASE("gaussian window sums to one and is symmetric") {
  const auto w = gaussian_window(9, 2.25);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(w[80]).epsilon(1e-15));
  CHECK(w[40] == *std::max_element(w.begin(), w.end()));
}

TEST_CASE("subtractive LCN of constants is zero") {
  for (const double c : {0.0, 1.0, -3.5, 1e3}) {
    FeatureMapSet x(12, 10, 3);
    for (auto& v : x.values()) v = c;
    const FeatureMapSet v = lcn_subtractive(x, 5, 1.25);
    for (double e : v.values()) CHECK(std::abs(e) <= 1e-10);
  }
}

TEST_CASE("subtractive LCN ignores an added constant") {
  SeededRng rng(7);
  const FeatureMapSet x = random_maps(11, 13, 2, rng);
  FeatureMapSet shifted = x;
  for (auto& v : shifted.values()) v += 4.2;
  CHECK(max_diff(lcn_subtractive(x, 5, 1.25), lcn_subtractive(shifted, 5, 1.25)) <= 1e-10);
}

TEST_CASE("subtractive LCN of an impulse matches direct summation") {
  FeatureMapSet x(9, 9, 1);
  x(0, 4, 4) = 1.0;
  const FeatureMapSet v = lcn_subtractive(x, 5, 1.25);
  CHECK(max_diff(v, lcn_sub_oracle(x, 5, 1.25)) <= 1e-12);
  // Away from borders this is the impulse minus the kernel.
  const auto g = gaussian_window(5, 1.25);
  CHECK(v(0, 4, 4) == doctest::Approx(1.0 - g[12]).epsilon(1e-12));
  CHECK(v(0, 3, 5) == doctest::Approx(-g[1 * 5 + 3]).epsilon(1e-12));
}

TEST_CASE("LCN matches direct summation on random 8x8x2 input") {
  SeededRng rng(8);
  for (int t = 0; t < 10; ++t) {
    const FeatureMapSet x = random_maps(8, 8, 2, rng);
    CHECK(max_diff(lcn_subtractive(x, 5, 1.25), lcn_sub_oracle(x, 5, 1.25)) <= 1e-12);
    CHECK(max_diff(lcn_divisive(x, 5, 1.25), lcn_div_oracle(x, 5, 1.25)) <= 1e-12);
    CHECK(max_diff(lcn_divisive(x, 3, 0.75), lcn_div_oracle(x, 3, 0.75)) <= 1e-12);
  }
}

TEST_CASE("divisive LCN degenerate and contrast cases") {
  const FeatureMapSet zero(6, 6, 2);
  CHECK(lcn_divisive(zero, 3, 0.75) == zero);

  SeededRng rng(9);
  const FeatureMapSet v = random_maps(10, 10, 2, rng);
  FeatureMapSet scaled = v;
  for (auto& e : scaled.values()) e *= 37.0;
  // c and every sigma scale by the same factor, so the output is unchanged
  // everywhere.
  CHECK(max_diff(lcn_divisive(v, 5, 1.25), lcn_divisive(scaled, 5, 1.25)) <= 1e-12);
}

TEST_CASE("LCN window validation") {
  const FeatureMapSet x(6, 6, 1);
  CHECK_ERROR_CODE(lcn_subtractive(x, 4, 1.0), ErrorCode::kInvalidWindow);
  CHECK_ERROR_CODE(lcn_subtractive(x, 7, 1.0), ErrorCode::kInvalidWindow);
  CHECK_ERROR_CODE(lcn_divisive(x, 0, 1.0), ErrorCode::kInvalidWindow);
}

TEST_CASE("pooling examples") {
  const FeatureMapSet w = window_of({1, 2, 3, 4});
  CHECK(pool(w, 2, 2, 1.0)(0, 0, 0) == 10.0);
  CHECK(std::abs(pool(w, 2, 2, 64.0)(0, 0, 0) - 4.0) <= 0.05);
  CHECK(pool(w, 2, 2, 2.0)(0, 0, 0) == doctest::Approx(std::sqrt(30.0)).epsilon(1e-14));
  CHECK(pool(w, 2, 2, 2.0)(0, 0, 0) == doctest::Approx(5.4772).epsilon(1e-4));
  CHECK_ERROR_CODE(pool(w, 3, 1, 1.0), ErrorCode::kInvalidWindow);
  CHECK_ERROR_CODE(pool(window_of({1, -2, 3, 4}), 2, 2, 2.5), ErrorCode::kContract);
  CHECK(pool(window_of({1, -2, 3, 4}), 2, 2, 2.0)(0, 0, 0) == doctest::Approx(std::sqrt(30.0)));
  CHECK(pool(window_of({1, -2, -3, 0}), 2, 2, 3.0)(0, 0, 0) == doctest::Approx(-std::cbrt(34.0)));
  CHECK(pool(window_of({1, -2, 3, 4}), 2, 2, 1.0)(0, 0, 0) == 6.0);
}

TEST_CASE("alpha=1 equals the window sum and alpha=64 approximates the max") {
  SeededRng rng(10);
  for (int t = 0; t < 200; ++t) {
    const std::size_t p = 1 + rng.uniform_index(5);
    const std::size_t s = 1 + rng.uniform_index(4);
    const FeatureMapSet x = random_maps(p + rng.uniform_index(8), p + rng.uniform_index(8), 2, rng, 0.0, 1.0);
    const FeatureMapSet sum = pool(x, p, s, 1.0);
    const FeatureMapSet mx = pool(x, p, s, 64.0);
    CHECK(sum.height() == (x.height() - p) / s + 1);
    CHECK(sum.width() == (x.width() - p) / s + 1);
    for (std::size_t d = 0; d < 2; ++d) {
      for (std::size_t r = 0; r < sum.height(); ++r) {
        for (std::size_t c = 0; c < sum.width(); ++c) {
          double total = 0.0, peak = 0.0;
          for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
              total += x(d, r * s + i, c * s + j);
              peak = std::max(peak, x(d, r * s + i, c * s + j));
            }
          }
          CHECK(sum(d, r, c) == doctest::Approx(total).epsilon(1e-14));
          CHECK(std::abs(mx(d, r, c) - peak) <= 0.05);
        }
      }
    }
  }
}

TEST_CASE("pooling is monotone in every input") {
  SeededRng rng(11);
  for (const double alpha : {1.0, 2.0, 3.5}) {
    const FeatureMapSet x = random_maps(6, 6, 1, rng, 0.0, 1.0);
    const FeatureMapSet base = pool(x, 3, 2, alpha);
    for (std::size_t i = 0; i < x.size(); ++i) {
      FeatureMapSet bumped = x;
      bumped.values()[i] += 0.1;
      const FeatureMapSet up = pool(bumped, 3, 2, alpha);
      for (std::size_t j = 0; j < up.size(); ++j) CHECK(up.values()[j] >= base.values()[j]);
    }
  }
}

TEST_CASE("make_groups examples") {
  SeededRng rng(12);
  const GroupAssignment g = make_groups(8, 4, rng);
  CHECK(g.groups.size() == 2);
  CHECK(g.group_size() == 4);
  CHECK(make_groups(300, 4, rng).groups.size() == 75);
  CHECK_ERROR_CODE(make_groups(10, 4, rng), ErrorCode::kInvalidGrouping);
}

TEST_CASE("make_groups always partitions and is deterministic") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SeededRng rng(seed);
    const std::size_t n_k = 1 + rng.uniform_index(6);
    const std::size_t k1 = n_k * (1 + rng.uniform_index(20));
    const GroupAssignment g = make_groups(k1, n_k, rng);
    std::set<std::size_t> seen;
    for (const auto& grp : g.groups) {
      CHECK(grp.size() == n_k);
      for (auto i : grp) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == k1);
    CHECK(*seen.rbegin() == k1 - 1);
  }
  SeededRng a(3), b(3);
  CHECK(make_groups(40, 4, a).groups == make_groups(40, 4, b).groups);
}

TEST_CASE("run_layer shapes for the 96x96 layer-1 configurations") {
  SeededRng rng(13);
  const FeatureMapSet img = random_maps(96, 96, 1, rng, 0.0, 1.0);
  const FilterBank bank = random_bank(16, 1, 300, rng);
  LayerConfig cfg;
  const FeatureMapSet y = run_layer(img, bank, cfg);
  CHECK(y.height() == 6);
  CHECK(y.width() == 6);
  CHECK(y.depth() == 300);

  cfg.pool_stride = 8;
  const FeatureMapSet y8 = run_layer(img, bank, cfg);
  CHECK(y8.height() == 9);
  CHECK(y8.depth() == 300);

  cfg.rectifier = Rectifier::kOnOff;
  CHECK(run_layer(img, bank, cfg).depth() == 600);
}

TEST_CASE("executed layer shapes follow the closed form") {
  SeededRng rng(14);
  for (int t = 0; t < 60; ++t) {
    const std::size_t p = 1 + rng.uniform_index(5);
    const std::size_t depth = 1 + rng.uniform_index(3);
    const std::size_t k = 1 + rng.uniform_index(4);
    LayerConfig cfg;
    cfg.rectifier = rng.uniform_index(2) ? Rectifier::kAbs : Rectifier::kOnOff;
    cfg.lcn_window = 3 + 2 * rng.uniform_index(2);
    cfg.lcn_sigma = 1.0;
    cfg.pool_side = 1 + rng.uniform_index(4);
    cfg.pool_stride = 1 + rng.uniform_index(4);
    cfg.pool_alpha = rng.uniform_index(2) ? 1.0 : 2.0;
    const std::size_t conv_min = std::max(cfg.lcn_window, cfg.pool_side);
    const std::size_t h = p - 1 + conv_min + rng.uniform_index(10);
    const std::size_t w = p - 1 + conv_min + rng.uniform_index(10);
    const FeatureMapSet x = random_maps(h, w, depth, rng);
    const FilterBank bank = random_bank(p, depth, k, rng);
    const FeatureMapSet y = run_layer(x, bank, cfg);
    const std::size_t ch = h - p + 1, cw = w - p + 1;
    CHECK(y.height() == (ch - cfg.pool_side) / cfg.pool_stride + 1);
    CHECK(y.width() == (cw - cfg.pool_side) / cfg.pool_stride + 1);
    CHECK(y.depth() == (cfg.rectifier == Rectifier::kOnOff ? 2 * k : k));
    const MapShape s = layer_output_shape({h, w, depth}, p, k, cfg);
    CHECK(s == MapShape{y.height(), y.width(), y.depth()});
  }
}

TEST_CASE("layer config validation") {
  LayerConfig cfg;
  cfg.lcn_window = 4;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kConfig);
  cfg = {};
  cfg.pool_alpha = 0.5;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kConfig);
  cfg = {};
  cfg.pool_stride = 0;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kConfig);
  CHECK(parse_rectifier("on_off") == Rectifier::kOnOff);
  CHECK_ERROR_CODE(parse_rectifier("relu"), ErrorCode::kConfig);
}
