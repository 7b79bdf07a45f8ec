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

// Writes a two-network stripe experiment in STL-10 file format into argv[1].

#include <iostream>

#include "support/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_stripe_data <dir>\n";
    return 2;
  }
  using cdfn::testing::toy_network_ini;
  const std::string scale = "scale_factor = 0.6666666666666666\n";
  const auto ini = cdfn::testing::write_stripe_experiment(
      argv[1], 2, 40, 40, 11, "A B",
      toy_network_ini("A", 1, 2, scale) + toy_network_ini("B", 2, 2, scale + "mirror = true\n"));
  std::cout << ini.string() << "\n";
  return 0;
}
