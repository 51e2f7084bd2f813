// Copyright 2026 The mtlb Authors
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

// Writes an oracle checkpoint (ground truth replayed as the top mode) for CLI tests.
//
//   make_oracle_checkpoint <out-path> [config-file]

#include <iostream>

#include "mtlb/report/run_config.hpp"
#include "mtlb/train/checkpoint.hpp"

int main(int argc, char ** argv)
{
  if (argc < 2) {
    std::cerr << "usage: make_oracle_checkpoint <out-path> [config-file]\n";
    return 2;
  }
  try {
    const mtlb::RunConfig rc = argc > 2 ? mtlb::RunConfig::load(argv[2]) : mtlb::RunConfig{};
    mtlb::save_checkpoint(argv[1], mtlb::oracle_checkpoint(rc.model));
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
