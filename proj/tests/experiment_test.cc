// Copyright 2026 The wgaknn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Directional checks on the synthetic reference configuration, three seeds.

#include <gtest/gtest.h>

#include <map>
#include <string>
#include <utility>

#include "wgaknn/metrics.h"
#include "wgaknn/sweep.h"

namespace wgaknn {
namespace {

class ReferenceSweep : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SweepSpec spec = load_sweep_spec(std::filesystem::path(WGAKNN_PRESET_DIR) /
                                     "synth-reference.toml");
    spec.seeds = {0, 1, 2};
    const SweepResult result = run_sweep(spec);
    ASSERT_FALSE(result.has_cell_failures());
    for (const SummaryRow& row : aggregate(result.results)) {
      table_[{row.method, row.noise_level}] = 100.0 * row.wga.mean;
    }
  }

  static double wga(const std::string& method, double p) {
    const auto it = table_.find({method, p});
    if (it == table_.end()) {
      ADD_FAILURE() << "missing " << method << " at " << p;
      return 0.0;
    }
    return it->second;
  }

  static inline std::map<std::pair<std::string, double>, double> table_;
};

TEST_F(ReferenceSweep, GroupUpweightingBeatsErmWithoutNoise) {
  EXPECT_GT(wga("guw", 0.0), wga("erm", 0.0));
}

TEST_F(ReferenceSweep, RadCollapsesUnderHeavyNoise) {
  EXPECT_GE(wga("rad", 0.0) - wga("rad", 0.3), 20.0);
}

TEST_F(ReferenceSweep, SelfDropsUnderModerateNoise) {
  EXPECT_GE(wga("self", 0.0) - wga("self", 0.2), 15.0);
}

TEST_F(ReferenceSweep, SpreadingRescuesSelf) {
  EXPECT_GT(wga("knn-self", 0.2), wga("self", 0.2));
  EXPECT_GT(wga("knn-self", 0.3), wga("self", 0.3));
}

TEST_F(ReferenceSweep, SpreadingRescuesRad) {
  for (double p : {0.1, 0.2, 0.3}) {
    EXPECT_GE(wga("knn-rad", p), wga("rad", p)) << p;
  }
  EXPECT_GE(wga("knn-rad", 0.3) - wga("rad", 0.3), 10.0);
}

TEST_F(ReferenceSweep, ZeroNoiseCellsCoincide) {
  EXPECT_DOUBLE_EQ(wga("knn-rad", 0.0), wga("rad", 0.0));
}

}  // namespace
}  // namespace wgaknn
