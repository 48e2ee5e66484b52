// Copyright 2026 The drlqr Authors
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


#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "drlqr/dataset_io.h"
#include "drlqr/errors.h"
#include "drlqr/rng.h"
#include "drlqr/sysid.h"
#include "test_util.h"

namespace drlqr {
namespace {

namespace fs = std::filesystem;

fs::path TempPath(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "drlqr_tests";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Rng, SplitStreamsAreReproducibleAndDistinct) {
  const Rng root(123);
  Rng a = root.Split(5), b = root.Split(5), c = root.Split(6);
  const double x = a.Normal();
  EXPECT_EQ(x, b.Normal());
  EXPECT_NE(x, c.Normal());
  EXPECT_EQ(root.Split({1, 2}).seed(), root.Split({1, 2}).seed());
  EXPECT_NE(root.Split({1, 2}).seed(), root.Split({2, 1}).seed());
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(9);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.Uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(DatasetIo, CsvRoundTrip) {
  const Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
  const Dataset ds =
      CollectDataset(testing::PaperSystem(), I3, 4, 6, I3, Rng(77));
  const fs::path p = TempPath("ds.csv");
  WriteDatasetCsv(ds, p.string());
  const Dataset back = ReadDatasetCsv(p.string());
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(back.dx, 3);
  EXPECT_EQ(back.du, 3);
  for (int n = 0; n < ds.size(); ++n) {
    EXPECT_EQ(back.trajectories[n].states, ds.trajectories[n].states);
    EXPECT_EQ(back.trajectories[n].inputs, ds.trajectories[n].inputs);
  }
}

TEST(DatasetIo, BinaryRoundTrip) {
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  const SystemParams th(0.5 * I2, I2);
  const Dataset ds = CollectDataset(th, I2, 3, 5, I2, Rng(78));
  const fs::path p = TempPath("ds.bin");
  WriteDatasetBinary(ds, p.string());
  const Dataset back = ReadDatasetBinary(p.string());
  ASSERT_EQ(back.size(), 3);
  EXPECT_EQ(back.seed, ds.seed);
  EXPECT_EQ(back.input_cov, ds.input_cov);
  EXPECT_EQ(back.trajectories[2].states, ds.trajectories[2].states);
}

TEST(DatasetIo, ErrorsCarryPath) {
  const fs::path p = TempPath("bad.csv");
  {
    std::ofstream out(p);
    out << "traj,t,x_0,u_0\n0,0,1.0,abc\n";
  }
  try {
    ReadDatasetCsv(p.string());
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(p.string()), std::string::npos);
  }
  EXPECT_THROW(ReadDatasetBinary(TempPath("missing.bin").string()), IoError);
  {
    std::ofstream out(TempPath("junk.bin"), std::ios::binary);
    out << "not a dataset";
  }
  EXPECT_THROW(ReadDatasetBinary(TempPath("junk.bin").string()), IoError);
}

}  // namespace
}  // namespace drlqr
