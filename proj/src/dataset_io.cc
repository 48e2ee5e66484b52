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

#include "drlqr/dataset_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "drlqr/errors.h"

namespace drlqr {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary dataset I/O assumes a little-endian host");

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseDouble(const std::string& s, const std::string& path, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ":" + std::to_string(line) + ": bad number '" + s +
                  "'");
  }
}

template <typename T>
void Put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::ifstream& in, const std::string& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw IoError(path + ": truncated dataset file");
  }
  return v;
}

void PutMatrix(std::ofstream& out, const Eigen::MatrixXd& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Eigen::MatrixXd GetMatrix(std::ifstream& in, Eigen::Index rows,
                          Eigen::Index cols, const std::string& path) {
  Eigen::MatrixXd m(rows, cols);
  if (!in.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)))) {
    throw IoError(path + ": truncated dataset file");
  }
  return m;
}

}  // namespace

void WriteDatasetCsv(const Dataset& ds, const std::string& path) {
  ds.Validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "traj,t";
  for (int i = 0; i < ds.dx; ++i) out << ",x_" << i;
  for (int i = 0; i < ds.du; ++i) out << ",u_" << i;
  out << '\n';
  out.precision(17);
  for (int n = 0; n < ds.size(); ++n) {
    const Trajectory& tr = ds.trajectories[n];
    for (int t = 0; t <= tr.length(); ++t) {
      out << n << ',' << t;
      for (int i = 0; i < ds.dx; ++i) out << ',' << tr.states(t, i);
      for (int i = 0; i < ds.du; ++i) {
        out << ',';
        if (t < tr.length()) out << tr.inputs(t, i);
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

Dataset ReadDatasetCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  const std::vector<std::string> header = SplitCsv(line);
  Dataset ds;
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (header[i].rfind("x_", 0) == 0) ++ds.dx;
    else if (header[i].rfind("u_", 0) == 0) ++ds.du;
    else throw IoError(path + ": unexpected column '" + header[i] + "'");
  }
  if (header.size() < 2 || header[0] != "traj" || header[1] != "t" ||
      ds.dx == 0 || ds.du == 0) {
    throw IoError(path + ": header must be traj,t,x_*,u_*");
  }
  std::vector<std::vector<std::vector<double>>> states;
  std::vector<std::vector<std::vector<double>>> inputs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsv(line);
    if (f.size() != header.size()) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(header.size()) + " fields");
    }
    const int n = static_cast<int>(ParseDouble(f[0], path, lineno));
    if (n < 0) throw IoError(path + ": negative trajectory index");
    if (n >= static_cast<int>(states.size())) {
      states.resize(n + 1);
      inputs.resize(n + 1);
    }
    std::vector<double> x(ds.dx);
    for (int i = 0; i < ds.dx; ++i) x[i] = ParseDouble(f[2 + i], path, lineno);
    states[n].push_back(std::move(x));
    if (!f[2 + ds.dx].empty()) {
      std::vector<double> u(ds.du);
      for (int i = 0; i < ds.du; ++i) {
        u[i] = ParseDouble(f[2 + ds.dx + i], path, lineno);
      }
      inputs[n].push_back(std::move(u));
    }
  }
  for (std::size_t n = 0; n < states.size(); ++n) {
    Trajectory tr;
    const int T = static_cast<int>(inputs[n].size());
    if (static_cast<int>(states[n].size()) != T + 1) {
      throw IoError(path + ": trajectory " + std::to_string(n) +
                    " has inconsistent state/input counts");
    }
    tr.states.resize(T + 1, ds.dx);
    tr.inputs.resize(T, ds.du);
    for (int t = 0; t <= T; ++t) {
      for (int i = 0; i < ds.dx; ++i) tr.states(t, i) = states[n][t][i];
    }
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < ds.du; ++i) tr.inputs(t, i) = inputs[n][t][i];
    }
    ds.trajectories.push_back(std::move(tr));
  }
  ds.Validate();
  return ds;
}

void WriteDatasetBinary(const Dataset& ds, const std::string& path) {
  ds.Validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kDatasetMagic, sizeof(kDatasetMagic));
  Put<std::uint32_t>(out, kDatasetVersion);
  Put<std::uint32_t>(out, 0);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.size()));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.horizon()));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dx));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.du));
  Put<std::uint64_t>(out, ds.seed);
  Eigen::MatrixXd input_cov = ds.input_cov;
  if (input_cov.size() == 0) input_cov = Eigen::MatrixXd::Zero(ds.du, ds.du);
  PutMatrix(out, input_cov);
  for (const Trajectory& tr : ds.trajectories) {
    PutMatrix(out, tr.states);
    PutMatrix(out, tr.inputs);
  }
  if (!out) throw IoError("write failed for " + path);
}

Dataset ReadDatasetBinary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0) {
    throw IoError(path + ": not a dataset container (bad magic)");
  }
  const auto version = Get<std::uint32_t>(in, path);
  if (version != kDatasetVersion) {
    throw IoError(path + ": unsupported dataset version " +
                  std::to_string(version));
  }
  Get<std::uint32_t>(in, path);
  Dataset ds;
  const auto N = Get<std::uint32_t>(in, path);
  const auto T = Get<std::uint32_t>(in, path);
  ds.dx = static_cast<int>(Get<std::uint32_t>(in, path));
  ds.du = static_cast<int>(Get<std::uint32_t>(in, path));
  ds.seed = Get<std::uint64_t>(in, path);
  ds.input_cov = GetMatrix(in, ds.du, ds.du, path);
  for (std::uint32_t n = 0; n < N; ++n) {
    Trajectory tr;
    tr.states = GetMatrix(in, T + 1, ds.dx, path);
    tr.inputs = GetMatrix(in, T, ds.du, path);
    ds.trajectories.push_back(std::move(tr));
  }
  ds.Validate();
  return ds;
}

}  // namespace drlqr
