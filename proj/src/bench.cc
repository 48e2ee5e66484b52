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

#include "drlqr/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "drlqr/errors.h"
#include "drlqr/lqr.h"
#include "drlqr/sysid.h"
#include "drlqr/thread_pool.h"

namespace drlqr {
namespace {

std::string FormatCost(const Cost& c) {
  if (c.is_infinite()) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << c.value();
  return os.str();
}

Cost ParseCost(const std::string& token, const std::string& context) {
  if (token == "inf") return Cost::Infinite();
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument("");
    return Cost(v);
  } catch (const std::exception&) {
    throw IoError(context + ": cannot parse cost '" + token + "'");
  }
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::ifstream OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

std::ofstream OpenForWrite(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(17);
  return out;
}

void ExpectHeader(std::ifstream& in, const std::string& header,
                  const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw IoError(path + ": expected header '" + header + "'");
  }
}

auto TrialKey(const TrialResult& t) {
  return std::make_tuple(t.N, static_cast<int>(t.method), t.seed);
}

// Synthesizes the controller for one method from a fitted model. Failures
// that mean "no usable controller" propagate as drlqr::Error subclasses.
Gain SynthesizeFor(const SweepConfig& cfg, const Dataset& ds,
                   const SystemParams& theta_hat, Method method, Rng& rng) {
  if (method == Method::kCE) {
    return SynthesizeCertaintyEquivalent(theta_hat, cfg.cm);
  }
  const FisherEstimate fisher = EstimateFisher(ds, cfg.cm);
  const ConfidenceEllipsoid G =
      BuildConfidenceEllipsoid(theta_hat, fisher, ds.size(), cfg.delta);
  if (method == Method::kDR) {
    return SynthesizeDomainRandomized(G, cfg.cm, cfg.dr, rng).gain;
  }
  return SynthesizeRobust(G, cfg.cm, cfg.rc, rng).gain;
}

}  // namespace

std::string MethodName(Method m) {
  switch (m) {
    case Method::kCE:
      return "ce";
    case Method::kDR:
      return "dr";
    case Method::kRC:
      return "rc";
  }
  return "?";
}

Method ParseMethod(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ce") return Method::kCE;
  if (lower == "dr") return Method::kDR;
  if (lower == "rc") return Method::kRC;
  throw InvalidArgument("unknown method '" + name + "' (expected ce, dr or rc)");
}

void SweepConfig::Validate() const {
  if (n_grid.empty()) throw InvalidArgument("n_grid: must not be empty");
  if (n_grid.front() < 1) throw InvalidArgument("n_grid: entries must be >= 1");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw InvalidArgument("n_grid: must be strictly increasing");
    }
  }
  if (T < 1) throw InvalidArgument("T: must be >= 1");
  if (seeds < 1) throw InvalidArgument("seeds: must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("delta: must lie in (0, 1)");
  }
  if (methods.empty()) throw InvalidArgument("methods: must not be empty");
  if (theta_star.dx() != cm.dx() || theta_star.du() != cm.du()) {
    throw InvalidArgument("theta_star: dimensions disagree with cost weights");
  }
  if (input_cov.rows() != theta_star.du() || input_cov.cols() != theta_star.du()) {
    throw InvalidArgument("input_cov: must be du x du");
  }
  dr.Validate();
  rc.Validate();
}

bool SameOutcome(const TrialResult& a, const TrialResult& b) {
  return a.seed == b.seed && a.N == b.N && a.method == b.method &&
         a.excess_cost == b.excess_cost && a.stable == b.stable;
}

TrialResult RunTrial(const SweepConfig& cfg, int seed, int N, Method method) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult r;
  r.seed = seed;
  r.N = N;
  r.method = method;

  const Rng root(cfg.master_seed);
  const auto s = static_cast<std::uint64_t>(seed);
  const auto n = static_cast<std::uint64_t>(N);
  const Eigen::MatrixXd noise =
      cfg.noiseless ? Eigen::MatrixXd::Zero(cfg.cm.dx(), cfg.cm.dx())
                    : cfg.cm.noise_cov();
  const Dataset ds = CollectDataset(cfg.theta_star, noise, N, cfg.T,
                                    cfg.input_cov, root.Split({s, n}));
  Rng synth_rng = root.Split({s, n, 1 + static_cast<std::uint64_t>(method)});
  try {
    const SystemParams theta_hat = LeastSquares(ds);
    const Gain K = SynthesizeFor(cfg, ds, theta_hat, method, synth_rng);
    r.excess_cost = ExcessCost(K, cfg.theta_star, cfg.cm);
  } catch (const RankDeficient&) {
    r.excess_cost = Cost::Infinite();
  } catch (const NotStabilizable&) {
    r.excess_cost = Cost::Infinite();
  } catch (const SingularFisher&) {
    r.excess_cost = Cost::Infinite();
  } catch (const AllScenariosUnstable&) {
    r.excess_cost = Cost::Infinite();
  } catch (const NoStabilizingCandidate&) {
    r.excess_cost = Cost::Infinite();
  } catch (const SolverError&) {
    r.excess_cost = Cost::Infinite();
  }
  r.stable = r.excess_cost.is_finite();
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
  return r;
}

void SortTrials(std::vector<TrialResult>& table) {
  std::sort(table.begin(), table.end(),
            [](const TrialResult& a, const TrialResult& b) {
              return TrialKey(a) < TrialKey(b);
            });
}

std::vector<TrialResult> RunSweep(const SweepConfig& cfg,
                                  const SweepOptions& opts) {
  cfg.Validate();
  std::vector<TrialResult> table;
  for (int N : cfg.n_grid) {
    for (Method m : cfg.methods) {
      for (int seed = 0; seed < cfg.seeds; ++seed) {
        TrialResult t;
        t.seed = seed;
        t.N = N;
        t.method = m;
        table.push_back(t);
      }
    }
  }
  SortTrials(table);

  std::vector<std::size_t> todo;
  if (opts.existing != nullptr) {
    std::map<std::tuple<int, int, int>, const TrialResult*> known;
    for (const TrialResult& t : *opts.existing) known[TrialKey(t)] = &t;
    for (std::size_t i = 0; i < table.size(); ++i) {
      const auto it = known.find(TrialKey(table[i]));
      if (it != known.end()) {
        table[i] = *it->second;
      } else {
        todo.push_back(i);
      }
    }
  } else {
    for (std::size_t i = 0; i < table.size(); ++i) todo.push_back(i);
  }

  std::mutex report_mutex;
  std::size_t done = table.size() - todo.size();
  ParallelFor(todo.size(), opts.threads, [&](std::size_t k) {
    TrialResult& slot = table[todo[k]];
    slot = RunTrial(cfg, slot.seed, slot.N, slot.method);
    std::lock_guard<std::mutex> lock(report_mutex);
    ++done;
    if (opts.on_trial) opts.on_trial(slot);
    if (opts.progress) opts.progress(done, table.size());
  });
  return table;
}

Cost NearestRankQuantile(std::vector<Cost> values, double p) {
  if (values.empty()) throw InvalidArgument("quantile of an empty set");
  std::sort(values.begin(), values.end(),
            [](const Cost& a, const Cost& b) { return a < b; });
  const auto n = static_cast<long>(values.size());
  long rank = static_cast<long>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp(rank, 1L, n);
  return values[static_cast<std::size_t>(rank - 1)];
}

SummaryRow SummarizeCell(const std::vector<TrialResult>& table, int N,
                         Method method) {
  std::vector<Cost> values;
  int unstable = 0;
  for (const TrialResult& t : table) {
    if (t.N != N || t.method != method) continue;
    values.push_back(t.excess_cost);
    if (t.excess_cost.is_infinite()) ++unstable;
  }
  if (values.empty()) {
    throw InvalidArgument("no trials for cell N=" + std::to_string(N) +
                          " method=" + MethodName(method));
  }
  SummaryRow row;
  row.N = N;
  row.method = method;
  row.median = NearestRankQuantile(values, 0.5);
  row.q25 = NearestRankQuantile(values, 0.25);
  row.q75 = NearestRankQuantile(values, 0.75);
  row.unstable_fraction =
      static_cast<double>(unstable) / static_cast<double>(values.size());
  return row;
}

std::vector<SummaryRow> Summarize(const std::vector<TrialResult>& table) {
  std::vector<std::pair<int, Method>> cells;
  for (const TrialResult& t : table) cells.emplace_back(t.N, t.method);
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  std::vector<SummaryRow> out;
  out.reserve(cells.size());
  for (const auto& [N, m] : cells) out.push_back(SummarizeCell(table, N, m));
  return out;
}

void WriteTrialsCsv(const std::vector<TrialResult>& table,
                    const std::string& path) {
  std::ofstream out = OpenForWrite(path);
  out << "seed,N,method,excess_cost,stable,wall_time\n";
  for (const TrialResult& t : table) {
    out << t.seed << ',' << t.N << ',' << MethodName(t.method) << ','
        << FormatCost(t.excess_cost) << ',' << (t.stable ? 1 : 0) << ','
        << t.wall_time << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

std::vector<TrialResult> ReadTrialsCsv(const std::string& path) {
  std::ifstream in = OpenForRead(path);
  ExpectHeader(in, "seed,N,method,excess_cost,stable,wall_time", path);
  std::vector<TrialResult> table;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != 6) throw IoError(where + ": expected 6 fields");
    TrialResult t;
    try {
      t.seed = std::stoi(f[0]);
      t.N = std::stoi(f[1]);
      t.method = ParseMethod(f[2]);
      t.stable = std::stoi(f[4]) != 0;
      t.wall_time = std::stod(f[5]);
    } catch (const std::exception& e) {
      throw IoError(where + ": " + e.what());
    }
    t.excess_cost = ParseCost(f[3], where);
    if (t.stable != t.excess_cost.is_finite()) {
      throw IoError(where + ": stable flag disagrees with excess_cost");
    }
    table.push_back(t);
  }
  return table;
}

void WriteSummaryCsv(const std::vector<SummaryRow>& summary,
                     const std::string& path) {
  std::ofstream out = OpenForWrite(path);
  out << "N,method,median,q25,q75,unstable_fraction\n";
  for (const SummaryRow& r : summary) {
    out << r.N << ',' << MethodName(r.method) << ',' << FormatCost(r.median)
        << ',' << FormatCost(r.q25) << ',' << FormatCost(r.q75) << ','
        << r.unstable_fraction << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

std::vector<SummaryRow> ReadSummaryCsv(const std::string& path) {
  std::ifstream in = OpenForRead(path);
  ExpectHeader(in, "N,method,median,q25,q75,unstable_fraction", path);
  std::vector<SummaryRow> rows;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != 6) throw IoError(where + ": expected 6 fields");
    SummaryRow r;
    try {
      r.N = std::stoi(f[0]);
      r.method = ParseMethod(f[1]);
      r.unstable_fraction = std::stod(f[5]);
    } catch (const std::exception& e) {
      throw IoError(where + ": " + e.what());
    }
    r.median = ParseCost(f[2], where);
    r.q25 = ParseCost(f[3], where);
    r.q75 = ParseCost(f[4], where);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace drlqr
