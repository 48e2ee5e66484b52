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

#include "run_config.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "drlqr/errors.h"

namespace drlqr::cli {
namespace {

std::string Trim(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

template <typename T>
T ParseScalar(const std::string& text) {
  const std::string t = Trim(text);
  try {
    return boost::lexical_cast<T>(t);
  } catch (const boost::bad_lexical_cast&) {
    throw std::invalid_argument("cannot parse '" + t + "'");
  }
}

bool ParseBool(const std::string& text) {
  std::string t = boost::algorithm::to_lower_copy(Trim(text));
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + t + "'");
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::is_any_of(", \t"),
                          boost::token_compress_on);
  parts.erase(std::remove_if(parts.begin(), parts.end(),
                             [](const std::string& p) { return p.empty(); }),
              parts.end());
  return parts;
}

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> out;
  for (const std::string& p : SplitList(text)) out.push_back(ParseScalar<int>(p));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::string FormatDouble(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T>
std::string JoinList(const std::vector<T>& v,
                     const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> format;
};

template <typename T>
Field Scalar(std::string section, std::string key, T RunConfig::*outer) {
  return {std::move(section), std::move(key),
          [outer](RunConfig& c, const std::string& v) {
            c.*outer = ParseScalar<T>(v);
          },
          [outer](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return FormatDouble(c.*outer);
            else return boost::lexical_cast<std::string>(c.*outer);
          }};
}

// Field bound to a member of a nested struct.
template <typename S, typename T>
Field Nested(std::string section, std::string key, S RunConfig::*outer,
             T S::*inner) {
  return {std::move(section), std::move(key),
          [outer, inner](RunConfig& c, const std::string& v) {
            if constexpr (std::is_same_v<T, bool>) {
              (c.*outer).*inner = ParseBool(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
              (c.*outer).*inner = Trim(v);
            } else if constexpr (std::is_same_v<T, Eigen::MatrixXd>) {
              (c.*outer).*inner = ParseMatrix(v);
            } else {
              (c.*outer).*inner = ParseScalar<T>(v);
            }
          },
          [outer, inner](const RunConfig& c) -> std::string {
            const T& value = (c.*outer).*inner;
            if constexpr (std::is_same_v<T, bool>) {
              return value ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::string>) {
              return value;
            } else if constexpr (std::is_same_v<T, Eigen::MatrixXd>) {
              return FormatMatrix(value);
            } else if constexpr (std::is_floating_point_v<T>) {
              return FormatDouble(value);
            } else {
              return boost::lexical_cast<std::string>(value);
            }
          }};
}

template <typename S, typename M, typename T>
Field Nested2(std::string section, std::string key, S RunConfig::*outer,
              M S::*middle, T M::*inner) {
  return {std::move(section), std::move(key),
          [=](RunConfig& c, const std::string& v) {
            ((c.*outer).*middle).*inner = ParseScalar<T>(v);
          },
          [=](const RunConfig& c) -> std::string {
            const T& value = ((c.*outer).*middle).*inner;
            if constexpr (std::is_floating_point_v<T>) return FormatDouble(value);
            else return boost::lexical_cast<std::string>(value);
          }};
}

const std::vector<Field>& Schema() {
  static const std::vector<Field> fields = [] {
    using R = RunConfig;
    std::vector<Field> f;
    f.push_back(Scalar("run", "seed", &R::seed));
    f.push_back({"run", "out",
                 [](R& c, const std::string& v) { c.out = Trim(v); },
                 [](const R& c) { return c.out; }});
    f.push_back(Scalar("run", "threads", &R::threads));

    f.push_back(Nested("system", "A", &R::system, &SystemSection::A));
    f.push_back(Nested("system", "B", &R::system, &SystemSection::B));
    f.push_back(Nested("system", "Q", &R::system, &SystemSection::Q));
    f.push_back(Nested("system", "R", &R::system, &SystemSection::R));
    f.push_back(
        Nested("system", "noise_cov", &R::system, &SystemSection::noise_cov));
    f.push_back(
        Nested("system", "input_cov", &R::system, &SystemSection::input_cov));

    f.push_back(Nested("data", "N", &R::data, &DataSection::N));
    f.push_back(Nested("data", "T", &R::data, &DataSection::T));
    f.push_back(Nested("data", "noiseless", &R::data, &DataSection::noiseless));
    f.push_back(Nested("data", "dataset", &R::data, &DataSection::dataset));

    f.push_back({"synth", "method",
                 [](R& c, const std::string& v) {
                   c.synth.method = ParseMethod(Trim(v));
                 },
                 [](const R& c) { return MethodName(c.synth.method); }});
    f.push_back(Nested("synth", "delta", &R::synth, &SynthSection::delta));
    f.push_back(Nested("synth", "model", &R::synth, &SynthSection::model));

    f.push_back({"bench", "n_grid",
                 [](R& c, const std::string& v) {
                   c.bench.n_grid = ParseIntList(v);
                 },
                 [](const R& c) {
                   return JoinList<int>(c.bench.n_grid, [](const int& n) {
                     return std::to_string(n);
                   });
                 }});
    f.push_back(Nested("bench", "seeds", &R::bench, &BenchSection::seeds));
    f.push_back(Nested("bench", "delta", &R::bench, &BenchSection::delta));
    f.push_back({"bench", "methods",
                 [](R& c, const std::string& v) {
                   c.bench.methods.clear();
                   for (const std::string& m : SplitList(v)) {
                     c.bench.methods.push_back(ParseMethod(m));
                   }
                 },
                 [](const R& c) {
                   return JoinList<Method>(c.bench.methods, MethodName);
                 }});

    f.push_back(Nested("dr", "n_scenarios", &R::dr, &DrOptions::n_scenarios));
    f.push_back(Nested("dr", "max_iters", &R::dr, &DrOptions::max_iters));
    f.push_back(Nested("dr", "step_size", &R::dr, &DrOptions::step_size));
    f.push_back(Nested("dr", "grad_tol", &R::dr, &DrOptions::grad_tol));
    f.push_back(Nested("dr", "divergence_patience", &R::dr,
                       &DrOptions::divergence_patience));

    f.push_back(Nested("rc", "n_scenarios", &R::rc, &RcOptions::n_scenarios));
    f.push_back(Nested("rc", "max_iters", &R::rc, &RcOptions::max_iters));
    f.push_back(Nested("rc", "step_size", &R::rc, &RcOptions::step_size));
    f.push_back(Nested("rc", "restarts", &R::rc, &RcOptions::restarts));
    f.push_back(Nested("rc", "stall_iters", &R::rc, &RcOptions::stall_iters));
    f.push_back(
        Nested("rc", "weight_decades", &R::rc, &RcOptions::weight_decades));

    using P = PendulumExperimentConfig;
    f.push_back(Nested2("pendulum", "m", &R::pendulum, &P::truth,
                        &PendulumParams::m));
    f.push_back(Nested2("pendulum", "l", &R::pendulum, &P::truth,
                        &PendulumParams::l));
    f.push_back(Nested2("pendulum", "g", &R::pendulum, &P::truth,
                        &PendulumParams::g));
    f.push_back({"pendulum", "traj_grid",
                 [](R& c, const std::string& v) {
                   c.pendulum.traj_grid = ParseIntList(v);
                 },
                 [](const R& c) {
                   return JoinList<int>(c.pendulum.traj_grid, [](const int& n) {
                     return std::to_string(n);
                   });
                 }});
    f.push_back(Nested("pendulum", "traj_length", &R::pendulum, &P::traj_length));
    f.push_back(
        Nested("pendulum", "episode_length", &R::pendulum, &P::episode_length));
    f.push_back(Nested("pendulum", "seeds", &R::pendulum, &P::seeds));
    f.push_back(
        Nested("pendulum", "radius_scale", &R::pendulum, &P::radius_scale));

    f.push_back(Nested2("cem", "horizon", &R::pendulum, &P::cem, &CemOptions::horizon));
    f.push_back(
        Nested2("cem", "population", &R::pendulum, &P::cem, &CemOptions::population));
    f.push_back(Nested2("cem", "elites", &R::pendulum, &P::cem, &CemOptions::elites));
    f.push_back(
        Nested2("cem", "iterations", &R::pendulum, &P::cem, &CemOptions::iterations));
    f.push_back(
        Nested2("cem", "init_std", &R::pendulum, &P::cem, &CemOptions::init_std));
    f.push_back(Nested2("cem", "model_samples", &R::pendulum, &P::cem,
                        &CemOptions::model_samples));
    f.push_back(Nested2("cem", "torque_limit", &R::pendulum, &P::cem,
                        &CemOptions::torque_limit));

    f.push_back(Nested("theory", "fisher_trajectories", &R::theory,
                       &TheorySection::fisher_trajectories));
    f.push_back(
        Nested("theory", "fd_rel_step", &R::theory, &TheorySection::fd_rel_step));
    f.push_back(
        Nested("theory", "instances", &R::theory, &TheorySection::instances));
    f.push_back(Nested("theory", "max_dim", &R::theory, &TheorySection::max_dim));
    f.push_back(Nested("theory", "perturbations", &R::theory,
                       &TheorySection::perturbations));
    return f;
  }();
  return fields;
}

}  // namespace

Eigen::MatrixXd ParseMatrix(const std::string& text) {
  std::string t = boost::algorithm::erase_all_copy(Trim(text), " ");
  double scale = 1.0;
  const std::size_t star = t.find("*eye(");
  if (star != std::string::npos) {
    scale = ParseScalar<double>(t.substr(0, star));
    t = t.substr(star + 1);
  }
  if (boost::algorithm::starts_with(t, "eye(") &&
      boost::algorithm::ends_with(t, ")")) {
    const int n = ParseScalar<int>(t.substr(4, t.size() - 5));
    if (n < 1) throw std::invalid_argument("eye(n) needs n >= 1");
    return scale * Eigen::MatrixXd::Identity(n, n);
  }

  std::vector<std::string> rows;
  boost::algorithm::split(rows, Trim(text), boost::is_any_of(";"));
  std::vector<std::vector<double>> values;
  for (const std::string& row : rows) {
    if (Trim(row).empty()) continue;
    std::vector<double> r;
    for (const std::string& v : SplitList(row)) r.push_back(ParseScalar<double>(v));
    if (!values.empty() && r.size() != values.front().size()) {
      throw std::invalid_argument("rows have different lengths");
    }
    values.push_back(std::move(r));
  }
  if (values.empty() || values.front().empty()) {
    throw std::invalid_argument("empty matrix");
  }
  Eigen::MatrixXd m(values.size(), values.front().size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < values[i].size(); ++j) m(i, j) = values[i][j];
  }
  return m;
}

std::string FormatMatrix(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += FormatDouble(m(i, j));
    }
  }
  return out;
}

RunConfig RunConfig::Defaults() {
  RunConfig c;
  c.system.A.resize(3, 3);
  c.system.A << 1.01, 0.01, 0.0, 0.01, 1.01, 0.01, 0.0, 0.01, 1.01;
  c.system.B = Eigen::MatrixXd::Identity(3, 3);
  c.system.Q = 1e-3 * Eigen::MatrixXd::Identity(3, 3);
  c.system.R = Eigen::MatrixXd::Identity(3, 3);
  c.system.noise_cov = Eigen::MatrixXd::Identity(3, 3);
  c.system.input_cov = Eigen::MatrixXd::Identity(3, 3);
  return c;
}

SystemParams RunConfig::theta_star() const {
  return SystemParams(system.A, system.B);
}

CostModel RunConfig::cost_model() const {
  return CostModel(system.Q, system.R, system.noise_cov);
}

SweepConfig RunConfig::sweep() const {
  SweepConfig s;
  s.theta_star = theta_star();
  s.cm = cost_model();
  s.n_grid = bench.n_grid;
  s.T = data.T;
  s.input_cov = system.input_cov;
  s.delta = bench.delta;
  s.methods = bench.methods;
  s.seeds = bench.seeds;
  s.master_seed = seed;
  s.noiseless = data.noiseless;
  s.dr = dr;
  s.rc = rc;
  return s;
}

void RunConfig::Validate() const {
  auto wrap = [](const std::string& field, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      throw ConfigError(field + ": " + e.what());
    }
  };
  wrap("system", [&] {
    theta_star();
    cost_model();
  });
  if (system.input_cov.rows() != system.B.cols() ||
      system.input_cov.cols() != system.B.cols() ||
      MinEigenvalue(system.input_cov) <= 0.0) {
    throw ConfigError("system.input_cov: must be du x du positive definite");
  }
  if (data.N < 1) throw ConfigError("data.N: must be >= 1");
  if (data.T < 1) throw ConfigError("data.T: must be >= 1");
  if (!(synth.delta > 0.0 && synth.delta < 1.0)) {
    throw ConfigError("synth.delta: must lie in (0, 1)");
  }
  if (synth.model != "estimate" && synth.model != "truth") {
    throw ConfigError("synth.model: must be 'estimate' or 'truth'");
  }
  wrap("bench", [&] { sweep().Validate(); });
  wrap("dr", [&] { dr.Validate(); });
  wrap("rc", [&] { rc.Validate(); });
  wrap("pendulum", [&] { pendulum.Validate(); });
  if (theory.fisher_trajectories < 1) {
    throw ConfigError("theory.fisher_trajectories: must be >= 1");
  }
  if (!(theory.fd_rel_step > 0.0)) {
    throw ConfigError("theory.fd_rel_step: must be positive");
  }
  if (theory.instances < 0 || theory.max_dim < 1 || theory.perturbations < 1) {
    throw ConfigError(
        "theory: instances >= 0, max_dim >= 1 and perturbations >= 1 required");
  }
  if (threads < 0) throw ConfigError("run.threads: must be >= 0");
  if (out.empty()) throw ConfigError("run.out: must not be empty");
}

RunConfig LoadConfig(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  std::map<std::string, const Field*> by_name;
  for (const Field& f : Schema()) by_name[f.section + "." + f.key] = &f;

  RunConfig cfg = RunConfig::Defaults();
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) {
      throw ConfigError(path + ": key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : entries) {
      const std::string name = section + "." + key;
      const auto it = by_name.find(name);
      if (it == by_name.end()) {
        throw ConfigError(path + ": unknown key '" + name + "'");
      }
      try {
        it->second->parse(cfg, value.data());
      } catch (const std::exception& e) {
        throw ConfigError(name + ": " + e.what());
      }
    }
  }
  cfg.Validate();
  return cfg;
}

void WriteConfig(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  std::string section;
  for (const Field& f : Schema()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.format(cfg) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace drlqr::cli
