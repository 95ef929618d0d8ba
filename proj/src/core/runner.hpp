// Copyright 2026 The pfmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "sampling.hpp"

namespace pfmc {

enum class ExperimentKind {
  Overlap,
  Correlator,
  Marginal,
  Binned,
  Rdm,
  HamiltonianElement,
  Wilson,
  QuenchSuite,
  HsParity,
  Extent,
  Envelope,
  Noci,
  AfqmcOverlap,
  OrbitalGradient,
};

const char* kind_name(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Overlap;
  nlohmann::json inputs;
  double eps = 0.05;
  double delta = 0.05;
  std::int64_t fixed_samples = 0;
  double max_samples = 1e10;
  std::uint64_t seed = 0;
  std::string output_path;  // empty selects a name from the config file
  nlohmann::json raw;       // the document as given
};

// Schema check of the top level; inputs are checked by prepare_experiment.
ExperimentConfig parse_experiment(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::string& path);

// Resolved config with seed and budget as used for the run.
nlohmann::json resolved_config(const ExperimentConfig& cfg);

struct ResultRow {
  std::string observable;
  std::string params;  // key=value pairs joined by ';'
  Estimate estimate;
  std::string method;  // aggregation, "oracle" or "formula"
  double wall_time = 0.0;
};

struct RunResult {
  std::vector<ResultRow> rows;
  nlohmann::json metadata;
};

// Builds every map, state and operator of the experiment without sampling,
// so all schema errors surface before any computation.
class PreparedExperiment {
 public:
  using Task = std::function<std::vector<ResultRow>(const SamplingOptions&)>;
  using OracleTask = std::function<std::vector<ResultRow>()>;

  explicit PreparedExperiment(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  std::size_t num_tasks() const { return tasks_.size(); }
  // Observables run in order; task k draws from seed stream k.
  RunResult run(int threads) const;
  // Brute-force statevector values on guard-sized inputs.
  RunResult oracle() const;

 private:
  ExperimentConfig cfg_;
  std::vector<Task> tasks_;
  std::vector<OracleTask> oracles_;
};

inline const char* const kCsvHeader =
    "observable,params,value_re,value_im,std_error,samples,bound,epsilon,delta,method,wall_time";

// CSV rows plus a JSON sidecar next to it (same stem, .json).
void write_result(const RunResult& r, const std::string& csv_path);
std::string result_csv(const RunResult& r);

// Tidy (x, y, yerr, series) table from a result CSV.
std::string plot_data(const std::string& result_csv_text, const nlohmann::json& spec);

const char* library_version();

}  // namespace pfmc
