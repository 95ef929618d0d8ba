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

// Command-line front end; talks to the library only through the C API.
#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "pfmc/pfmc.h"

namespace fs = std::filesystem;

namespace {

int report(pfmc_status s) {
  std::cerr << "pfmc: " << pfmc_last_error() << "\n";
  switch (s) {
    case PFMC_ERR_VALIDATION:
    case PFMC_ERR_ARGUMENT:
      return 2;
    case PFMC_ERR_CAPACITY:
      return 3;
    default:
      return 1;
  }
}

struct Experiment {
  pfmc_experiment* e = nullptr;
  ~Experiment() { pfmc_experiment_free(e); }
};

struct Result {
  pfmc_result* r = nullptr;
  ~Result() { pfmc_result_free(r); }
};

// --out DIR wins; then output_path from the config; then <config stem>.csv.
std::string output_file(const pfmc_experiment* e, const std::string& config, const std::string& out_dir,
                        const std::string& suffix) {
  const char* cfg_path = pfmc_experiment_output_path(e);
  fs::path target = cfg_path ? fs::path(cfg_path) : fs::path(fs::path(config).stem().string() + ".csv");
  if (!suffix.empty()) target.replace_filename(target.stem().string() + suffix + target.extension().string());
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    target = fs::path(out_dir) / target.filename();
  }
  return target.string();
}

void print_rows(const pfmc_result* r) {
  for (std::size_t k = 0; k < pfmc_result_num_rows(r); ++k) {
    pfmc_row row;
    if (pfmc_result_row(r, k, &row) != PFMC_OK) continue;
    std::printf("%-12s %-24s %+.6f %+.6fi  +/- %.2e  K=%lld\n", row.observable, row.params, row.value_re,
                row.value_im, row.std_error, static_cast<long long>(row.samples));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-Pfaffian Monte Carlo for APSG states under fermionic linear optics"};
  app.set_version_flag("--version", std::string(pfmc_version()));
  app.require_subcommand(1);

  std::string config, out_dir, result_csv, plotspec;
  std::optional<std::uint64_t> seed;
  int threads = 0;

  auto* run = app.add_subcommand("run", "Run an experiment and write CSV plus JSON sidecar");
  run->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--threads", threads, "Worker threads (default: PFMC_THREADS, else 1)")->check(CLI::NonNegativeNumber);
  run->add_option("--out", out_dir, "Output directory");

  auto* validate = app.add_subcommand("validate", "Check a config without computing");
  validate->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* oracle = app.add_subcommand("oracle", "Brute-force statevector values on guard-sized inputs");
  oracle->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  oracle->add_option("--out", out_dir, "Output directory");

  auto* plot = app.add_subcommand("plotdata", "Reshape a result CSV into tidy x,y,yerr,series rows");
  plot->add_option("result", result_csv, "Result CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("plotspec", plotspec, "Plot spec (JSON)")->required()->check(CLI::ExistingFile);
  std::string plot_out;
  plot->add_option("--out", plot_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (plot->parsed()) {
    char* text = nullptr;
    if (pfmc_status s = pfmc_plotdata(result_csv.c_str(), plotspec.c_str(), &text); s != PFMC_OK) return report(s);
    if (plot_out.empty()) {
      std::cout << text;
    } else {
      FILE* f = std::fopen(plot_out.c_str(), "w");
      if (!f) {
        pfmc_string_free(text);
        std::cerr << "pfmc: cannot write '" << plot_out << "'\n";
        return 1;
      }
      std::fputs(text, f);
      std::fclose(f);
    }
    pfmc_string_free(text);
    return 0;
  }

  Experiment exp;
  if (pfmc_status s = pfmc_experiment_from_file(config.c_str(), &exp.e); s != PFMC_OK) return report(s);
  if (validate->parsed()) {
    std::cout << "valid: " << config << "\n";
    return 0;
  }
  if (seed)
    if (pfmc_status s = pfmc_experiment_set_seed(exp.e, *seed); s != PFMC_OK) return report(s);
  if (pfmc_status s = pfmc_experiment_set_threads(exp.e, threads); s != PFMC_OK) return report(s);

  Result res;
  const bool is_oracle = oracle->parsed();
  pfmc_status s = is_oracle ? pfmc_oracle(exp.e, &res.r) : pfmc_run(exp.e, &res.r);
  if (s != PFMC_OK) return report(s);
  std::string path;
  try {
    path = output_file(exp.e, config, out_dir, is_oracle ? "_oracle" : "");
  } catch (const fs::filesystem_error& e) {
    std::cerr << "pfmc: " << e.what() << "\n";
    return 1;
  }
  if (pfmc_status w = pfmc_result_write(res.r, path.c_str()); w != PFMC_OK) return report(w);
  print_rows(res.r);
  std::cout << "wrote " << path << "\n";
  return 0;
}
