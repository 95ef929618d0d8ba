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

#include "pfmc/pfmc.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "pfaffian.hpp"
#include "runner.hpp"

struct pfmc_experiment {
  std::optional<pfmc::PreparedExperiment> prepared;
  int threads = 0;
};

struct pfmc_result {
  pfmc::RunResult result;
};

namespace {

thread_local std::string g_last_error;

pfmc_status fail(pfmc_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps C++ exceptions onto status codes.
template <class F>
pfmc_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const pfmc::ValidationError& e) {
    return fail(PFMC_ERR_VALIDATION, e.what());
  } catch (const pfmc::CapacityError& e) {
    return fail(PFMC_ERR_CAPACITY, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PFMC_ERR_CAPACITY, "out of memory");
  } catch (const std::exception& e) {
    return fail(PFMC_ERR_INTERNAL, e.what());
  }
}

pfmc_status make_experiment(pfmc::ExperimentConfig cfg, pfmc_experiment** out) {
  auto* e = new pfmc_experiment;
  try {
    e->prepared.emplace(std::move(cfg));
  } catch (...) {
    delete e;
    throw;
  }
  *out = e;
  return PFMC_OK;
}

char* copy_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* pfmc_version(void) { return pfmc::library_version(); }

const char* pfmc_last_error(void) { return g_last_error.c_str(); }

pfmc_status pfmc_experiment_from_json(const char* json_text, pfmc_experiment** out) {
  if (!json_text || !out) return fail(PFMC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      throw pfmc::ValidationError(std::string("config: ") + e.what());
    }
    return make_experiment(pfmc::parse_experiment(j), out);
  });
}

pfmc_status pfmc_experiment_from_file(const char* path, pfmc_experiment** out) {
  if (!path || !out) return fail(PFMC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path);
    if (!in) return fail(PFMC_ERR_IO, std::string("cannot open '") + path + "'");
    return make_experiment(pfmc::load_experiment(path), out);
  });
}

void pfmc_experiment_free(pfmc_experiment* e) { delete e; }

pfmc_status pfmc_experiment_set_seed(pfmc_experiment* e, uint64_t seed) {
  if (!e) return fail(PFMC_ERR_ARGUMENT, "null experiment");
  return guarded([&] {
    pfmc::ExperimentConfig cfg = e->prepared->config();
    cfg.seed = seed;
    e->prepared.emplace(std::move(cfg));
    return PFMC_OK;
  });
}

pfmc_status pfmc_experiment_set_threads(pfmc_experiment* e, int threads) {
  if (!e) return fail(PFMC_ERR_ARGUMENT, "null experiment");
  if (threads < 0) return fail(PFMC_ERR_ARGUMENT, "thread count must be >= 0");
  e->threads = threads;
  g_last_error.clear();
  return PFMC_OK;
}

const char* pfmc_experiment_output_path(const pfmc_experiment* e) {
  if (!e || e->prepared->config().output_path.empty()) return nullptr;
  return e->prepared->config().output_path.c_str();
}

pfmc_status pfmc_run(const pfmc_experiment* e, pfmc_result** out) {
  if (!e || !out) return fail(PFMC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pfmc_result{e->prepared->run(pfmc::resolve_threads(e->threads))};
    return PFMC_OK;
  });
}

pfmc_status pfmc_oracle(const pfmc_experiment* e, pfmc_result** out) {
  if (!e || !out) return fail(PFMC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pfmc_result{e->prepared->oracle()};
    return PFMC_OK;
  });
}

size_t pfmc_result_num_rows(const pfmc_result* r) { return r ? r->result.rows.size() : 0; }

pfmc_status pfmc_result_row(const pfmc_result* r, size_t index, pfmc_row* out) {
  if (!r || !out) return fail(PFMC_ERR_ARGUMENT, "null argument");
  if (index >= r->result.rows.size()) return fail(PFMC_ERR_ARGUMENT, "row index out of range");
  const auto& row = r->result.rows[index];
  const auto& e = row.estimate;
  *out = {row.observable.c_str(), row.params.c_str(), e.value.real(), e.value.imag(), e.std_error, e.samples,
          e.bound, e.epsilon, e.delta, e.certified ? 1 : 0, row.method.c_str(), row.wall_time};
  g_last_error.clear();
  return PFMC_OK;
}

pfmc_status pfmc_result_write(const pfmc_result* r, const char* csv_path) {
  if (!r || !csv_path) return fail(PFMC_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    try {
      pfmc::write_result(r->result, csv_path);
    } catch (const std::runtime_error& e) {
      return fail(PFMC_ERR_IO, e.what());
    }
    return PFMC_OK;
  });
}

void pfmc_result_free(pfmc_result* r) { delete r; }

pfmc_status pfmc_plotdata(const char* result_csv_path, const char* plotspec_path, char** out) {
  if (!result_csv_path || !plotspec_path || !out) return fail(PFMC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::ifstream csv(result_csv_path), spec(plotspec_path);
    if (!csv) return fail(PFMC_ERR_IO, std::string("cannot open '") + result_csv_path + "'");
    if (!spec) return fail(PFMC_ERR_IO, std::string("cannot open '") + plotspec_path + "'");
    std::stringstream text;
    text << csv.rdbuf();
    nlohmann::json j;
    try {
      spec >> j;
    } catch (const nlohmann::json::exception& e) {
      throw pfmc::ValidationError(std::string("plotspec: ") + e.what());
    }
    *out = copy_string(pfmc::plot_data(text.str(), j));
    return PFMC_OK;
  });
}

void pfmc_string_free(char* s) { std::free(s); }

pfmc_status pfmc_pfaffian(size_t n, const double* re_im, double out[2]) {
  if ((!re_im && n) || !out) return fail(PFMC_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const int m = static_cast<int>(n);
    pfmc::MatrixXcd a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = pfmc::cd(re_im[2 * (i * n + j)], re_im[2 * (i * n + j) + 1]);
    pfmc::cd p = pfmc::pfaffian(a);
    out[0] = p.real();
    out[1] = p.imag();
    return PFMC_OK;
  });
}

}  // extern "C"
