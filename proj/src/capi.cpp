// Copyright 2026 The Unistab Authors
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

#include "unistab/unistab.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>

#include "unistab/bounds.hpp"
#include "unistab/convexopt.hpp"
#include "unistab/dp_prediction.hpp"
#include "unistab/harness.hpp"

struct us_config {
  unistab::harness::ExperimentConfig cfg;
};

struct us_report {
  unistab::harness::Table table;
};

namespace {

namespace h = unistab::harness;

thread_local std::string g_last_error;

us_status fail(us_status status, const char* what) {
  g_last_error = what;
  return status;
}

// Maps the exception in flight to a status code.
us_status translate() {
  try {
    throw;
  } catch (const h::ConfigError& e) {
    return fail(US_CONFIG_ERROR, e.what());
  } catch (const h::IoError& e) {
    return fail(US_IO_ERROR, e.what());
  } catch (const std::out_of_range& e) {
    return fail(US_OUT_OF_RANGE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(US_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(US_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(US_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(US_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(US_INTERNAL_ERROR, "unknown error");
  }
}

template <class F>
us_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return US_OK;
  } catch (...) {
    return translate();
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw std::invalid_argument(std::string(name) + " must not be null");
}

h::OutputFormat to_format(us_format f) {
  switch (f) {
    case US_FORMAT_CSV:
      return h::OutputFormat::kCsv;
    case US_FORMAT_JSON:
      return h::OutputFormat::kJson;
  }
  throw std::invalid_argument("unknown output format");
}

us_report* wrap(h::Table t) { return new us_report{std::move(t)}; }

}  // namespace

extern "C" {

US_API const char* us_version(void) { return "1.0.0"; }

US_API const char* us_last_error(void) { return g_last_error.c_str(); }

US_API void us_string_free(char* s) { std::free(s); }

US_API us_status us_bound_eval(us_bound_kind kind, double n, double range, double gamma,
                               double delta, double* value, int* valid) {
  return guarded([&] {
    require(value, "value");
    unistab::bounds::BoundParams p;
    p.n = n;
    p.R = range;
    p.gamma = gamma;
    p.delta = delta;
    unistab::bounds::BoundValue b;
    switch (kind) {
      case US_BOUND_BE02:
        b = unistab::bounds::be02_bound(p);
        break;
      case US_BOUND_FV18:
        b = unistab::bounds::fv18_bound(p);
        break;
      case US_BOUND_MAIN:
        b = unistab::bounds::main_bound(p);
        break;
      case US_BOUND_THM_LARGE:
        b = unistab::bounds::thm_large_gamma_bound(p);
        break;
      case US_BOUND_THM_SMALL:
        b = unistab::bounds::thm_small_gamma_bound(p);
        break;
      default:
        throw std::invalid_argument("unknown bound kind");
    }
    *value = b.value;
    if (valid != nullptr) *valid = b.valid ? 1 : 0;
  });
}

US_API us_status us_mcdiarmid_tail(double n, double gamma, double t, double* value) {
  return guarded([&] {
    require(value, "value");
    *value = unistab::bounds::mcdiarmid_tail(n, gamma, t);
  });
}

US_API us_status us_dp_generalization_bound(double n, double epsilon, double delta, double* value,
                                            int* valid) {
  return guarded([&] {
    require(value, "value");
    const unistab::bounds::BoundValue b = unistab::dp::dp_generalization_bound(n, epsilon, delta);
    *value = b.value;
    if (valid != nullptr) *valid = b.valid ? 1 : 0;
  });
}

US_API us_status us_replacement_rate_tail(size_t steps, size_t k, size_t n, double eta,
                                          double beta, double* value) {
  return guarded([&] {
    require(value, "value");
    *value = unistab::convexopt::replacement_rate_tail(steps, k, n, eta, beta);
  });
}

US_API us_status us_config_create(us_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new us_config{};
  });
}

US_API us_status us_config_from_json(const char* json, us_config** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new us_config{h::ExperimentConfig::from_json(json)};
  });
}

US_API us_status us_config_load(const char* path, us_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new us_config{h::ExperimentConfig::load(path)};
  });
}

US_API us_status us_config_merge_json(us_config* cfg, const char* json) {
  return guarded([&] {
    require(cfg, "config");
    require(json, "json");
    // Merge into a copy so a rejected key leaves the config untouched.
    h::ExperimentConfig next = cfg->cfg;
    next.merge_json(json);
    cfg->cfg = std::move(next);
  });
}

US_API us_status us_config_to_json(const us_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = copy_string(cfg->cfg.to_json());
  });
}

US_API void us_config_free(us_config* cfg) { delete cfg; }

US_API us_status us_run_bounds(const us_config* cfg, us_report** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = wrap(h::bound_table_report(cfg->cfg));
  });
}

US_API us_status us_run_tail(const us_config* cfg, us_report** out, size_t* violations) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    const h::TailReport r = h::run_tail_experiment(cfg->cfg);
    if (violations != nullptr) *violations = r.soundness_violations();
    *out = wrap(r.to_table());
  });
}

US_API us_status us_run_excess(const us_config* cfg, us_report** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = wrap(h::run_excess_experiment(cfg->cfg).to_table());
  });
}

US_API us_status us_run_clamp_audit(const us_config* cfg, us_report** out, size_t* violations) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    const h::ClampAuditSummary s = h::run_clamp_audit(cfg->cfg.instances, cfg->cfg.seed);
    if (violations != nullptr) *violations = s.failures;
    *out = wrap(s.to_table());
  });
}

US_API us_status us_run_stability_audit(const us_config* cfg, us_report** out,
                                        size_t* violations) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    const h::AuditReport r = h::run_stability_audits(cfg->cfg.trials, cfg->cfg.seed);
    if (violations != nullptr) *violations = r.violations();
    *out = wrap(r.to_table());
  });
}

US_API size_t us_report_rows(const us_report* r) { return r == nullptr ? 0 : r->table.rows.size(); }

US_API size_t us_report_columns(const us_report* r) {
  return r == nullptr ? 0 : r->table.columns.size();
}

US_API const char* us_report_column_name(const us_report* r, size_t col) {
  if (r == nullptr || col >= r->table.columns.size()) return nullptr;
  return r->table.columns[col].name.c_str();
}

US_API us_status us_report_get_double(const us_report* r, size_t row, size_t col, double* value) {
  return guarded([&] {
    require(r, "report");
    require(value, "value");
    if (row >= r->table.rows.size() || col >= r->table.columns.size()) {
      throw std::out_of_range("report cell index out of range");
    }
    const h::Cell& c = r->table.rows[row][col];
    if (const auto* d = std::get_if<double>(&c)) {
      *value = *d;
    } else if (const auto* u = std::get_if<std::uint64_t>(&c)) {
      *value = static_cast<double>(*u);
    } else if (const auto* b = std::get_if<bool>(&c)) {
      *value = *b ? 1.0 : 0.0;
    } else {
      throw std::invalid_argument("column '" + r->table.columns[col].name + "' is not numeric");
    }
  });
}

US_API us_status us_report_to_string(const us_report* r, us_format format, char** out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    *out = copy_string(h::to_string(r->table, to_format(format)));
  });
}

US_API us_status us_report_write(const us_report* r, us_format format, const char* path) {
  return guarded([&] {
    require(r, "report");
    h::emit(r->table, to_format(format), path == nullptr ? std::string() : std::string(path));
  });
}

US_API void us_report_free(us_report* r) { delete r; }

}  // extern "C"
