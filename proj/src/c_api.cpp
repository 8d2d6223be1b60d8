#include "tess/tess.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "tess/commands.hpp"
#include "tess/error.hpp"
#include "tess/inference.hpp"
#include "tess/reference.hpp"
#include "tess/score.hpp"

struct tess_dataset {
  tess::LoadedData data;
};

struct tess_options {
  tess::RunOptions opts;
};

struct tess_report {
  tess::RunReport report;
  std::string json;
  std::string summary;
  double wall_seconds = 0.0;
};

namespace {

thread_local std::string last_error;

tess_status to_status(tess::ErrorCode code) {
  switch (code) {
    case tess::ErrorCode::invalid_argument: return TESS_ERR_INVALID;
    case tess::ErrorCode::io: return TESS_ERR_IO;
    case tess::ErrorCode::parse: return TESS_ERR_PARSE;
    case tess::ErrorCode::degenerate: return TESS_ERR_DEGENERATE;
    case tess::ErrorCode::limit_exceeded: return TESS_ERR_LIMIT;
    case tess::ErrorCode::internal: return TESS_ERR_INTERNAL;
  }
  return TESS_ERR_INTERNAL;
}

template <typename F>
tess_status guard(F&& body) noexcept {
  try {
    last_error.clear();
    body();
    return TESS_OK;
  } catch (const tess::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return TESS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TESS_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return TESS_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) tess::fail(tess::ErrorCode::invalid_argument, std::string(name) + " is NULL");
}

}  // namespace

extern "C" {

const char* tess_version(void) { return tess::kVersion.data(); }

const char* tess_status_string(tess_status status) {
  switch (status) {
    case TESS_OK: return "ok";
    case TESS_ERR_INVALID: return "invalid argument";
    case TESS_ERR_IO: return "i/o error";
    case TESS_ERR_PARSE: return "parse error";
    case TESS_ERR_DEGENERATE: return "degenerate data";
    case TESS_ERR_LIMIT: return "limit exceeded";
    case TESS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* tess_last_error(void) { return last_error.c_str(); }

tess_status tess_dataset_load_csv(const char* path, const char* outcome, const char* treatment,
                                  const char* covariates, tess_dataset** out) {
  return guard([&] {
    require(path, "path");
    require(outcome, "outcome");
    require(treatment, "treatment");
    require(out, "out");
    *out = nullptr;
    tess::RunOptions tmp;
    if (covariates != nullptr) tess::set_option(tmp, "covariates", covariates);
    auto ds = std::make_unique<tess_dataset>();
    ds->data = tess::load_csv(path, {outcome, treatment, tmp.covariates});
    *out = ds.release();
  });
}

tess_status tess_dataset_from_arrays(size_t records, size_t dims, const double* outcome,
                                     const int* treated, const uint32_t* x, const size_t* arities,
                                     tess_dataset** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    if (records == 0 || dims == 0) {
      tess::fail(tess::ErrorCode::invalid_argument, "records and dims must be positive");
    }
    require(outcome, "outcome");
    require(treated, "treated");
    require(x, "x");
    require(arities, "arities");
    auto ds = std::make_unique<tess_dataset>();
    ds->data.schema = tess::CovariateSchema::synthetic(std::span<const size_t>(arities, dims));
    ds->data.records.resize(records);
    for (size_t i = 0; i < records; ++i) {
      auto& r = ds->data.records[i];
      r.outcome = outcome[i];
      if (treated[i] != 0 && treated[i] != 1) {
        tess::fail(tess::ErrorCode::invalid_argument,
                   "treated[" + std::to_string(i) + "] is not 0 or 1");
      }
      r.treated = treated[i] == 1;
      r.profile.assign(x + i * dims, x + (i + 1) * dims);
      for (size_t j = 0; j < dims; ++j) {
        if (r.profile[j] >= arities[j]) {
          tess::fail(tess::ErrorCode::invalid_argument,
                     "x[" + std::to_string(i) + "][" + std::to_string(j) + "] out of range");
        }
      }
    }
    *out = ds.release();
  });
}

tess_status tess_dataset_counts(const tess_dataset* ds, size_t* records, size_t* dims) {
  return guard([&] {
    require(ds, "dataset");
    if (records) *records = ds->data.records.size();
    if (dims) *dims = ds->data.schema.dims();
  });
}

void tess_dataset_free(tess_dataset* ds) { delete ds; }

tess_status tess_options_create(tess_options** out) {
  return guard([&] {
    require(out, "out");
    *out = new tess_options{};
  });
}

tess_status tess_options_set(tess_options* opts, const char* key, const char* value) {
  return guard([&] {
    require(opts, "options");
    require(key, "key");
    require(value, "value");
    tess::set_option(opts->opts, key, value);
  });
}

tess_status tess_options_get(const tess_options* opts, const char* key, char* buf,
                             size_t buf_size, size_t* needed) {
  return guard([&] {
    require(opts, "options");
    require(key, "key");
    const auto value = tess::get_option(opts->opts, key);
    if (needed) *needed = value.size() + 1;
    if (buf != nullptr && buf_size > 0) {
      const size_t n = std::min(value.size(), buf_size - 1);
      std::memcpy(buf, value.data(), n);
      buf[n] = '\0';
    }
  });
}

void tess_options_free(tess_options* opts) { delete opts; }

tess_status tess_run(const char* command, const tess_options* opts, const tess_dataset* ds,
                     tess_report** out) {
  return guard([&] {
    require(command, "command");
    require(opts, "options");
    require(out, "out");
    *out = nullptr;
    std::optional<tess::LoadedData> data;
    if (ds != nullptr) data = ds->data;
    auto result = tess::run_command(command, opts->opts, data);
    auto r = std::make_unique<tess_report>();
    r->json = tess::to_json(result.report);
    r->summary = tess::summarize(result.report, result.wall_seconds);
    r->wall_seconds = result.wall_seconds;
    r->report = std::move(result.report);
    *out = r.release();
  });
}

const char* tess_report_json(const tess_report* r) { return r ? r->json.c_str() : ""; }

const char* tess_report_summary(const tess_report* r) { return r ? r->summary.c_str() : ""; }

double tess_report_wall_seconds(const tess_report* r) { return r ? r->wall_seconds : 0.0; }

tess_status tess_report_scan(const tess_report* r, double* score, double* alpha, double* n_alpha,
                             double* n_total) {
  return guard([&] {
    require(r, "report");
    if (!r->report.scan) tess::fail(tess::ErrorCode::invalid_argument, "report has no scan result");
    const auto& s = *r->report.scan;
    if (score) *score = s.score;
    if (alpha) *alpha = s.alpha;
    if (n_alpha) *n_alpha = s.n_alpha;
    if (n_total) *n_total = s.n_total;
  });
}

tess_status tess_report_p_value(const tess_report* r, double* p_value) {
  return guard([&] {
    require(r, "report");
    require(p_value, "p_value");
    if (!r->report.permutation) {
      tess::fail(tess::ErrorCode::invalid_argument, "report has no permutation result");
    }
    *p_value = r->report.permutation->p_value;
  });
}

void tess_report_free(tess_report* r) { delete r; }

tess_status tess_p_value_range(const double* controls, size_t n_controls, double y,
                               tess_sidedness sided, double* p_min, double* p_max) {
  return guard([&] {
    require(p_min, "p_min");
    require(p_max, "p_max");
    if (n_controls > 0) require(controls, "controls");
    if (sided < TESS_SIDED_UPPER || sided > TESS_SIDED_TWO) {
      tess::fail(tess::ErrorCode::invalid_argument, "unknown sidedness");
    }
    const tess::ReferenceDistribution ref(std::vector<double>(controls, controls + n_controls));
    const auto range = tess::p_value_range(ref, y, static_cast<tess::Sidedness>(sided));
    *p_min = range.p_min;
    *p_max = range.p_max;
  });
}

tess_status tess_significance_mass(double p_min, double p_max, double alpha, double* out) {
  return guard([&] {
    require(out, "out");
    if (!(p_min >= 0.0 && p_min < p_max && p_max <= 1.0)) {
      tess::fail(tess::ErrorCode::invalid_argument, "range must satisfy 0 <= p_min < p_max <= 1");
    }
    *out = tess::significance_mass({p_min, p_max}, alpha);
  });
}

tess_status tess_score(tess_score_kind kind, int symmetric, double n_alpha, double n_total,
                       double alpha, double* out) {
  return guard([&] {
    require(out, "out");
    if (kind < TESS_SCORE_BJ || kind > TESS_SCORE_AD) {
      tess::fail(tess::ErrorCode::invalid_argument, "unknown score kind");
    }
    if (!(n_total >= 0.0 && n_alpha >= 0.0 && n_alpha <= n_total)) {
      tess::fail(tess::ErrorCode::invalid_argument, "counts must satisfy 0 <= n_alpha <= n_total");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
      tess::fail(tess::ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
    }
    const tess::ScoreFunction f{static_cast<tess::ScoreKind>(kind), symmetric != 0};
    *out = f(n_alpha, n_total, alpha);
  });
}

tess_status tess_theory_constant(double* c, double* argmax_z) {
  return guard([&] {
    const auto t = tess::theory_constant();
    if (c) *c = t.c;
    if (argmax_z) *argmax_z = t.argmax_z;
  });
}

tess_status tess_critical_value(size_t cells, double epsilon, double* out) {
  return guard([&] {
    require(out, "out");
    *out = tess::critical_value(cells, epsilon);
  });
}

}  // extern "C"
