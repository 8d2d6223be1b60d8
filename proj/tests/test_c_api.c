/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "tess/tess.h"

static int failures = 0;

#define EXPECT(cond)                                                    \
  do {                                                                  \
    if (!(cond)) {                                                      \
      fprintf(stderr, "%s:%d: expectation failed: %s\n", __FILE__,      \
              __LINE__, #cond);                                         \
      ++failures;                                                       \
    }                                                                   \
  } while (0)

static int near(double a, double b, double tol) { return fabs(a - b) <= tol; }

static void pure_functions(void) {
  const double controls[] = {4.0, 2.0, 1.0, 3.0};
  double lo = -1, hi = -1, mass = -1, s = -1, c = 0, z = 0, h = 0;
  EXPECT(tess_p_value_range(controls, 4, 3.5, TESS_SIDED_UPPER, &lo, &hi) == TESS_OK);
  EXPECT(lo == 0.2 && hi == 0.4);
  EXPECT(tess_p_value_range(controls, 0, 3.5, TESS_SIDED_UPPER, &lo, &hi) == TESS_ERR_INVALID);
  EXPECT(strlen(tess_last_error()) > 0);
  EXPECT(tess_p_value_range(controls, 4, 1.0, (tess_sidedness)7, &lo, &hi) == TESS_ERR_INVALID);

  EXPECT(tess_significance_mass(0.2, 0.4, 0.3, &mass) == TESS_OK);
  EXPECT(near(mass, 0.5, 1e-15));
  EXPECT(tess_significance_mass(0.4, 0.2, 0.3, &mass) == TESS_ERR_INVALID);

  EXPECT(tess_score(TESS_SCORE_NA, 0, 5, 10, 0.1, &s) == TESS_OK);
  EXPECT(near(s, 16.0 / 1.8, 1e-12));
  EXPECT(tess_score(TESS_SCORE_BJ, 0, 10, 10, 0.1, &s) == TESS_OK);
  EXPECT(near(s, 10 * log(10.0), 1e-12));
  EXPECT(tess_score(TESS_SCORE_NA, 0, 0, 10, 0.1, &s) == TESS_OK && s == 0.0);
  EXPECT(tess_score(TESS_SCORE_NA, 1, 0, 10, 0.1, &s) == TESS_OK && near(s, 1.0 / 1.8, 1e-12));
  EXPECT(tess_score(TESS_SCORE_AD, 0, 5, 10, 0.1, &s) == TESS_OK);
  EXPECT(near(s, 2 * 16.0 / 1.8, 1e-12));
  EXPECT(tess_score((tess_score_kind)42, 0, 5, 10, 0.1, &s) == TESS_ERR_INVALID);
  EXPECT(tess_score(TESS_SCORE_NA, 0, 11, 10, 0.1, &s) == TESS_ERR_INVALID);

  EXPECT(tess_theory_constant(&c, &z) == TESS_OK);
  EXPECT(fabs(c - 0.202) <= 0.001);
  EXPECT(near(z, 0.612, 1e-3));
  EXPECT(tess_critical_value(100, 1.0, &h) == TESS_OK);
  EXPECT(near(h, 100 * c + 1.0, 1e-12));
  EXPECT(tess_critical_value(0, 1.0, &h) == TESS_ERR_INVALID);
  EXPECT(tess_critical_value(10, 1.0, NULL) == TESS_ERR_INVALID);
}

static void status_strings(void) {
  EXPECT(strcmp(tess_version(), "1.0.0") == 0);
  EXPECT(strlen(tess_status_string(TESS_OK)) > 0);
  EXPECT(strcmp(tess_status_string(TESS_ERR_LIMIT), tess_status_string(TESS_ERR_PARSE)) != 0);
  EXPECT(strlen(tess_status_string((tess_status)99)) > 0);
}

static void options(void) {
  tess_options* o = NULL;
  char buf[64];
  size_t needed = 0;
  EXPECT(tess_options_create(&o) == TESS_OK);
  EXPECT(tess_options_get(o, "restarts", buf, sizeof buf, &needed) == TESS_OK);
  EXPECT(strcmp(buf, "50") == 0 && needed == 3);
  EXPECT(tess_options_set(o, "alpha-max", "0.25") == TESS_OK);
  EXPECT(tess_options_get(o, "alpha-max", buf, sizeof buf, &needed) == TESS_OK);
  EXPECT(strcmp(buf, "0.25") == 0);
  EXPECT(tess_options_get(o, "alpha-max", buf, 2, &needed) == TESS_OK);
  EXPECT(strcmp(buf, "0") == 0 && needed == 5);
  EXPECT(tess_options_set(o, "restarts", "many") == TESS_ERR_INVALID);
  EXPECT(strstr(tess_last_error(), "restarts") != NULL);
  EXPECT(tess_options_set(o, "no-such-option", "1") == TESS_ERR_INVALID);
  EXPECT(tess_options_set(NULL, "seed", "1") == TESS_ERR_INVALID);
  tess_options_free(o);
  tess_options_free(NULL);
}

static void runs(const char* data_dir) {
  char path[1024];
  tess_dataset* ds = NULL;
  tess_options* o = NULL;
  tess_report* r = NULL;
  size_t records = 0, dims = 0;
  double score = -1, alpha = 0, na = 0, n = 0, p = 0;

  snprintf(path, sizeof path, "%s/two_by_two.csv", data_dir);
  EXPECT(tess_dataset_load_csv(path, "y", "w", NULL, &ds) == TESS_OK);
  EXPECT(tess_dataset_counts(ds, &records, &dims) == TESS_OK);
  EXPECT(records == 8 && dims == 2);
  tess_dataset_free(ds);
  ds = NULL;

  EXPECT(tess_dataset_load_csv("/nonexistent.csv", "y", "w", "", &ds) == TESS_ERR_IO);
  EXPECT(ds == NULL);
  EXPECT(tess_dataset_load_csv(path, "outcome", "w", "", &ds) == TESS_ERR_INVALID);

  /* Two cells; value 0 carries a shift of 3 in the treated arm. */
  {
    enum { N = 400 };
    double y[N];
    int t[N];
    uint32_t x[N];
    const size_t arity = 2;
    unsigned state = 12345u;
    for (int i = 0; i < N; ++i) {
      state = state * 1103515245u + 12345u;
      y[i] = (double)(state >> 16 & 0x7fff) / 32768.0;
      t[i] = i % 2;
      x[i] = (uint32_t)((i / 2) % 2);
      if (t[i] && x[i] == 0) y[i] += 3.0;
    }
    EXPECT(tess_dataset_from_arrays(N, 1, y, t, x, &arity, &ds) == TESS_OK);
    {
      tess_dataset* bad = NULL;
      x[0] = 5;
      EXPECT(tess_dataset_from_arrays(N, 1, y, t, x, &arity, &bad) == TESS_ERR_INVALID);
      EXPECT(bad == NULL && strstr(tess_last_error(), "x[0][0]") != NULL);
    }
  }

  EXPECT(tess_options_create(&o) == TESS_OK);
  EXPECT(tess_options_set(o, "restarts", "5") == TESS_OK);
  EXPECT(tess_options_set(o, "permutations", "19") == TESS_OK);
  EXPECT(tess_options_set(o, "sided", "upper") == TESS_OK);
  EXPECT(tess_run("permtest", o, ds, &r) == TESS_OK);
  EXPECT(tess_report_scan(r, &score, &alpha, &na, &n) == TESS_OK);
  EXPECT(score > 0.0 && n == 100.0);
  EXPECT(tess_report_p_value(r, &p) == TESS_OK);
  EXPECT(near(p, 0.05, 1e-12));
  EXPECT(strstr(tess_report_json(r), "\"schema_version\": 1") != NULL);
  EXPECT(strlen(tess_report_summary(r)) > 0);
  EXPECT(tess_report_wall_seconds(r) >= 0.0);
  tess_report_free(r);
  r = NULL;

  EXPECT(tess_run("theory", o, NULL, &r) == TESS_OK);
  EXPECT(tess_report_scan(r, &score, &alpha, &na, &n) == TESS_ERR_INVALID);
  tess_report_free(r);
  r = NULL;

  EXPECT(tess_run("scan", o, NULL, &r) == TESS_ERR_INVALID);
  EXPECT(r == NULL);
  EXPECT(tess_run("nonsense", o, ds, &r) == TESS_ERR_INVALID);
  EXPECT(tess_options_set(o, "modes", "7") == TESS_OK);
  EXPECT(tess_options_set(o, "arity", "6") == TESS_OK);
  EXPECT(tess_run("oracle-check", o, NULL, &r) == TESS_ERR_LIMIT);
  tess_options_free(o);
  tess_dataset_free(ds);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: %s DATA_DIR\n", argv[0]);
    return 2;
  }
  status_strings();
  pure_functions();
  options();
  runs(argv[1]);
  if (failures) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  printf("all C API checks passed\n");
  return 0;
}
