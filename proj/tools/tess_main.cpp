// tess command-line interface. Links only the C API.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tess/tess.h"

namespace {

struct Flag {
  const char* key;
  const char* help;
  bool boolean = false;
};

// Flags shared by the subcommands that use them. Defaults come from the library.
const std::vector<Flag> kScanFlags = {
    {"score", "score function: bj, na, ks, cvm, hc, ad"},
    {"symmetric", "also score deficits of significant p-values", true},
    {"sided", "p-value sidedness: upper, lower, two"},
    {"alpha-min", "lower end of the alpha window"},
    {"alpha-max", "upper end of the alpha window"},
    {"restarts", "random restarts of the ordinal ascent"},
    {"max-cycles", "cap on ascent cycles per restart"},
    {"inclusion-prob", "probability a value is kept in a random start"},
    {"include-orphan-treated", "keep treated units without controls, with range (0, 1]", true},
    {"thin-controls", "control count below which a cell is reported as thin"},
};
const std::vector<Flag> kInputFlags = {
    {"input", "CSV file with a header row"},
    {"outcome", "outcome column"},
    {"treatment", "treatment column (values 0/1)"},
    {"covariates", "comma-separated covariate columns (default: all other columns)"},
};
const std::vector<Flag> kSimFlags = {
    {"effect", "effect magnitude of f1"},
    {"num-covs", "covariates restricted in the affected subpopulation"},
    {"value-prob", "probability each value of a restricted covariate is affected"},
    {"alternative", "f1 family: mean_shift or mixture"},
    {"records", "records in the synthetic base (ignored with --input)"},
    {"arities", "comma-separated covariate arities of the synthetic base"},
    {"treat-prob", "treatment probability in the synthetic base"},
};

std::string default_of(const char* key) {
  tess_options* o = nullptr;
  if (tess_options_create(&o) != TESS_OK) return {};
  size_t needed = 0;
  tess_options_get(o, key, nullptr, 0, &needed);
  std::string value(needed, '\0');
  tess_options_get(o, key, value.data(), value.size(), &needed);
  tess_options_free(o);
  value.resize(needed > 0 ? needed - 1 : 0);
  return value;
}

struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::string report = "-";
};

void add_flags(Command& cmd, const std::vector<Flag>& flags) {
  for (const auto& f : flags) {
    if (f.boolean) {
      cmd.switches[f.key] = false;
      cmd.app->add_flag(std::string("--") + f.key, cmd.switches[f.key], f.help);
    } else {
      const auto def = default_of(f.key);
      auto* opt = cmd.app->add_option(std::string("--") + f.key, cmd.values[f.key], f.help);
      if (!def.empty()) opt->default_str(def);
    }
  }
}

void add_common(Command& cmd) {
  add_flags(cmd, {{"seed", "master random seed"},
                  {"threads", "worker thread cap"}});
  cmd.app->get_option("--seed")->envname("TESS_SEED");
  cmd.app->get_option("--threads")->envname("TESS_THREADS");
  cmd.app->add_option("--report", cmd.report,
                      "machine-readable JSON report path; '-' for stdout (summary then goes to stderr)")
      ->default_str("-");
}

bool write_file(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

int exit_code(tess_status s) { return s == TESS_ERR_INTERNAL ? 1 : 2; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tess: treatment effect subset scanning"};
  app.get_formatter()->column_width(36);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tess_version()));

  std::map<std::string, Command> commands;
  auto make = [&](const char* name, const char* help) -> Command& {
    auto& cmd = commands[name];
    cmd.app = app.add_subcommand(name, help);
    return cmd;
  };

  {
    auto& c = make("scan", "find the subpopulation with the most divergent treated outcomes");
    add_flags(c, kInputFlags);
    add_flags(c, kScanFlags);
    add_common(c);
  }
  {
    auto& c = make("permtest", "scan plus a within-profile permutation test");
    add_flags(c, kInputFlags);
    add_flags(c, kScanFlags);
    add_flags(c, {{"permutations", "label permutations"}, {"gamma", "significance level"}});
    add_common(c);
  }
  {
    auto& c = make("holdout", "cross-fitted effect estimate inside detected subpopulations");
    add_flags(c, kInputFlags);
    add_flags(c, kScanFlags);
    add_flags(c, {{"folds", "number of folds"}});
    add_common(c);
  }
  {
    auto& c = make("simulate", "write one semi-synthetic dataset");
    add_flags(c, kInputFlags);
    add_flags(c, kSimFlags);
    add_flags(c, {{"output", "CSV destination"}});
    c.app->get_option("--output")->required();
    add_common(c);
  }
  {
    auto& c = make("power", "detection power study on regenerated null datasets");
    add_flags(c, kInputFlags);
    add_flags(c, kScanFlags);
    add_flags(c, kSimFlags);
    add_flags(c, {{"replicates", "datasets with an injected effect"},
                  {"null-copies", "null datasets per replicate"},
                  {"gamma", "significance level"},
                  {"statistic", "tess or mean_difference (|Welch t| baseline)"},
                  {"jsonl", "per-replicate records, one JSON object per line"}});
    add_common(c);
  }
  {
    auto& c = make("oracle-check", "compare the scanner with brute force on random instances");
    add_flags(c, kScanFlags);
    add_flags(c, {{"modes", "covariates per instance"},
                  {"arity", "values per covariate"},
                  {"instances", "random instances"}});
    add_common(c);
  }
  {
    auto& c = make("theory", "asymptotic null constant C and h(M, eps)");
    add_flags(c, {{"cells", "M; 0 skips h(M, eps)"}, {"epsilon", "eps in h(M, eps)"}});
    add_common(c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (auto& [name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;

    std::unique_ptr<tess_options, decltype(&tess_options_free)> opts(nullptr, &tess_options_free);
    {
      tess_options* raw = nullptr;
      if (tess_options_create(&raw) != TESS_OK) {
        std::fprintf(stderr, "error: %s\n", tess_last_error());
        return 1;
      }
      opts.reset(raw);
    }
    for (const auto& [key, value] : cmd.values) {
      if (cmd.app->get_option("--" + key)->count() == 0) continue;
      if (const auto s = tess_options_set(opts.get(), key.c_str(), value.c_str()); s != TESS_OK) {
        std::fprintf(stderr, "error: %s\n", tess_last_error());
        return exit_code(s);
      }
    }
    for (const auto& [key, on] : cmd.switches) {
      if (on) tess_options_set(opts.get(), key.c_str(), "true");
    }

    tess_report* raw = nullptr;
    const auto status = tess_run(name.c_str(), opts.get(), nullptr, &raw);
    if (status != TESS_OK) {
      std::fprintf(stderr, "error (%s): %s\n", tess_status_string(status), tess_last_error());
      return exit_code(status);
    }
    std::unique_ptr<tess_report, decltype(&tess_report_free)> report(raw, &tess_report_free);
    if (cmd.report == "-") {
      std::fputs(tess_report_json(report.get()), stdout);
      std::fputs(tess_report_summary(report.get()), stderr);
    } else {
      if (!write_file(cmd.report, tess_report_json(report.get()))) {
        std::fprintf(stderr, "error: cannot write report '%s'\n", cmd.report.c_str());
        return 2;
      }
      std::fputs(tess_report_summary(report.get()), stdout);
    }
    return 0;
  }
  return 2;
}
