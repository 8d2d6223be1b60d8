#include "tess/report.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "tess/error.hpp"

namespace tess {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

namespace {

json options_json(const RunOptions& o);

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* first = text.data();
  const auto* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    fail(ErrorCode::invalid_argument,
         "--" + std::string(key) + ": '" + std::string(text) + "' is not a valid number");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  fail(ErrorCode::invalid_argument,
       "--" + std::string(key) + ": '" + std::string(text) + "' is not a boolean");
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.emplace_back(text.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

constexpr std::string_view kKeys[] = {
    "input",        "outcome",     "treatment",      "covariates",  "sided",
    "include-orphan-treated",      "thin-controls",  "score",       "symmetric",
    "alpha-min",    "alpha-max",   "restarts",       "max-cycles",  "inclusion-prob",
    "seed",         "threads",     "permutations",   "gamma",       "folds",
    "effect",       "num-covs",    "value-prob",     "alternative", "records",
    "arities",      "treat-prob",  "replicates",     "null-copies", "statistic",
    "output",       "jsonl",       "modes",          "arity",       "instances",
    "cells",        "epsilon",
};

}  // namespace

std::vector<std::string_view> option_keys() { return {std::begin(kKeys), std::end(kKeys)}; }

void set_option(RunOptions& o, std::string_view key, std::string_view v) {
  using std::size_t;
  if (key == "input") o.input = v;
  else if (key == "outcome") o.outcome = v;
  else if (key == "treatment") o.treatment = v;
  else if (key == "covariates") o.covariates = split_list(v);
  else if (key == "sided") o.sided = parse_sidedness(v);
  else if (key == "include-orphan-treated") o.include_orphan_treated = parse_bool(key, v);
  else if (key == "thin-controls") o.thin_controls = parse_number<size_t>(key, v);
  else if (key == "score") o.score = parse_score_kind(v);
  else if (key == "symmetric") o.symmetric = parse_bool(key, v);
  else if (key == "alpha-min") o.alpha_min = parse_number<double>(key, v);
  else if (key == "alpha-max") o.alpha_max = parse_number<double>(key, v);
  else if (key == "restarts") o.restarts = parse_number<size_t>(key, v);
  else if (key == "max-cycles") o.max_cycles = parse_number<size_t>(key, v);
  else if (key == "inclusion-prob") o.inclusion_prob = parse_number<double>(key, v);
  else if (key == "seed") o.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "threads") o.threads = parse_number<size_t>(key, v);
  else if (key == "permutations") o.permutations = parse_number<size_t>(key, v);
  else if (key == "gamma") o.gamma = parse_number<double>(key, v);
  else if (key == "folds") o.folds = parse_number<size_t>(key, v);
  else if (key == "effect") o.effect = parse_number<double>(key, v);
  else if (key == "num-covs") o.num_covs = parse_number<size_t>(key, v);
  else if (key == "value-prob") o.value_prob = parse_number<double>(key, v);
  else if (key == "alternative") o.alternative = parse_alternative(v);
  else if (key == "records") o.records = parse_number<size_t>(key, v);
  else if (key == "arities") {
    o.arities.clear();
    for (const auto& a : split_list(v)) o.arities.push_back(parse_number<size_t>(key, a));
  }
  else if (key == "treat-prob") o.treat_prob = parse_number<double>(key, v);
  else if (key == "replicates") o.replicates = parse_number<size_t>(key, v);
  else if (key == "null-copies") o.null_copies = parse_number<size_t>(key, v);
  else if (key == "statistic") o.statistic = parse_power_statistic(v);
  else if (key == "output") o.output = v;
  else if (key == "jsonl") o.jsonl = v;
  else if (key == "modes") o.modes = parse_number<size_t>(key, v);
  else if (key == "arity") o.arity = parse_number<size_t>(key, v);
  else if (key == "instances") o.instances = parse_number<size_t>(key, v);
  else if (key == "cells") o.cells = parse_number<size_t>(key, v);
  else if (key == "epsilon") o.epsilon = parse_number<double>(key, v);
  else fail(ErrorCode::invalid_argument, "unknown option '" + std::string(key) + "'");
}

std::string get_option(const RunOptions& o, std::string_view key) {
  const auto j = options_json(o);
  std::string name(key);
  for (auto& ch : name) {
    if (ch == '-') ch = '_';
  }
  if (key == "threads") return std::to_string(o.threads);
  if (!j.contains(name)) fail(ErrorCode::invalid_argument, "unknown option '" + std::string(key) + "'");
  const auto& v = j.at(name);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) {
      if (!out.empty()) out += ',';
      out += e.is_string() ? e.get<std::string>() : e.dump();
    }
    return out;
  }
  return v.dump();
}

ScanConfig scan_config(const RunOptions& o) {
  ScanConfig cfg;
  cfg.score = {o.score, o.symmetric};
  cfg.alpha_min = o.alpha_min;
  cfg.alpha_max = o.alpha_max;
  cfg.restarts = o.restarts;
  cfg.max_cycles = o.max_cycles;
  cfg.seed = o.seed;
  cfg.inclusion_prob = o.inclusion_prob;
  cfg.threads = o.threads;
  cfg.validate();
  return cfg;
}

TableOptions table_options(const RunOptions& o) {
  return {o.sided, o.include_orphan_treated, o.thin_controls};
}

DetectedSubpopulation describe(const Subpopulation& s, const CovariateSchema& schema,
                               std::span<const Record> records) {
  DetectedSubpopulation d;
  for (std::size_t j = 0; j < schema.dims(); ++j) {
    const auto& cov = schema.covariate(j);
    KeptValues kv{cov.name, {}, s.values.at(j).size() == cov.values.size()};
    for (auto v : s.values[j]) kv.values.push_back(cov.values.at(v));
    d.covariates.push_back(std::move(kv));
  }
  for (const auto& r : records) {
    if (!s.contains(r.profile)) continue;
    ++d.records;
    d.treated_records += r.treated;
  }
  return d;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

json options_json(const RunOptions& o) {
  return json{
      {"input", o.input},
      {"outcome", o.outcome},
      {"treatment", o.treatment},
      {"covariates", o.covariates},
      {"sided", std::string(to_string(o.sided))},
      {"include_orphan_treated", o.include_orphan_treated},
      {"thin_controls", o.thin_controls},
      {"score", std::string(to_string(o.score))},
      {"symmetric", o.symmetric},
      {"alpha_min", o.alpha_min},
      {"alpha_max", o.alpha_max},
      {"restarts", o.restarts},
      {"max_cycles", o.max_cycles},
      {"inclusion_prob", o.inclusion_prob},
      {"seed", o.seed},
      {"permutations", o.permutations},
      {"gamma", o.gamma},
      {"folds", o.folds},
      {"effect", o.effect},
      {"num_covs", o.num_covs},
      {"value_prob", o.value_prob},
      {"alternative", std::string(to_string(o.alternative))},
      {"records", o.records},
      {"arities", o.arities},
      {"treat_prob", o.treat_prob},
      {"replicates", o.replicates},
      {"null_copies", o.null_copies},
      {"statistic", std::string(to_string(o.statistic))},
      {"output", o.output},
      {"jsonl", o.jsonl},
      {"modes", o.modes},
      {"arity", o.arity},
      {"instances", o.instances},
      {"cells", o.cells},
      {"epsilon", o.epsilon},
  };
}

RunOptions options_from(const json& j) {
  RunOptions o;
  o.threads = 0;
  j.at("input").get_to(o.input);
  j.at("outcome").get_to(o.outcome);
  j.at("treatment").get_to(o.treatment);
  j.at("covariates").get_to(o.covariates);
  o.sided = parse_sidedness(j.at("sided").get<std::string>());
  j.at("include_orphan_treated").get_to(o.include_orphan_treated);
  j.at("thin_controls").get_to(o.thin_controls);
  o.score = parse_score_kind(j.at("score").get<std::string>());
  j.at("symmetric").get_to(o.symmetric);
  j.at("alpha_min").get_to(o.alpha_min);
  j.at("alpha_max").get_to(o.alpha_max);
  j.at("restarts").get_to(o.restarts);
  j.at("max_cycles").get_to(o.max_cycles);
  j.at("inclusion_prob").get_to(o.inclusion_prob);
  j.at("seed").get_to(o.seed);
  j.at("permutations").get_to(o.permutations);
  j.at("gamma").get_to(o.gamma);
  j.at("folds").get_to(o.folds);
  j.at("effect").get_to(o.effect);
  j.at("num_covs").get_to(o.num_covs);
  j.at("value_prob").get_to(o.value_prob);
  o.alternative = parse_alternative(j.at("alternative").get<std::string>());
  j.at("records").get_to(o.records);
  j.at("arities").get_to(o.arities);
  j.at("treat_prob").get_to(o.treat_prob);
  j.at("replicates").get_to(o.replicates);
  j.at("null_copies").get_to(o.null_copies);
  o.statistic = parse_power_statistic(j.at("statistic").get<std::string>());
  j.at("output").get_to(o.output);
  j.at("jsonl").get_to(o.jsonl);
  j.at("modes").get_to(o.modes);
  j.at("arity").get_to(o.arity);
  j.at("instances").get_to(o.instances);
  j.at("cells").get_to(o.cells);
  j.at("epsilon").get_to(o.epsilon);
  return o;
}

json detected_json(const DetectedSubpopulation& d) {
  json covs = json::array();
  for (const auto& kv : d.covariates) {
    covs.push_back(json{{"covariate", kv.covariate}, {"values", kv.values}, {"all", kv.all}});
  }
  return json{{"covariates", covs},
              {"treated_records", d.treated_records},
              {"records", d.records}};
}

DetectedSubpopulation detected_from(const json& j) {
  DetectedSubpopulation d;
  for (const auto& c : j.at("covariates")) {
    d.covariates.push_back({c.at("covariate").get<std::string>(),
                            c.at("values").get<std::vector<std::string>>(),
                            c.at("all").get<bool>()});
  }
  j.at("treated_records").get_to(d.treated_records);
  j.at("records").get_to(d.records);
  return d;
}

template <typename T, typename F>
json optional_json(const std::optional<T>& v, F&& to) {
  return v ? to(*v) : json(nullptr);
}

template <typename T, typename F>
std::optional<T> optional_from(const json& j, const char* key, F&& from) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return from(j.at(key));
}

json diagnostics_json(const DiagnosticsSection& d) {
  return json{{"records", d.table.records},
              {"treated", d.table.treated},
              {"controls", d.table.controls},
              {"excluded_treated", d.table.excluded_treated},
              {"orphans_included", d.table.orphans_included},
              {"thin_control_cells", d.table.thin_control_cells},
              {"cells", d.cells},
              {"treatment_cells", d.treatment_cells},
              {"min_controls", d.min_controls}};
}

DiagnosticsSection diagnostics_from(const json& j) {
  DiagnosticsSection d;
  j.at("records").get_to(d.table.records);
  j.at("treated").get_to(d.table.treated);
  j.at("controls").get_to(d.table.controls);
  j.at("excluded_treated").get_to(d.table.excluded_treated);
  j.at("orphans_included").get_to(d.table.orphans_included);
  j.at("thin_control_cells").get_to(d.table.thin_control_cells);
  j.at("cells").get_to(d.cells);
  j.at("treatment_cells").get_to(d.treatment_cells);
  j.at("min_controls").get_to(d.min_controls);
  return d;
}

json scan_json(const ScanSection& s) {
  return json{{"detected", detected_json(s.detected)},
              {"score", s.score},
              {"alpha", s.alpha},
              {"n_alpha", s.n_alpha},
              {"n_total", s.n_total},
              {"mu_nate", s.mu_nate},
              {"best_restart", s.best_restart},
              {"restart_scores", s.restart_scores},
              {"cycles_per_restart", s.cycles_per_restart},
              {"restarts_hit_max_cycles", s.restarts_hit_max_cycles}};
}

ScanSection scan_from(const json& j) {
  ScanSection s;
  s.detected = detected_from(j.at("detected"));
  j.at("score").get_to(s.score);
  j.at("alpha").get_to(s.alpha);
  j.at("n_alpha").get_to(s.n_alpha);
  j.at("n_total").get_to(s.n_total);
  j.at("mu_nate").get_to(s.mu_nate);
  j.at("best_restart").get_to(s.best_restart);
  j.at("restart_scores").get_to(s.restart_scores);
  j.at("cycles_per_restart").get_to(s.cycles_per_restart);
  j.at("restarts_hit_max_cycles").get_to(s.restarts_hit_max_cycles);
  return s;
}

json permutation_json(const PermutationSection& p) {
  return json{{"permutations", p.permutations},
              {"p_value", p.p_value},
              {"gamma", p.gamma},
              {"reject", p.reject},
              {"single_arm_profiles", p.single_arm_profiles},
              {"null_scores", p.null_scores}};
}

PermutationSection permutation_from(const json& j) {
  PermutationSection p;
  j.at("permutations").get_to(p.permutations);
  j.at("p_value").get_to(p.p_value);
  j.at("gamma").get_to(p.gamma);
  j.at("reject").get_to(p.reject);
  j.at("single_arm_profiles").get_to(p.single_arm_profiles);
  j.at("null_scores").get_to(p.null_scores);
  return p;
}

json holdout_json(const HoldoutSection& h) {
  json folds = json::array();
  for (const auto& f : h.folds) {
    folds.push_back(json{{"fold", f.fold},
                         {"estimable", f.estimable},
                         {"note", f.note},
                         {"detected", optional_json(f.detected, detected_json)},
                         {"score", f.score},
                         {"mean_difference", f.mean_difference},
                         {"n_treated", f.n_treated},
                         {"n_control", f.n_control}});
  }
  return json{{"folds", folds},
              {"estimable_folds", h.estimable_folds},
              {"mean_estimate", h.mean_estimate},
              {"detection_agreement", h.detection_agreement}};
}

HoldoutSection holdout_from(const json& j) {
  HoldoutSection h;
  for (const auto& f : j.at("folds")) {
    HoldoutFoldSection s;
    f.at("fold").get_to(s.fold);
    f.at("estimable").get_to(s.estimable);
    f.at("note").get_to(s.note);
    s.detected = optional_from<DetectedSubpopulation>(f, "detected", detected_from);
    f.at("score").get_to(s.score);
    f.at("mean_difference").get_to(s.mean_difference);
    f.at("n_treated").get_to(s.n_treated);
    f.at("n_control").get_to(s.n_control);
    h.folds.push_back(std::move(s));
  }
  j.at("estimable_folds").get_to(h.estimable_folds);
  j.at("mean_estimate").get_to(h.mean_estimate);
  j.at("detection_agreement").get_to(h.detection_agreement);
  return h;
}

json power_json(const PowerSection& p) {
  return json{{"replicates", p.replicates},
              {"rejected", p.rejected},
              {"power", p.power},
              {"ci_low", p.ci_low},
              {"ci_high", p.ci_high},
              {"null_band_low", p.null_band_low},
              {"null_band_high", p.null_band_high},
              {"mean_accuracy", p.mean_accuracy ? json(*p.mean_accuracy) : json(nullptr)},
              {"p_values", p.p_values}};
}

PowerSection power_from(const json& j) {
  PowerSection p;
  j.at("replicates").get_to(p.replicates);
  j.at("rejected").get_to(p.rejected);
  j.at("power").get_to(p.power);
  j.at("ci_low").get_to(p.ci_low);
  j.at("ci_high").get_to(p.ci_high);
  j.at("null_band_low").get_to(p.null_band_low);
  j.at("null_band_high").get_to(p.null_band_high);
  if (!j.at("mean_accuracy").is_null()) p.mean_accuracy = j.at("mean_accuracy").get<double>();
  j.at("p_values").get_to(p.p_values);
  return p;
}

json simulate_json(const SimulateSection& s) {
  return json{{"output", s.output},
              {"records", s.records},
              {"treated", s.treated},
              {"affected", detected_json(s.affected)}};
}

SimulateSection simulate_from(const json& j) {
  SimulateSection s;
  j.at("output").get_to(s.output);
  j.at("records").get_to(s.records);
  j.at("treated").get_to(s.treated);
  s.affected = detected_from(j.at("affected"));
  return s;
}

json oracle_json(const OracleSection& o) {
  return json{{"instances", o.instances},
              {"mode_checks", o.mode_checks},
              {"mode_agreements", o.mode_agreements},
              {"mode_agreement_rate", o.mode_agreement_rate},
              {"scan_matches", o.scan_matches},
              {"scan_match_rate", o.scan_match_rate},
              {"scan_exceeded", o.scan_exceeded},
              {"max_scan_gap", o.max_scan_gap}};
}

OracleSection oracle_from(const json& j) {
  OracleSection o;
  j.at("instances").get_to(o.instances);
  j.at("mode_checks").get_to(o.mode_checks);
  j.at("mode_agreements").get_to(o.mode_agreements);
  j.at("mode_agreement_rate").get_to(o.mode_agreement_rate);
  j.at("scan_matches").get_to(o.scan_matches);
  j.at("scan_match_rate").get_to(o.scan_match_rate);
  j.at("scan_exceeded").get_to(o.scan_exceeded);
  j.at("max_scan_gap").get_to(o.max_scan_gap);
  return o;
}

json theory_json(const TheorySection& t) {
  return json{{"constant", t.constant},
              {"argmax_z", t.argmax_z},
              {"critical_value", t.critical_value ? json(*t.critical_value) : json(nullptr)}};
}

TheorySection theory_from(const json& j) {
  TheorySection t;
  j.at("constant").get_to(t.constant);
  j.at("argmax_z").get_to(t.argmax_z);
  if (!j.at("critical_value").is_null()) t.critical_value = j.at("critical_value").get<double>();
  return t;
}

}  // namespace

std::string to_json(const RunReport& r) {
  json j{{"schema_version", r.schema_version},
         {"version", r.version},
         {"command", r.command},
         {"input", optional_json(r.input,
                                 [](const InputInfo& in) {
                                   return json{{"path", in.path},
                                               {"sha256", in.sha256},
                                               {"records", in.records}};
                                 })},
         {"config", options_json(r.config)},
         {"diagnostics", optional_json(r.diagnostics, diagnostics_json)},
         {"scan", optional_json(r.scan, scan_json)},
         {"permutation", optional_json(r.permutation, permutation_json)},
         {"holdout", optional_json(r.holdout, holdout_json)},
         {"power", optional_json(r.power, power_json)},
         {"simulate", optional_json(r.simulate, simulate_json)},
         {"oracle", optional_json(r.oracle, oracle_json)},
         {"theory", optional_json(r.theory, theory_json)}};
  return j.dump(2) + "\n";
}

RunReport report_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    RunReport r;
    j.at("schema_version").get_to(r.schema_version);
    if (r.schema_version != kReportSchemaVersion) {
      fail(ErrorCode::parse, "unsupported report schema version " + std::to_string(r.schema_version));
    }
    j.at("version").get_to(r.version);
    j.at("command").get_to(r.command);
    r.input = optional_from<InputInfo>(j, "input", [](const json& in) {
      return InputInfo{in.at("path").get<std::string>(), in.at("sha256").get<std::string>(),
                       in.at("records").get<std::size_t>()};
    });
    r.config = options_from(j.at("config"));
    r.diagnostics = optional_from<DiagnosticsSection>(j, "diagnostics", diagnostics_from);
    r.scan = optional_from<ScanSection>(j, "scan", scan_from);
    r.permutation = optional_from<PermutationSection>(j, "permutation", permutation_from);
    r.holdout = optional_from<HoldoutSection>(j, "holdout", holdout_from);
    r.power = optional_from<PowerSection>(j, "power", power_from);
    r.simulate = optional_from<SimulateSection>(j, "simulate", simulate_from);
    r.oracle = optional_from<OracleSection>(j, "oracle", oracle_from);
    r.theory = optional_from<TheorySection>(j, "theory", theory_from);
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("malformed report: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::parse, std::string("malformed report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void describe_subpopulation(std::ostringstream& out, const DetectedSubpopulation& d,
                            const char* indent) {
  for (const auto& kv : d.covariates) {
    out << indent << kv.covariate << ": ";
    if (kv.all) {
      out << "(all)";
    } else {
      for (std::size_t i = 0; i < kv.values.size(); ++i) out << (i ? ", " : "") << kv.values[i];
    }
    out << '\n';
  }
  out << indent << "matches " << d.treated_records << " treated of " << d.records << " records\n";
}

}  // namespace

std::string summarize(const RunReport& r, double wall_seconds) {
  std::ostringstream out;
  out << "tess " << r.command << '\n';
  if (r.input) out << "input: " << r.input->path << " (" << r.input->records << " records)\n";
  if (r.diagnostics) {
    const auto& d = *r.diagnostics;
    out << "cells: " << d.cells << " (" << d.treatment_cells << " with treated units)"
        << ", treated " << d.table.treated << ", controls " << d.table.controls << '\n';
    if (d.table.excluded_treated > 0) {
      out << "warning: " << d.table.excluded_treated
          << " treated units excluded (no control in their profile)\n";
    }
    if (d.table.orphans_included > 0) {
      out << "note: " << d.table.orphans_included << " treated units without controls kept with range (0, 1]\n";
    }
    if (d.table.thin_control_cells > 0) {
      out << "note: " << d.table.thin_control_cells << " treatment cells have fewer than "
          << r.config.thin_controls << " controls\n";
    }
  }
  if (r.scan) {
    const auto& s = *r.scan;
    out << "score (" << to_string(r.config.score) << "): " << fmt("%.6g", s.score)
        << " at alpha " << fmt("%.6g", s.alpha) << '\n';
    out << "N_alpha " << fmt("%.6g", s.n_alpha) << " of N " << fmt("%.6g", s.n_total)
        << ", divergence " << fmt("%.6g", s.mu_nate) << '\n';
    out << "detected subpopulation:\n";
    describe_subpopulation(out, s.detected, "  ");
    if (s.restarts_hit_max_cycles > 0) {
      out << "warning: " << s.restarts_hit_max_cycles << " restarts hit max_cycles\n";
    }
  }
  if (r.permutation) {
    const auto& p = *r.permutation;
    out << "permutation p-value: " << fmt("%.6g", p.p_value) << " (" << p.permutations
        << " permutations, gamma " << fmt("%g", p.gamma) << ") -> "
        << (p.reject ? "reject H0" : "do not reject H0") << '\n';
    if (p.single_arm_profiles > 0) {
      out << "note: " << p.single_arm_profiles << " profiles have units in one arm only\n";
    }
  }
  if (r.holdout) {
    const auto& h = *r.holdout;
    for (const auto& f : h.folds) {
      out << "fold " << f.fold << ": ";
      if (f.estimable) {
        out << "effect " << fmt("%.6g", f.mean_difference) << " (" << f.n_treated << " treated, "
            << f.n_control << " control)\n";
      } else {
        out << f.note << '\n';
      }
    }
    out << "mean holdout effect: " << fmt("%.6g", h.mean_estimate) << " over "
        << h.estimable_folds << " folds; detection agreement "
        << fmt("%.4f", h.detection_agreement) << '\n';
  }
  if (r.power) {
    const auto& p = *r.power;
    out << "power: " << fmt("%.4f", p.power) << " (" << p.rejected << '/' << p.replicates
        << "), 95% CI [" << fmt("%.4f", p.ci_low) << ", " << fmt("%.4f", p.ci_high) << "]\n";
    out << "null band at gamma: [" << fmt("%.4f", p.null_band_low) << ", "
        << fmt("%.4f", p.null_band_high) << "]\n";
    if (p.mean_accuracy) out << "mean accuracy: " << fmt("%.4f", *p.mean_accuracy) << '\n';
  }
  if (r.simulate) {
    const auto& s = *r.simulate;
    out << "wrote " << s.records << " records (" << s.treated << " treated) to " << s.output
        << "\naffected subpopulation:\n";
    describe_subpopulation(out, s.affected, "  ");
  }
  if (r.oracle) {
    const auto& o = *r.oracle;
    out << "mode-optimization agreement: " << fmt("%.1f", 100.0 * o.mode_agreement_rate) << "% ("
        << o.mode_agreements << '/' << o.mode_checks << ")\n";
    out << "scan reached exhaustive optimum: " << fmt("%.1f", 100.0 * o.scan_match_rate) << "% ("
        << o.scan_matches << '/' << o.instances << "), exceeded " << o.scan_exceeded
        << ", largest gap " << fmt("%.6g", o.max_scan_gap) << '\n';
  }
  if (r.theory) {
    const auto& t = *r.theory;
    out << "C = " << fmt("%.7f", t.constant) << " (argmax z = " << fmt("%.4f", t.argmax_z) << ")\n";
    if (t.critical_value) {
      out << "h(M, eps) = " << fmt("%.6g", *t.critical_value) << " for M = " << r.config.cells
          << ", eps = " << fmt("%g", r.config.epsilon) << '\n';
    }
  }
  if (wall_seconds >= 0.0) out << "wall time: " << fmt("%.3f", wall_seconds) << " s\n";
  return out.str();
}

}  // namespace tess
