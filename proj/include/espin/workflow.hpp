#pragma once

// End-to-end training run and report rendering shared by the CLI and server.

#include <chrono>
#include <ctime>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "espin/bundle.hpp"
#include "espin/evaluation.hpp"
#include "espin/imc.hpp"
#include "espin/interpret.hpp"
#include "espin/sampling.hpp"

namespace espin {

enum class SamplingMethod { random, sobol_doptimal, balanced };

inline std::string_view sampling_name(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::random: return "random";
    case SamplingMethod::sobol_doptimal: return "sobol-doptimal";
    case SamplingMethod::balanced: return "balanced";
  }
  return "?";
}

inline SamplingMethod parse_sampling(std::string_view s) {
  const std::string l = to_lower(trim(s));
  if (l == "random") return SamplingMethod::random;
  if (l == "sobol-doptimal" || l == "sobol_doptimal" || l == "sobol") return SamplingMethod::sobol_doptimal;
  if (l == "balanced" || l == "balanced-sobol-doptimal") return SamplingMethod::balanced;
  throw Error("sampling_method", "unknown sampling method '" + std::string(s) + "' (random, sobol-doptimal, balanced)");
}

inline SampleResult draw_sample(const SpinDataset& ds, SamplingMethod method, std::size_t n, std::uint64_t seed) {
  if (n == 0) n = ds.size();
  switch (method) {
    case SamplingMethod::random: {
      SampleResult s;
      s.rows = sample_random(ds.size(), n, seed);
      s.method = "random";
      s.seed = seed;
      return s;
    }
    case SamplingMethod::sobol_doptimal: {
      SobolDoptOptions o;
      o.seed = seed;
      return sobol_doptimal_sample(ds, n, o);
    }
    case SamplingMethod::balanced: {
      SobolDoptOptions o;
      o.seed = seed;
      return balanced_sobol_doptimal(ds, n, o);
    }
  }
  throw Error("sampling_method", "unsupported sampling method");
}

struct TrainRequest {
  SamplingMethod sampling = SamplingMethod::random;
  std::size_t n = 0;  ///< 0: whole dataset
  double test_fraction = 0.30;
  std::size_t folds = 5;
  std::vector<LearnerKind> learners{kAllLearners.begin(), kAllLearners.end()};
  std::uint64_t seed = 42;
  RecipeConfig recipe{};

  void validate() const {
    if (folds != 3 && folds != 5 && folds != 10)
      throw Error("invalid_folds", "folds must be 3, 5 or 10 (got " + std::to_string(folds) + ")");
    if (!(test_fraction >= 0.10 - 1e-12 && test_fraction <= 0.40 + 1e-12))
      throw Error("test_fraction", "test fraction must lie in [0.10, 0.40]");
    if (learners.empty()) throw Error("no_learners", "select at least one learner");
  }

  nlohmann::json to_json() const {
    std::vector<std::string> names;
    for (auto k : learners) names.emplace_back(learner_name(k));
    return {{"sampling", sampling_name(sampling)}, {"n", n}, {"test_fraction", test_fraction},
            {"folds", folds}, {"learners", names}, {"seed", seed}};
  }
};

struct TrainOutput {
  SampleResult sample;
  std::vector<SpinRecord> train_rows, test_rows;
  EvalReport report;
  ModelBundle bundle;  ///< best model
  ResidualDiagnostics diagnostics;
  std::vector<std::string> warnings;
};

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// sample -> stratified split -> cross-validated benchmark -> best-model bundle.
/// `progress` receives values in [0, 1].
inline TrainOutput run_training(const SpinDataset& ds, const TrainRequest& req,
                                const std::function<void(double)>& progress = {}) {
  req.validate();
  auto tick = [&](double p) {
    if (progress) progress(p);
  };
  TrainOutput out;
  out.sample = draw_sample(ds, req.sampling, req.n, req.seed);
  tick(0.1);
  const SpinDataset sampled = ds.subset(out.sample.rows);
  const SplitResult sp = split(sampled.records(), req.test_fraction, req.seed);
  out.warnings = sp.warnings;
  out.train_rows = take_rows(sampled.records(), sp.train);
  out.test_rows = take_rows(sampled.records(), sp.test);

  BenchmarkOptions bo;
  bo.folds = req.folds;
  bo.recipe = req.recipe;
  bo.seed = req.seed;
  bo.sampling = std::string(sampling_name(req.sampling));
  BenchmarkResult br;
  br.recipe = Recipe::fit(out.train_rows, req.recipe);
  for (std::size_t i = 0; i < req.learners.size(); ++i) {
    bo.learners = {req.learners[i]};
    BenchmarkResult one = benchmark(out.train_rows, out.test_rows, bo);
    for (auto& e : one.report.entries) br.report.entries.push_back(std::move(e));
    for (auto& [id, m] : one.models) br.models.emplace(id, std::move(m));
    tick(0.1 + 0.8 * static_cast<double>(i + 1) / static_cast<double>(req.learners.size()));
  }
  br.report.folds = req.folds;
  br.report.test_fraction = req.test_fraction;
  br.report.best_id = select_best(br.report, &br.report.selection_rule);
  out.report = br.report;

  ModelBundle& b = out.bundle;
  b.recipe = br.recipe;
  b.model = br.models.at(out.report.best_id);

  const EvalEntry& best = out.report.entry(out.report.best_id);
  if (!out.test_rows.empty()) {
    const Eigen::VectorXd y = outcome_vector(out.test_rows);
    out.diagnostics = residual_diagnostics(y, b.predict(out.test_rows));
  } else {
    out.diagnostics = residual_diagnostics(outcome_vector(out.train_rows),
                                           Eigen::Map<const Eigen::VectorXd>(best.oof.data(), static_cast<Eigen::Index>(best.oof.size())));
  }
  b.metadata = {{"dataset_fingerprint", ds.fingerprint()},
                {"sampling", sampling_name(req.sampling)},
                {"sampling_log", out.sample.log},
                {"seed", req.seed},
                {"n", out.sample.rows.size()},
                {"test_fraction", req.test_fraction},
                {"folds", req.folds},
                {"request", req.to_json()},
                {"report", out.report.to_json()},
                {"diagnostics", out.diagnostics.to_json(false)},
                {"model_flags", b.model.flags()},
                {"recipe_warnings", b.recipe.warnings()},
                {"split_warnings", out.warnings},
                {"timestamp", utc_timestamp()}};
  tick(1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct ReportInput {
  nlohmann::json metadata;          ///< bundle metadata
  std::optional<nlohmann::json> imc;  ///< ImcSummary::to_json()
};

namespace detail {

inline std::string num_or_na(const nlohmann::json& v, int decimals = 4) {
  return v.is_number() ? format_fixed(v.get<double>(), decimals) : std::string("NA");
}

inline std::string html_escape(std::string_view s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

struct ReportTable {
  std::string title;
  std::vector<std::string> head;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;
};

inline std::vector<ReportTable> report_sections(const ReportInput& in) {
  std::vector<ReportTable> out;
  const auto& md = in.metadata;
  ReportTable metrics{"Metrics", {"learner", "params", "test RMSE", "test MAE", "test MAPE", "test R2", "cv RMSE",
                                  "cv R2", "dRMSE", "dR2"}, {}, {}};
  if (md.contains("report")) {
    const auto& r = md.at("report");
    for (const auto& e : r.at("entries")) {
      const auto& t = e.at("test");
      const auto& c = e.at("cv");
      auto tv = [&](const char* k) { return t.is_null() ? std::string("NA") : num_or_na(t.at(k)); };
      metrics.rows.push_back({e.at("learner").get<std::string>(), params_label(e.at("params").get<Params>()),
                              tv("rmse"), tv("mae"), tv("mape"), tv("r2"), num_or_na(c.at("rmse")), num_or_na(c.at("r2")),
                              num_or_na(e.at("deltas").at("rmse")), num_or_na(e.at("deltas").at("r2"))});
    }
    metrics.notes.push_back("Best model: " + r.at("best_id").get<std::string>() + " (" +
                            r.at("selection_rule").get<std::string>() + ")");
    metrics.notes.push_back("Sampling: " + md.value("sampling", std::string("?")) + ", folds: " +
                            std::to_string(md.value("folds", 0)) + ", test fraction: " +
                            format_fixed(md.value("test_fraction", 0.0), 2) + ", seed: " +
                            std::to_string(md.value("seed", 0ULL)));
  } else {
    metrics.notes.push_back("No metrics recorded in this bundle.");
  }
  out.push_back(metrics);

  ReportTable diag{"Diagnostics", {"check", "value", "flagged"}, {}, {}};
  if (md.contains("diagnostics")) {
    const auto& d = md.at("diagnostics");
    diag.rows.push_back({"residual trend (standardized slope)", num_or_na(d.at("trend_slope")),
                         d.at("trend").get<bool>() ? "yes" : "no"});
    diag.rows.push_back({"heteroscedasticity (variance ratio)", num_or_na(d.at("variance_ratio")),
                         d.at("heteroscedastic").get<bool>() ? "yes" : "no"});
    diag.rows.push_back({"tail departure (standard errors)", num_or_na(d.at("tail_deviation")),
                         d.at("tail").get<bool>() ? "yes" : "no"});
    for (const auto& f : d.at("flags")) diag.notes.push_back(f.get<std::string>());
  } else {
    diag.notes.push_back("No diagnostics recorded in this bundle.");
  }
  out.push_back(diag);

  ReportTable imc{"Inverse Monte Carlo", {"field", "value"}, {}, {}};
  if (in.imc) {
    const auto& s = *in.imc;
    for (const char* k : {"mode", "polymer", "strictness"}) imc.rows.push_back({k, s.at(k).get<std::string>()});
    for (const char* k : {"target", "tolerance", "no_allow_pct"}) imc.rows.push_back({k, num_or_na(s.at(k), 2)});
    for (const char* k : {"n", "accepted", "within_band"}) imc.rows.push_back({k, std::to_string(s.at(k).get<std::size_t>())});
    for (const char* k : {"pred_mean", "pred_sd", "rmse_to_target", "mae_to_target"})
      imc.rows.push_back({k, num_or_na(s.at(k), 2)});
    imc.rows.push_back({"p_succ", num_or_na(s.at("p_succ"))});
    imc.rows.push_back({"p_succ_unconditional", num_or_na(s.at("p_succ_unconditional"))});
    if (s.contains("p_acc")) imc.rows.push_back({"p_acc", num_or_na(s.at("p_acc"))});
    if (s.at("zero_accepted").get<bool>()) imc.notes.push_back("No draws were accepted; statistics are not reported.");
    std::size_t rank = 0;
    for (const auto& e : s.at("top")) {
      if (++rank > 5) break;
      imc.notes.push_back("#" + std::to_string(rank) + " predicted " + num_or_na(e.at("prediction"), 1) + " nm (error " +
                          num_or_na(e.at("abs_error"), 1) + ", " + e.at("flag").get<std::string>() + ", " +
                          e.at("source").get<std::string>() + ")");
    }
  } else {
    imc.notes.push_back("No IMC run supplied.");
  }
  out.push_back(imc);
  return out;
}

}  // namespace detail

inline std::string render_report_text(const ReportInput& in) {
  std::string o = "Electrospinning model report\n============================\n";
  for (const auto& t : detail::report_sections(in)) {
    o += "\n" + t.title + "\n" + std::string(t.title.size(), '-') + "\n";
    if (!t.rows.empty()) {
      std::vector<std::size_t> w(t.head.size());
      for (std::size_t j = 0; j < t.head.size(); ++j) w[j] = t.head[j].size();
      for (const auto& r : t.rows)
        for (std::size_t j = 0; j < r.size(); ++j) w[j] = std::max(w[j], r[j].size());
      auto line = [&](const std::vector<std::string>& r) {
        std::string s;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] + std::string(w[j] - r[j].size() + 2, ' ');
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s + "\n";
      };
      o += line(t.head);
      for (const auto& r : t.rows) o += line(r);
    }
    for (const auto& n : t.notes) o += "* " + n + "\n";
  }
  return o;
}

inline std::string render_report_html(const ReportInput& in) {
  using detail::html_escape;
  std::string o =
      "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Electrospinning model report</title>"
      "<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}"
      "td,th{border:1px solid #999;padding:2px 8px;text-align:right}</style></head><body>\n"
      "<h1>Electrospinning model report</h1>\n";
  for (const auto& t : detail::report_sections(in)) {
    o += "<section><h2>" + html_escape(t.title) + "</h2>\n";
    if (!t.rows.empty()) {
      o += "<table><tr>";
      for (const auto& h : t.head) o += "<th>" + html_escape(h) + "</th>";
      o += "</tr>\n";
      for (const auto& r : t.rows) {
        o += "<tr>";
        for (const auto& c : r) o += "<td>" + html_escape(c) + "</td>";
        o += "</tr>\n";
      }
      o += "</table>\n";
    }
    if (!t.notes.empty()) {
      o += "<ul>";
      for (const auto& n : t.notes) o += "<li>" + html_escape(n) + "</li>";
      o += "</ul>\n";
    }
    o += "</section>\n";
  }
  return o + "</body></html>\n";
}

}  // namespace espin
