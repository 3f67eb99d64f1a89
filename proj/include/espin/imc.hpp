#pragma once

// Inverse Monte Carlo: propose configurations, veto infeasible ones,
// predict, and summarize against a target band.

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "espin/bundle.hpp"
#include "espin/chemistry.hpp"
#include "espin/csv.hpp"
#include "espin/dataset.hpp"
#include "espin/sampling.hpp"

namespace espin {

enum class ImcMode { experimental, optimization };

inline std::string_view imc_mode_name(ImcMode m) { return m == ImcMode::experimental ? "experimental" : "optimization"; }

inline ImcMode parse_imc_mode(std::string_view s) {
  const std::string l = to_lower(trim(s));
  if (l == "experimental") return ImcMode::experimental;
  if (l == "optimization" || l == "optimisation") return ImcMode::optimization;
  throw Error("imc_mode", "unknown IMC mode '" + std::string(s) + "' (experimental, optimization)");
}

inline constexpr std::size_t kImcMinRows = 5;

struct ImcConfig {
  ImcMode mode = ImcMode::experimental;
  std::string polymer;
  double target = 0.0;     ///< nm
  double tolerance = 0.0;  ///< nm
  std::size_t n = 1000;
  StrictnessPolicy policy{};
  std::uint64_t seed = 0;
  std::size_t max_solvents = 3;
  std::size_t top_k = 20;

  void validate() const {
    if (!(target > 0)) throw Error("imc_target", "target diameter must be positive");
    if (!(tolerance >= 0)) throw Error("imc_tolerance", "tolerance must be non-negative");
    if (n < 1) throw Error("imc_draws", "need at least one draw");
    if (max_solvents < 1 || max_solvents > 3) throw Error("imc_solvents", "max solvent count must be 1..3");
    if (!(policy.no_allow_pct >= 0)) throw Error("no_allow_pct", "no_allow_pct must be non-negative");
  }
};

struct ImcDraw {
  std::size_t index = 0;
  SpinRecord x;
  bool accepted = true;
  std::optional<double> prediction;
  Rating flag = Rating::OK;
  /// Row of the dataset for experimental draws.
  std::optional<std::size_t> source_row;
  std::vector<std::string> reasons;

  double abs_error(double target) const { return prediction ? std::fabs(*prediction - target) : kNaN; }
  std::string source() const { return source_row ? "row:" + std::to_string(*source_row) : "synthetic"; }
};

struct TopEntry {
  std::size_t draw = 0;
  double prediction = 0;
  double abs_error = 0;
  Rating flag = Rating::OK;
  std::string source;
  std::string doi;
  SpinRecord x;
};

struct ImcSummary {
  ImcMode mode = ImcMode::experimental;
  std::string polymer;
  double target = 0, tolerance = 0;
  std::size_t n = 0;
  std::size_t accepted = 0;
  std::size_t within_band = 0;
  bool polymer_fallback = false;
  std::optional<double> pred_mean, pred_sd, rmse_to_target, mae_to_target;
  std::optional<double> p_succ;                ///< within band / accepted
  std::optional<double> p_succ_unconditional;  ///< within band / all draws
  std::optional<double> p_acc;                 ///< optimization mode only
  std::vector<TopEntry> top;
  std::vector<std::string> unrated_solvents;
  std::uint64_t seed = 0;
  std::string strictness;
  double no_allow_pct = 0;

  nlohmann::json to_json() const;
};

// ---------------------------------------------------------------------------
// Draws

inline ImcDraw draw_experimental(const SpinDataset& ds, const EmpiricalProfile& profile, Stream& rng) {
  ImcDraw d;
  const std::size_t row = profile.rows[rng.below(profile.rows.size())];
  d.x = ds[row];
  d.source_row = row;
  d.accepted = true;
  return d;
}

inline ImcDraw draw_optimization(const EmpiricalProfile& profile, const ImcConfig& cfg,
                                 const FeasibilityTables& tables, Stream& rng) {
  if (profile.solvent_pool.empty())
    throw Error("empty_solvent_pool", "no solvents observed for polymer '" + profile.polymer + "'");
  ImcDraw d;
  SpinRecord& x = d.x;
  x.cat[idx(CatVar::polymer)] = profile.polymer;
  for (std::size_t v = kFirstOperating; v < kNumVars; ++v) {
    const Range& r = profile.ranges[v];
    x.num[v] = r.valid() ? (r.min == r.max ? r.min : rng.uniform(r.min, r.max)) : kNaN;
  }
  {
    const auto& lv = profile.levels[idx(CatVar::collector_type)];
    std::vector<std::string> names;
    std::vector<double> w;
    for (const auto& [name, p] : lv) {
      names.push_back(name);
      w.push_back(p);
    }
    if (!names.empty()) x.cat[idx(CatVar::collector_type)] = names[rng.weighted(w)];
  }
  std::vector<std::string> pool;
  for (const auto& [s, p] : profile.solvent_pool) pool.push_back(s);
  const std::size_t kmax = std::min({cfg.max_solvents, pool.size(), std::size_t{3}});
  std::vector<double> kw(profile.solvent_count_freq.begin(), profile.solvent_count_freq.begin() + static_cast<std::ptrdiff_t>(kmax));
  const std::size_t k = std::accumulate(kw.begin(), kw.end(), 0.0) > 0 ? rng.weighted(kw) + 1 : 1;
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t j = s + rng.below(pool.size() - s);
    std::swap(pool[s], pool[j]);
  }
  const auto ratios = sample_ratios(k, rng);
  for (std::size_t s = 0; s < 3; ++s) {
    x.solvent(s) = s < k ? pool[s] : std::string();
    x.ratio(s) = s < k ? ratios[s] : 0.0;
  }
  const MixtureCheck m = mixture_feasible(x, cfg.policy, tables.solubility, tables.incompatibility);
  d.accepted = m.accepted;
  d.reasons = m.reasons;
  return d;
}

// ---------------------------------------------------------------------------
// Ranking

/// Polymer, collector, solvent set with ratios and numeric settings, all
/// rounded to 3 significant figures.
inline std::string dedup_key(const SpinRecord& r) {
  std::string key = r.polymer() + "|" + r.collector() + "|";
  for (const auto& [s, ratio] : r.solvent_mix()) key += s + "=" + format_double(round_sig(ratio, 3)) + ";";
  key += "|";
  for (std::size_t v = kFirstOperating; v < kNumVars; ++v) key += format_double(round_sig(r.num[v], 3)) + ";";
  return key;
}

inline std::vector<TopEntry> top_k(const std::vector<ImcDraw>& draws, double target, std::size_t k = 20) {
  std::vector<const ImcDraw*> ok;
  for (const auto& d : draws)
    if (d.accepted && d.prediction) ok.push_back(&d);
  std::stable_sort(ok.begin(), ok.end(), [&](const ImcDraw* a, const ImcDraw* b) {
    const double ea = a->abs_error(target), eb = b->abs_error(target);
    return ea < eb || (ea == eb && a->index < b->index);
  });
  std::set<std::string> seen;
  std::vector<TopEntry> out;
  for (const ImcDraw* d : ok) {
    if (out.size() >= k) break;
    if (!seen.insert(dedup_key(d->x)).second) continue;
    out.push_back({d->index, *d->prediction, d->abs_error(target), d->flag, d->source(), d->x.doi, d->x});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Engine

using Predictor = std::function<Eigen::VectorXd(std::span<const SpinRecord>)>;

struct ImcResult {
  ImcSummary summary;
  std::vector<ImcDraw> draws;
};

inline ImcResult run_imc(const ImcConfig& cfg, const Predictor& predict, const SpinDataset& ds,
                         const FeasibilityTables& tables) {
  cfg.validate();
  const EmpiricalProfile profile = empirical_ranges(ds, cfg.polymer, kImcMinRows);
  ImcResult res;
  res.draws.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Stream rng(cfg.seed, i);
    ImcDraw d = cfg.mode == ImcMode::experimental ? draw_experimental(ds, profile, rng)
                                                   : draw_optimization(profile, cfg, tables, rng);
    d.index = i;
    d.flag = row_flag(d.x, tables.solubility);
    res.draws.push_back(std::move(d));
  }

  std::vector<SpinRecord> batch;
  std::vector<std::size_t> where;
  for (const auto& d : res.draws)
    if (d.accepted) {
      batch.push_back(d.x);
      where.push_back(d.index);
    }
  if (!batch.empty()) {
    const Eigen::VectorXd p = predict(batch);
    for (std::size_t j = 0; j < where.size(); ++j) res.draws[where[j]].prediction = p(static_cast<Eigen::Index>(j));
  }

  ImcSummary& s = res.summary;
  s.mode = cfg.mode;
  s.polymer = cfg.polymer;
  s.target = cfg.target;
  s.tolerance = cfg.tolerance;
  s.n = cfg.n;
  s.seed = cfg.seed;
  s.strictness = std::string(strictness_name(cfg.policy.mode));
  s.no_allow_pct = cfg.policy.no_allow_pct;
  s.polymer_fallback = profile.fallback;
  s.accepted = batch.size();

  std::set<std::string> unrated;
  double sum = 0, sq = 0, abs_sum = 0;
  for (const auto& d : res.draws) {
    for (std::size_t t = 0; t < 3; ++t)
      if (!d.x.solvent(t).empty() && !tables.solubility.find(d.x.polymer(), d.x.solvent(t)))
        unrated.insert(d.x.solvent(t));
    if (!d.prediction) continue;
    const double e = *d.prediction - cfg.target;
    sum += *d.prediction;
    sq += e * e;
    abs_sum += std::fabs(e);
    if (std::fabs(e) <= cfg.tolerance) ++s.within_band;
  }
  s.unrated_solvents.assign(unrated.begin(), unrated.end());
  const double N = static_cast<double>(cfg.n);
  if (cfg.mode == ImcMode::optimization) s.p_acc = static_cast<double>(s.accepted) / N;
  s.p_succ_unconditional = static_cast<double>(s.within_band) / N;
  if (s.accepted > 0) {
    const double a = static_cast<double>(s.accepted);
    s.pred_mean = sum / a;
    double var = 0;
    for (const auto& d : res.draws)
      if (d.prediction) var += (*d.prediction - *s.pred_mean) * (*d.prediction - *s.pred_mean);
    s.pred_sd = s.accepted > 1 ? std::sqrt(var / (a - 1.0)) : 0.0;
    s.rmse_to_target = std::sqrt(sq / a);
    s.mae_to_target = abs_sum / a;
    s.p_succ = static_cast<double>(s.within_band) / a;
  }
  s.top = top_k(res.draws, cfg.target, cfg.top_k);
  return res;
}

inline ImcResult run_imc(const ImcConfig& cfg, const ModelBundle& bundle, const SpinDataset& ds,
                         const FeasibilityTables& tables) {
  return run_imc(cfg, [&](std::span<const SpinRecord> rows) { return bundle.predict(rows); }, ds, tables);
}

// ---------------------------------------------------------------------------
// Export

namespace detail {

inline nlohmann::json record_json(const SpinRecord& r) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t c = 0; c < kCatVars; ++c) j[std::string(kCatNames[c])] = r.cat[c];
  for (std::size_t v = 0; v < kNumVars; ++v)
    j[std::string(kNumNames[v])] = std::isfinite(r.num[v]) ? nlohmann::json(r.num[v]) : nlohmann::json(nullptr);
  if (!r.doi.empty()) j["doi"] = r.doi;
  return j;
}

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace detail

inline nlohmann::json ImcSummary::to_json() const {
  nlohmann::json j{{"mode", imc_mode_name(mode)},
                   {"polymer", polymer},
                   {"target", target},
                   {"tolerance", tolerance},
                   {"n", n},
                   {"seed", seed},
                   {"strictness", strictness},
                   {"no_allow_pct", no_allow_pct},
                   {"accepted", accepted},
                   {"within_band", within_band},
                   {"polymer_fallback", polymer_fallback},
                   {"zero_accepted", accepted == 0},
                   {"pred_mean", detail::opt_json(pred_mean)},
                   {"pred_sd", detail::opt_json(pred_sd)},
                   {"rmse_to_target", detail::opt_json(rmse_to_target)},
                   {"mae_to_target", detail::opt_json(mae_to_target)},
                   {"p_succ", detail::opt_json(p_succ)},
                   {"p_succ_unconditional", detail::opt_json(p_succ_unconditional)},
                   {"unrated_solvents", unrated_solvents}};
  if (mode == ImcMode::optimization) j["p_acc"] = detail::opt_json(p_acc);
  nlohmann::json t = nlohmann::json::array();
  for (const auto& e : top)
    t.push_back({{"draw", e.draw},
                 {"prediction", e.prediction},
                 {"abs_error", e.abs_error},
                 {"flag", rating_name(e.flag)},
                 {"source", e.source},
                 {"doi", e.doi},
                 {"config", detail::record_json(e.x)}});
  j["top"] = t;
  return j;
}

inline std::string export_draws(const ImcResult& r, char delim = ',') {
  csv::Writer w(delim);
  std::vector<std::string> head{"draw", "source", "doi", "accepted", "flag", "prediction", "abs_error", "within_band"};
  for (auto n : kCatNames) head.emplace_back(n);
  for (auto n : kNumNames) head.emplace_back(n);
  head.emplace_back("reasons");
  w.row(head);
  for (const auto& d : r.draws) {
    const double err = d.abs_error(r.summary.target);
    std::vector<std::string> row{std::to_string(d.index), d.source(), d.x.doi, d.accepted ? "1" : "0",
                                 std::string(rating_name(d.flag)),
                                 d.prediction ? format_double(*d.prediction) : std::string(),
                                 d.prediction ? format_double(err) : std::string(),
                                 d.prediction ? (err <= r.summary.tolerance ? "1" : "0") : std::string()};
    for (const auto& c : d.x.cat) row.push_back(c);
    for (double v : d.x.num) row.push_back(format_double(v));
    std::string reasons;
    for (const auto& s : d.reasons) reasons += (reasons.empty() ? "" : "; ") + s;
    row.push_back(reasons);
    w.row(row);
  }
  return w.str();
}

inline std::string export_top(const ImcSummary& s, char delim = ',') {
  csv::Writer w(delim);
  std::vector<std::string> head{"rank", "draw", "prediction", "abs_error", "flag", "source", "doi"};
  for (auto n : kCatNames) head.emplace_back(n);
  for (auto n : kNumNames) head.emplace_back(n);
  w.row(head);
  for (std::size_t i = 0; i < s.top.size(); ++i) {
    const auto& e = s.top[i];
    std::vector<std::string> row{std::to_string(i + 1), std::to_string(e.draw), format_double(e.prediction),
                                 format_double(e.abs_error), std::string(rating_name(e.flag)), e.source, e.doi};
    for (const auto& c : e.x.cat) row.push_back(c);
    for (double v : e.x.num) row.push_back(format_double(v));
    w.row(row);
  }
  return w.str();
}

}  // namespace espin
