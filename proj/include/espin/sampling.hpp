#pragma once

// Training-subset construction: simple random sampling, Sobol + D-optimal
// hybrid design, and polymer-balanced stratification.

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "espin/dataset.hpp"
#include "espin/doptimal.hpp"
#include "espin/pipeline.hpp"
#include "espin/sobol.hpp"

namespace espin {

/// Row-index subset of a dataset plus provenance.
struct SampleResult {
  std::vector<std::size_t> rows;  ///< sorted, distinct
  std::string method;
  std::uint64_t seed = 0;
  nlohmann::json log = nlohmann::json::object();
};

/// n distinct rows, uniform over all size-n subsets. Returned sorted.
inline std::vector<std::size_t> sample_random(std::size_t dataset_size, std::size_t n, std::uint64_t seed) {
  if (n < 1 || n > dataset_size)
    throw Error("sample_size", "sample size " + std::to_string(n) + " outside [1, " +
                                   std::to_string(dataset_size) + "]");
  std::vector<std::size_t> idx(dataset_size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Stream rng(seed, stream_id("random-sample"));
  // Partial Fisher-Yates: the first n slots are a uniform n-subset.
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(dataset_size - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Affine map of unit-cube coordinates onto per-variable ranges.
inline std::vector<std::vector<double>> scale_to_ranges(const std::vector<std::vector<double>>& points,
                                                        const std::vector<Range>& ranges) {
  std::vector<std::vector<double>> out;
  out.reserve(points.size());
  for (const auto& u : points) {
    if (u.size() != ranges.size()) throw Error("dimension_mismatch", "point and range dimensions differ");
    std::vector<double> x(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
      const auto& r = ranges[j];
      x[j] = r.min == r.max ? r.min : r.min + u[j] * (r.max - r.min);
    }
    out.push_back(std::move(x));
  }
  return out;
}

/// k solvent ratios (percent) from a Dirichlet with the given concentration
/// parameters (default: all ones). Sum is exactly 100 up to rounding.
inline std::vector<double> sample_ratios(std::size_t k, Stream& rng, std::vector<double> alpha = {}) {
  if (k < 1 || k > 3) throw Error("solvent_count", "solvent count must be 1..3");
  if (alpha.empty()) alpha.assign(k, 1.0);
  if (alpha.size() != k) throw Error("dirichlet_parameters", "need one concentration per solvent");
  if (k == 1) return {100.0};
  std::vector<double> g(k);
  double total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(alpha[i] > 0)) throw Error("dirichlet_parameters", "concentrations must be positive");
    do g[i] = rng.gamma(alpha[i]);
    while (!(g[i] > 0));
    total += g[i];
  }
  std::vector<double> r(k);
  double acc = 0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    r[i] = 100.0 * g[i] / total;
    acc += r[i];
  }
  r[k - 1] = 100.0 - acc;
  return r;
}

// ---------------------------------------------------------------------------
// Polymer-balanced allocation

struct BalancedAllocation {
  std::map<std::string, std::size_t> available;   ///< f_p
  std::size_t budget = 0;                          ///< n
  std::map<std::string, std::size_t> allocation;  ///< n_p
  /// Log-weighted share of the budget before rounding (after redistribution).
  std::map<std::string, double> raw;
  /// Eq.-style share n * log(1+f_p) / sum_q log(1+f_q) with no caps applied.
  std::map<std::string, double> uncapped_raw;
  std::vector<std::string> capped;  ///< in the order caps were applied
};

inline BalancedAllocation allocate_balanced(const std::map<std::string, std::size_t>& freqs, std::size_t n) {
  if (freqs.empty()) throw Error("no_polymers", "allocation needs at least one polymer");
  std::size_t total = 0;
  for (const auto& [p, f] : freqs) total += f;
  if (n > total)
    throw Error("budget_exceeds_data",
                "budget " + std::to_string(n) + " exceeds available rows " + std::to_string(total));

  BalancedAllocation a;
  a.available = freqs;
  a.budget = n;
  std::map<std::string, double> w;
  double wsum = 0;
  for (const auto& [p, f] : freqs) {
    w[p] = std::log1p(static_cast<double>(f));
    wsum += w[p];
  }
  for (const auto& [p, f] : freqs) a.uncapped_raw[p] = static_cast<double>(n) * w[p] / wsum;

  // Cap-and-redistribute until no uncapped raw share exceeds availability.
  std::map<std::string, bool> is_capped;
  for (;;) {
    std::size_t remaining = n;
    double usum = 0;
    for (const auto& [p, f] : freqs) {
      if (is_capped[p]) remaining -= f;
      else usum += w[p];
    }
    std::vector<std::string> newly;
    for (const auto& [p, f] : freqs) {
      if (is_capped[p]) {
        a.raw[p] = static_cast<double>(f);
        continue;
      }
      a.raw[p] = usum > 0 ? static_cast<double>(remaining) * w[p] / usum : 0.0;
      if (a.raw[p] > static_cast<double>(f)) newly.push_back(p);
    }
    if (newly.empty()) break;
    for (const auto& p : newly) {
      is_capped[p] = true;
      a.capped.push_back(p);
    }
  }

  // Largest remainder; ties by larger f_p, then polymer name.
  std::size_t assigned = 0;
  std::vector<std::pair<std::string, double>> rem;
  for (const auto& [p, r] : a.raw) {
    const auto fl = static_cast<std::size_t>(std::floor(r + 1e-9));
    a.allocation[p] = std::min(fl, freqs.at(p));
    assigned += a.allocation[p];
    rem.emplace_back(p, r - static_cast<double>(a.allocation[p]));
  }
  std::stable_sort(rem.begin(), rem.end(), [&](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    if (freqs.at(x.first) != freqs.at(y.first)) return freqs.at(x.first) > freqs.at(y.first);
    return x.first < y.first;
  });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % rem.size()) {
    const auto& p = rem[i].first;
    if (a.allocation[p] < freqs.at(p)) {
      ++a.allocation[p];
      ++assigned;
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Sobol + D-optimal

struct SobolDoptOptions {
  double oversample_factor = 2.62;
  bool constrain_to_observed_tuples = true;
  std::uint64_t seed = 0;
  FedorovOptions fedorov{};
};

namespace detail {

/// Synthetic candidate records (no outcome) covering the empirical ranges.
struct CandidateBatch {
  std::vector<SpinRecord> records;
  std::size_t generated = 0;
  std::size_t discarded_by_constraint = 0;
};

inline CandidateBatch make_candidates(const SpinDataset& ds, std::size_t count, const SobolDoptOptions& opt) {
  EmpiricalProfile prof = empirical_ranges(ds, "", 0);
  std::vector<std::size_t> vars;
  std::vector<Range> ranges;
  for (std::size_t v = kFirstOperating; v < kNumVars; ++v)
    if (prof.ranges[v].valid()) {
      vars.push_back(v);
      ranges.push_back(prof.ranges[v]);
    }

  // Observed solvent tuples per polymer, with counts.
  std::map<std::string, std::map<std::vector<std::string>, double>> tuples;
  for (const auto& r : ds.records()) {
    std::vector<std::string> s;
    for (std::size_t k = 0; k < 3; ++k)
      if (!r.solvent(k).empty()) s.push_back(r.solvent(k));
    std::sort(s.begin(), s.end());
    tuples[r.polymer()][s] += 1.0;
  }
  const auto observed = observed_tuples(ds);

  auto pick = [](const std::map<std::string, double>& freq, Stream& rng) {
    std::vector<std::string> keys;
    std::vector<double> w;
    for (const auto& [k, p] : freq) {
      keys.push_back(k);
      w.push_back(p);
    }
    return keys[rng.weighted(w)];
  };

  CandidateBatch batch;
  SobolStream sobol(std::max<std::size_t>(vars.size(), 1));
  Stream rng(opt.seed, stream_id("sobol-candidates"));
  const std::size_t max_attempts = 50 * count + 100;
  while (batch.records.size() < count && batch.generated < max_attempts) {
    ++batch.generated;
    SpinRecord rec;
    const auto u = sobol.next();
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const auto& r = ranges[j];
      rec.num[vars[j]] = r.min == r.max ? r.min : r.min + u[j] * (r.max - r.min);
    }
    rec.cat[idx(CatVar::polymer)] = pick(prof.levels[idx(CatVar::polymer)], rng);
    rec.cat[idx(CatVar::collector_type)] = pick(prof.levels[idx(CatVar::collector_type)], rng);

    std::vector<std::string> solvents;
    if (opt.constrain_to_observed_tuples) {
      const auto& options = tuples.at(rec.polymer());
      std::vector<const std::vector<std::string>*> keys;
      std::vector<double> w;
      for (const auto& [k, c] : options) {
        keys.push_back(&k);
        w.push_back(c);
      }
      solvents = *keys[rng.weighted(w)];
    } else {
      for (std::size_t k = 0; k < 3; ++k) {
        std::string s = pick(prof.levels[idx(CatVar::solvent_1) + k], rng);
        if (!s.empty()) solvents.push_back(s);
      }
      std::sort(solvents.begin(), solvents.end());
      const bool dup = std::adjacent_find(solvents.begin(), solvents.end()) != solvents.end();
      if (solvents.empty() || dup) {
        ++batch.discarded_by_constraint;
        continue;
      }
    }
    const auto ratios = sample_ratios(solvents.size(), rng);
    for (std::size_t k = 0; k < 3; ++k) {
      rec.solvent(k) = k < solvents.size() ? solvents[k] : std::string{};
      rec.ratio(k) = k < solvents.size() ? ratios[k] : 0.0;
    }
    if (opt.constrain_to_observed_tuples && !observed.count({rec.polymer(), solvent_set_key(rec)})) {
      ++batch.discarded_by_constraint;
      continue;
    }
    rec.fiber_diameter = kNaN;
    batch.records.push_back(std::move(rec));
  }
  return batch;
}

/// Linearly independent columns of [1 | X] (pivoted QR); the D-criterion is
/// invariant to the choice of basis for the same column space.
inline Eigen::MatrixXd full_rank_model_matrix(const Eigen::MatrixXd& encoded, std::vector<Eigen::Index>& keep) {
  Eigen::MatrixXd M(encoded.rows(), encoded.cols() + 1);
  M.col(0).setOnes();
  M.rightCols(encoded.cols()) = encoded;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-9);
  const auto rank = qr.rank();
  keep.clear();
  for (Eigen::Index i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()(i));
  std::sort(keep.begin(), keep.end());
  Eigen::MatrixXd out(M.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = M.col(keep[j]);
  return out;
}

}  // namespace detail

/// Generate oversample_factor * n Sobol candidates over the empirical ranges,
/// pick n by D-optimality on the training-fitted encoding, then match each
/// selected candidate to its nearest unused real row (same polymer first).
inline SampleResult sobol_doptimal_sample(const SpinDataset& ds, std::size_t n, const SobolDoptOptions& opt = {}) {
  if (n < 1 || n > ds.size())
    throw Error("sample_size", "sample size " + std::to_string(n) + " outside [1, " + std::to_string(ds.size()) + "]");
  if (!(opt.oversample_factor >= 1.0)) throw Error("oversample_factor", "oversample factor must be >= 1");

  SampleResult out;
  out.method = "sobol-doptimal";
  out.seed = opt.seed;
  const auto target = static_cast<std::size_t>(std::ceil(opt.oversample_factor * static_cast<double>(n) - 1e-9));

  const Recipe recipe = Recipe::fit(ds.records());
  auto batch = detail::make_candidates(ds, target, opt);
  out.log["candidates_requested"] = target;
  out.log["candidates_generated"] = batch.generated;
  out.log["discarded_by_constraint"] = batch.discarded_by_constraint;
  if (batch.records.size() < n)
    throw Error("insufficient_candidates", "only " + std::to_string(batch.records.size()) +
                                               " feasible candidates for a design of " + std::to_string(n));

  std::vector<Eigen::Index> keep;
  const Eigen::MatrixXd X = detail::full_rank_model_matrix(recipe.apply(batch.records), keep);
  out.log["model_columns"] = X.cols();
  if (n < static_cast<std::size_t>(X.cols()))
    throw Error("design_too_small", "design size " + std::to_string(n) + " is below the " +
                                        std::to_string(X.cols()) + " model-matrix columns");
  const DesignSelection sel = federov_select(X, n, opt.seed, opt.fedorov);
  out.log["criterion"] = sel.criterion;
  out.log["exchanges"] = sel.trace.size() - 1;
  out.log["discarded_by_selection"] = batch.records.size() - n;

  // Nearest unused real row in encoded space.
  const Eigen::MatrixXd real = recipe.apply(ds.records());
  const Eigen::MatrixXd cand = recipe.apply(batch.records);
  std::map<std::string, std::vector<std::size_t>> by_polymer;
  for (std::size_t i = 0; i < ds.size(); ++i) by_polymer[ds[i].polymer()].push_back(i);
  std::vector<char> used(ds.size(), 0);
  std::size_t cross_polymer = 0;
  for (auto c : sel.chosen) {
    const auto& pool = by_polymer[batch.records[c].polymer()];
    auto nearest = [&](auto&& rows) {
      std::size_t best = ds.size();
      double bestd = std::numeric_limits<double>::infinity();
      for (auto r : rows) {
        if (used[r]) continue;
        const double dist = (real.row(static_cast<Eigen::Index>(r)) - cand.row(static_cast<Eigen::Index>(c))).squaredNorm();
        if (dist < bestd) {
          bestd = dist;
          best = r;
        }
      }
      return best;
    };
    std::size_t r = nearest(pool);
    if (r == ds.size()) {
      std::vector<std::size_t> all(ds.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      r = nearest(all);
      ++cross_polymer;
    }
    used[r] = 1;
    out.rows.push_back(r);
  }
  out.log["cross_polymer_matches"] = cross_polymer;
  std::sort(out.rows.begin(), out.rows.end());
  return out;
}

/// Stratified Sobol + D-optimal: log-weighted per-polymer budgets, each
/// stratum designed independently with its own seeded stream.
inline SampleResult balanced_sobol_doptimal(const SpinDataset& ds, std::size_t n, SobolDoptOptions opt = {}) {
  const auto alloc = allocate_balanced(ds.polymer_counts(), n);
  SampleResult out;
  out.method = "balanced";
  out.seed = opt.seed;
  const std::uint64_t master = opt.seed;
  nlohmann::json strata = nlohmann::json::object();
  for (const auto& [polymer, np] : alloc.allocation) {
    const auto rows = ds.rows_of(polymer);
    nlohmann::json entry{{"available", rows.size()}, {"allocated", np}};
    if (np == 0) {
      entry["mode"] = "empty";
    } else if (np == rows.size()) {
      entry["mode"] = "all_rows";
      out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    } else {
      const SpinDataset stratum = ds.subset(rows);
      opt.seed = splitmix64(master ^ stream_id(polymer));
      try {
        const auto sub = sobol_doptimal_sample(stratum, np, opt);
        entry["mode"] = "sobol-doptimal";
        entry["design"] = sub.log;
        for (auto r : sub.rows) out.rows.push_back(rows[r]);
      } catch (const Error& e) {
        if (e.code() != "design_too_small" && e.code() != "singular_design")
          throw Error(e.code(), "polymer '" + polymer + "': " + e.what());
        // Budget below the stratum's parameter count: fall back to random rows.
        entry["mode"] = "random_fallback";
        entry["reason"] = e.what();
        for (auto r : sample_random(rows.size(), np, opt.seed)) out.rows.push_back(rows[r]);
      }
    }
    strata[polymer] = std::move(entry);
  }
  std::sort(out.rows.begin(), out.rows.end());
  out.log["strata"] = std::move(strata);
  out.log["capped"] = alloc.capped;
  return out;
}

/// Delimited export of a sample with a provenance header.
inline std::string export_sample(const SpinDataset& ds, const SampleResult& s) {
  std::vector<std::string> comments{"method=" + s.method, "seed=" + std::to_string(s.seed),
                                    "n=" + std::to_string(s.rows.size()), "source_fingerprint=" + ds.fingerprint(),
                                    "log=" + s.log.dump()};
  return write_dataset(ds.subset(s.rows), ',', comments);
}

}  // namespace espin
