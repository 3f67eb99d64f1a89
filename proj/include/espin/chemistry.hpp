#pragma once

// Polymer-solvent solubility and solvent-solvent miscibility rules.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "espin/csv.hpp"
#include "espin/dataset.hpp"

namespace espin {

enum class Rating { OK, COND, NO };

inline std::string_view rating_name(Rating r) {
  switch (r) {
    case Rating::OK: return "OK";
    case Rating::COND: return "COND";
    case Rating::NO: return "NO";
  }
  return "?";
}

inline std::optional<Rating> parse_rating(std::string_view s) {
  const std::string u = to_upper(trim(s));
  if (u == "OK") return Rating::OK;
  if (u == "COND") return Rating::COND;
  if (u == "NO") return Rating::NO;
  return std::nullopt;
}

struct SolubilityEntry {
  Rating rating = Rating::OK;
  std::optional<double> max_pct;
};

/// (polymer, solvent) -> rating. Polymer keys compare case-insensitively,
/// solvents go through the same canonicalizer as dataset ingestion.
class SolubilityTable {
 public:
  explicit SolubilityTable(Canonicalizer canon = {}) : canon_(std::move(canon)) {}

  /// Returns true when an existing entry was replaced.
  bool set(std::string_view polymer, std::string_view solvent, SolubilityEntry e) {
    auto [it, inserted] = entries_.insert_or_assign(key(polymer, solvent), e);
    return !inserted;
  }

  const SolubilityEntry* find(std::string_view polymer, std::string_view solvent) const {
    auto it = entries_.find(key(polymer, solvent));
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return entries_.size(); }
  const Canonicalizer& canonicalizer() const { return canon_; }

  std::map<std::string, std::size_t> counts() const {
    std::map<std::string, std::size_t> c{{"OK", 0}, {"COND", 0}, {"NO", 0}};
    for (const auto& [k, e] : entries_) ++c[std::string(rating_name(e.rating))];
    return c;
  }

  /// Solvents rated for a polymer (any rating).
  std::vector<std::string> solvents_for(std::string_view polymer) const {
    std::vector<std::string> out;
    const std::string p = to_upper(Canonicalizer::polymer(polymer));
    for (const auto& [k, e] : entries_)
      if (k.first == p) out.push_back(k.second);
    return out;
  }

 private:
  std::pair<std::string, std::string> key(std::string_view polymer, std::string_view solvent) const {
    return {to_upper(Canonicalizer::polymer(polymer)), canon_.solvent(solvent)};
  }

  Canonicalizer canon_;
  std::map<std::pair<std::string, std::string>, SolubilityEntry> entries_;
};

/// Unordered incompatible solvent pairs.
class IncompatibilityTable {
 public:
  explicit IncompatibilityTable(Canonicalizer canon = {}) : canon_(std::move(canon)) {}

  /// Self-pairs are ignored; returns false for them.
  bool add(std::string_view a, std::string_view b) {
    auto k = key(a, b);
    if (k.first == k.second) return false;
    pairs_.insert(std::move(k));
    return true;
  }

  bool incompatible(std::string_view a, std::string_view b) const { return pairs_.count(key(a, b)) > 0; }
  std::size_t size() const { return pairs_.size(); }
  const std::set<std::pair<std::string, std::string>>& pairs() const { return pairs_; }

  /// Conservative built-in list of immiscible pairs.
  static IncompatibilityTable fallback(Canonicalizer canon = {}) {
    IncompatibilityTable t(std::move(canon));
    static const char* const kPairs[][2] = {
        {"WATER", "CHLOROFORM"}, {"WATER", "DCM"},     {"WATER", "TOLUENE"},     {"WATER", "HEXANE"},
        {"WATER", "CYCLOHEXANE"}, {"DMSO", "HEXANE"},  {"DMF", "HEXANE"},        {"METHANOL", "HEXANE"},
        {"ACETONITRILE", "HEXANE"}, {"DMSO", "CYCLOHEXANE"}, {"DMF", "CYCLOHEXANE"}, {"WATER", "ETHYL ACETATE"},
    };
    for (const auto& p : kPairs) t.add(p[0], p[1]);
    return t;
  }

 private:
  std::pair<std::string, std::string> key(std::string_view a, std::string_view b) const {
    std::string x = canon_.solvent(a), y = canon_.solvent(b);
    if (y < x) std::swap(x, y);
    return {x, y};
  }

  Canonicalizer canon_;
  std::set<std::pair<std::string, std::string>> pairs_;
};

enum class Strictness { strict, balanced, lax };

struct StrictnessPolicy {
  Strictness mode = Strictness::balanced;
  double no_allow_pct = 0.0;

  /// COND cap applied when no max_pct is given.
  double thr_strict() const {
    switch (mode) {
      case Strictness::strict: return 0.0;
      case Strictness::balanced: return 20.0;
      case Strictness::lax: return 30.0;
    }
    return 0.0;
  }

  static Strictness parse_mode(std::string_view s) {
    const std::string l = to_lower(trim(s));
    if (l == "strict") return Strictness::strict;
    if (l == "balanced" || l == "balance") return Strictness::balanced;
    if (l == "lax") return Strictness::lax;
    throw Error("strictness", "unknown strictness '" + std::string(s) + "' (strict, balanced, lax)");
  }
};

inline std::string_view strictness_name(Strictness s) {
  switch (s) {
    case Strictness::strict: return "strict";
    case Strictness::balanced: return "balanced";
    case Strictness::lax: return "lax";
  }
  return "?";
}

struct PairCheck {
  bool feasible = true;
  Rating rating = Rating::OK;
  bool known = true;  ///< false: pair absent from the table, treated as COND without max_pct
  std::string reason;
};

inline PairCheck pair_feasible(std::string_view polymer, std::string_view solvent, double ratio,
                               const StrictnessPolicy& policy, const SolubilityTable& table) {
  PairCheck c;
  const SolubilityEntry* e = table.find(polymer, solvent);
  SolubilityEntry entry = e ? *e : SolubilityEntry{Rating::COND, std::nullopt};
  c.known = e != nullptr;
  c.rating = entry.rating;
  double limit = 100.0;
  std::string basis;
  switch (entry.rating) {
    case Rating::NO:
      limit = policy.no_allow_pct;
      basis = "NO rating, no_allow_pct";
      break;
    case Rating::COND:
      if (entry.max_pct) {
        limit = *entry.max_pct;
        basis = "COND max_pct";
      } else {
        limit = policy.thr_strict();
        basis = std::string(c.known ? "COND" : "unrated pair") + ", " + std::string(strictness_name(policy.mode)) + " cap";
      }
      break;
    case Rating::OK:
      break;
  }
  c.feasible = ratio <= limit;
  if (!c.feasible)
    c.reason = std::string(solvent) + " at " + format_double(ratio) + "% exceeds " + format_double(limit) + "% (" +
               basis + ")";
  return c;
}

struct MixtureCheck {
  bool accepted = true;
  std::vector<std::string> reasons;
  std::vector<std::string> unknown_pairs;  ///< solvents without a table entry
};

/// Acceptance of a solvent mixture (solvent, percent) for a polymer: every
/// solvent pair miscible and every solvent within its solubility limit.
inline MixtureCheck mixture_feasible(const std::vector<std::pair<std::string, double>>& mix, std::string_view polymer,
                                     const StrictnessPolicy& policy, const SolubilityTable& sol,
                                     const IncompatibilityTable& inc) {
  MixtureCheck m;
  std::vector<std::pair<std::string, double>> sorted = mix;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = i + 1; j < sorted.size(); ++j)
      if (inc.incompatible(sorted[i].first, sorted[j].first)) {
        m.accepted = false;
        m.reasons.push_back(sorted[i].first + " and " + sorted[j].first + " are incompatible");
      }
  for (const auto& [s, r] : sorted) {
    const PairCheck c = pair_feasible(polymer, s, r, policy, sol);
    if (!c.known) m.unknown_pairs.push_back(s);
    if (!c.feasible) {
      m.accepted = false;
      m.reasons.push_back(c.reason);
    }
  }
  return m;
}

inline MixtureCheck mixture_feasible(const SpinRecord& r, const StrictnessPolicy& policy, const SolubilityTable& sol,
                                     const IncompatibilityTable& inc) {
  return mixture_feasible(r.solvent_mix(), r.polymer(), policy, sol, inc);
}

/// NO if any solvent is NO, else COND if any is COND (unrated counts as
/// COND), else OK.
inline Rating row_flag(std::string_view polymer, const std::vector<std::string>& solvents, const SolubilityTable& sol) {
  Rating worst = Rating::OK;
  for (const auto& s : solvents) {
    if (s.empty()) continue;
    const SolubilityEntry* e = sol.find(polymer, s);
    const Rating r = e ? e->rating : Rating::COND;
    if (static_cast<int>(r) > static_cast<int>(worst)) worst = r;
  }
  return worst;
}

inline Rating row_flag(const SpinRecord& r, const SolubilityTable& sol) {
  return row_flag(r.polymer(), {r.solvent(0), r.solvent(1), r.solvent(2)}, sol);
}

// ---------------------------------------------------------------------------
// Loading

struct FeasibilityTables {
  SolubilityTable solubility;
  IncompatibilityTable incompatibility;
  bool fallback_incompatibility = false;
  std::vector<std::string> warnings;

  nlohmann::json status() const {
    return {{"counts", solubility.counts()},
            {"entries", solubility.size()},
            {"incompatible_pairs", incompatibility.size()},
            {"fallback_incompatibility", fallback_incompatibility},
            {"warnings", warnings}};
  }
};

namespace detail {

inline std::optional<std::size_t> column_of(const std::vector<std::string>& header,
                                            std::initializer_list<std::string_view> names) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h = to_lower(trim(header[i]));
    for (auto n : names)
      if (h == n) return i;
  }
  return std::nullopt;
}

}  // namespace detail

/// Solubility table from delimited text with columns polymer, solvent,
/// rating (or status) and optional max_pct.
inline SolubilityTable parse_solubility(std::string_view text, const Canonicalizer& canon,
                                        std::vector<std::string>* warnings = nullptr) {
  const csv::Table t = csv::parse(text);
  const auto pc = detail::column_of(t.header, {"polymer"});
  const auto sc = detail::column_of(t.header, {"solvent"});
  const auto rc = detail::column_of(t.header, {"rating", "status"});
  const auto mc = detail::column_of(t.header, {"max_pct", "max pct", "max_percent"});
  if (!pc || !sc || !rc) throw Error("missing_column", "solubility file needs polymer, solvent and rating columns");
  SolubilityTable table(canon);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t line = i + 1;
    auto cell = [&](std::size_t c) { return c < row.size() ? trim(row[c]) : std::string(); };
    const auto rating = parse_rating(cell(*rc));
    if (!rating)
      throw Error("malformed_rating", "row " + std::to_string(line) + ": rating '" + cell(*rc) +
                                          "' is not OK, COND or NO");
    SolubilityEntry e{*rating, std::nullopt};
    if (mc && !is_missing_token(cell(*mc))) {
      const double v = detail::parse_number(cell(*mc), line, "max_pct");
      if (!(v > 0.0 && v <= 100.0))
        throw Error("malformed_max_pct", "row " + std::to_string(line) + ": max_pct must lie in (0, 100]");
      e.max_pct = v;
    }
    if (table.set(cell(*pc), cell(*sc), e) && warnings)
      warnings->push_back("row " + std::to_string(line) + ": duplicate (" + cell(*pc) + ", " + cell(*sc) +
                          "); last entry wins");
  }
  return table;
}

inline IncompatibilityTable parse_incompatibility(std::string_view text, const Canonicalizer& canon) {
  const csv::Table t = csv::parse(text);
  const auto ac = detail::column_of(t.header, {"solvent_a", "solvent a", "a"});
  const auto bc = detail::column_of(t.header, {"solvent_b", "solvent b", "b"});
  if (!ac || !bc) throw Error("missing_column", "incompatibility file needs solvent_a and solvent_b columns");
  IncompatibilityTable table(canon);
  for (const auto& row : t.rows)
    if (*ac < row.size() && *bc < row.size()) table.add(trim(row[*ac]), trim(row[*bc]));
  return table;
}

/// Either path may be empty. Without an incompatibility file the built-in
/// fallback list is active and flagged.
inline FeasibilityTables load_feasibility(const std::string& solubility_path, const std::string& incompatibility_path,
                                          const Canonicalizer& canon = {}) {
  FeasibilityTables t{SolubilityTable(canon), IncompatibilityTable(canon), false, {}};
  if (!solubility_path.empty()) t.solubility = parse_solubility(csv::read_file(solubility_path), canon, &t.warnings);
  if (!incompatibility_path.empty() && std::filesystem::exists(incompatibility_path)) {
    t.incompatibility = parse_incompatibility(csv::read_file(incompatibility_path), canon);
  } else {
    t.incompatibility = IncompatibilityTable::fallback(canon);
    t.fallback_incompatibility = true;
    t.warnings.push_back("incompatibility file absent; built-in fallback list active");
  }
  return t;
}

}  // namespace espin
