#pragma once

// Electrospinning records: schema, ingestion with header/solvent
// harmonization, descriptive statistics and per-polymer empirical profiles.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "espin/core.hpp"
#include "espin/csv.hpp"
#include "espin/stats.hpp"

namespace espin {

// ---------------------------------------------------------------------------
// Schema

enum class NumVar : std::size_t {
  solvent1_ratio,
  solvent2_ratio,
  solvent3_ratio,
  solution_concentration,
  needle_diameter,
  rotation_speed,
  voltage,
  flow_rate,
  distance,
  temperature,
  humidity,
};
inline constexpr std::size_t kNumVars = 11;
/// First non-ratio numeric variable; [kFirstOperating, kNumVars) are the
/// operating conditions sampled independently of the solvent composition.
inline constexpr std::size_t kFirstOperating = 3;

enum class CatVar : std::size_t { polymer, solvent_1, solvent_2, solvent_3, collector_type };
inline constexpr std::size_t kCatVars = 5;

inline constexpr std::array<std::string_view, kNumVars> kNumNames = {
    "solvent1_ratio", "solvent2_ratio",  "solvent3_ratio", "solution_concentration",
    "needle_diameter", "rotation_speed", "voltage",        "flow_rate",
    "distance",        "temperature",    "humidity"};

inline constexpr std::array<std::string_view, kCatVars> kCatNames = {
    "polymer", "solvent_1", "solvent_2", "solvent_3", "collector_type"};

inline constexpr std::string_view kOutcomeName = "fiber_diameter";
inline constexpr std::string_view kDoiName = "doi";
inline constexpr int kSchemaVersion = 1;

inline constexpr std::size_t idx(NumVar v) { return static_cast<std::size_t>(v); }
inline constexpr std::size_t idx(CatVar v) { return static_cast<std::size_t>(v); }

/// Canonical column order used by every writer.
inline std::vector<std::string> canonical_header() {
  std::vector<std::string> h{std::string(kDoiName), "polymer", "solvent_1", "solvent_2", "solvent_3",
                             "solvent1_ratio", "solvent2_ratio", "solvent3_ratio"};
  for (std::size_t i = kFirstOperating; i < kNumVars; ++i) {
    if (i == idx(NumVar::rotation_speed)) h.emplace_back("collector_type");
    h.emplace_back(kNumNames[i]);
  }
  h.emplace_back(kOutcomeName);
  return h;
}

inline std::optional<std::size_t> find_numeric(std::string_view name) {
  for (std::size_t i = 0; i < kNumVars; ++i)
    if (kNumNames[i] == name) return i;
  return std::nullopt;
}

inline std::optional<std::size_t> find_categorical(std::string_view name) {
  for (std::size_t i = 0; i < kCatVars; ++i)
    if (kCatNames[i] == name) return i;
  return std::nullopt;
}

/// One experimental observation. Missing numerics are NaN; absent
/// categoricals are empty strings.
struct SpinRecord {
  std::string doi;
  std::array<std::string, kCatVars> cat{};
  std::array<double, kNumVars> num{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  double fiber_diameter = kNaN;

  const std::string& polymer() const { return cat[idx(CatVar::polymer)]; }
  const std::string& solvent(std::size_t slot) const { return cat[idx(CatVar::solvent_1) + slot]; }
  std::string& solvent(std::size_t slot) { return cat[idx(CatVar::solvent_1) + slot]; }
  double ratio(std::size_t slot) const { return num[slot]; }
  double& ratio(std::size_t slot) { return num[slot]; }
  const std::string& collector() const { return cat[idx(CatVar::collector_type)]; }

  std::size_t solvent_count() const {
    std::size_t k = 0;
    for (std::size_t s = 0; s < 3; ++s) k += solvent(s).empty() ? 0 : 1;
    return k;
  }

  /// Present solvents sorted by name, each with its ratio.
  std::vector<std::pair<std::string, double>> solvent_mix() const {
    std::vector<std::pair<std::string, double>> mix;
    for (std::size_t s = 0; s < 3; ++s)
      if (!solvent(s).empty()) mix.emplace_back(solvent(s), ratio(s));
    std::sort(mix.begin(), mix.end());
    return mix;
  }

  bool operator==(const SpinRecord& o) const {
    auto same = [](double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); };
    for (std::size_t i = 0; i < kNumVars; ++i)
      if (!same(num[i], o.num[i])) return false;
    return doi == o.doi && cat == o.cat && same(fiber_diameter, o.fiber_diameter);
  }
};

/// Sorted, de-duplicated solvent set of a record, used as a chemistry tuple key.
inline std::string solvent_set_key(const SpinRecord& r) {
  std::vector<std::string> names;
  for (std::size_t s = 0; s < 3; ++s)
    if (!r.solvent(s).empty()) names.push_back(r.solvent(s));
  std::sort(names.begin(), names.end());
  std::string key;
  for (const auto& n : names) key += n + "|";
  return key;
}

// ---------------------------------------------------------------------------
// Name harmonization

/// Header and solvent alias maps. Headers are matched case-insensitively
/// after whitespace squashing; solvents are upper-cased before lookup.
class Canonicalizer {
 public:
  Canonicalizer() {
    for (const auto& [raw, canon] : builtin_headers()) add_header_alias(raw, canon);
    for (const auto& [raw, canon] : builtin_solvents()) add_solvent_alias(raw, canon);
  }

  /// Merge a JSON sidecar of the form {"headers": {...}, "solvents": {...}}.
  void merge_json(const nlohmann::json& j) {
    if (j.contains("headers"))
      for (const auto& [k, v] : j.at("headers").items()) add_header_alias(k, v.get<std::string>());
    if (j.contains("solvents"))
      for (const auto& [k, v] : j.at("solvents").items()) add_solvent_alias(k, v.get<std::string>());
  }

  static Canonicalizer from_file(const std::string& path) {
    Canonicalizer c;
    try {
      c.merge_json(nlohmann::json::parse(csv::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw Error("alias_map", "malformed alias map '" + path + "': " + e.what());
    }
    return c;
  }

  void add_header_alias(std::string_view raw, std::string_view canonical) {
    headers_[header_key(raw)] = std::string(canonical);
  }

  void add_solvent_alias(std::string_view raw, std::string_view canonical) {
    solvents_[to_upper(squash_spaces(raw))] = to_upper(squash_spaces(canonical));
  }

  /// Canonical column name, or nullopt if the header is not part of the schema.
  std::optional<std::string> header(std::string_view raw) const {
    const std::string key = header_key(raw);
    for (const auto& name : canonical_header())
      if (name == key) return name;
    if (auto it = headers_.find(key); it != headers_.end()) return it->second;
    std::string underscored = key;
    for (auto& c : underscored)
      if (c == ' ' || c == '-') c = '_';
    for (const auto& name : canonical_header())
      if (name == underscored) return name;
    return std::nullopt;
  }

  std::string solvent(std::string_view raw) const {
    const std::string key = to_upper(squash_spaces(raw));
    if (key.empty()) return key;
    if (auto it = solvents_.find(key); it != solvents_.end()) return it->second;
    return key;
  }

  static std::string polymer(std::string_view raw) { return squash_spaces(raw); }

 private:
  static std::string header_key(std::string_view raw) { return to_lower(squash_spaces(raw)); }

  static const std::vector<std::pair<std::string, std::string>>& builtin_headers() {
    static const std::vector<std::pair<std::string, std::string>> m = {
        {"document identifier", "doi"},
        {"solvent 1", "solvent_1"},
        {"solvent 2", "solvent_2"},
        {"solvent 3", "solvent_3"},
        {"solvent 1 ratio", "solvent1_ratio"},
        {"solvent 2 ratio", "solvent2_ratio"},
        {"solvent 3 ratio", "solvent3_ratio"},
        {"solvent_1_ratio", "solvent1_ratio"},
        {"solvent_2_ratio", "solvent2_ratio"},
        {"solvent_3_ratio", "solvent3_ratio"},
        {"concentration", "solution_concentration"},
        {"polymer concentration (%)", "solution_concentration"},
        {"solution concentration (%)", "solution_concentration"},
        {"needle gauge", "needle_diameter"},
        {"needle diameter (mm)", "needle_diameter"},
        {"collector", "collector_type"},
        {"rotation speed (rpm)", "rotation_speed"},
        {"voltage (kv)", "voltage"},
        {"applied voltage (kv)", "voltage"},
        {"flow rate (ml/h)", "flow_rate"},
        {"tip to collector distance (cm)", "distance"},
        {"tip-to-collector distance (cm)", "distance"},
        {"temperature (°c)", "temperature"},
        {"temperature (c)", "temperature"},
        {"humidity (%)", "humidity"},
        {"relative humidity (%)", "humidity"},
        {"fiber diameter (nm)", "fiber_diameter"},
        {"diameter", "fiber_diameter"},
    };
    return m;
  }

  static const std::vector<std::pair<std::string, std::string>>& builtin_solvents() {
    static const std::vector<std::pair<std::string, std::string>> m = {
        {"N,N-DIMETHYLFORMAMIDE", "DMF"},
        {"DIMETHYLFORMAMIDE", "DMF"},
        {"DIMETHYL FORMAMIDE", "DMF"},
        {"N,N-DIMETHYLACETAMIDE", "DMAC"},
        {"DIMETHYLACETAMIDE", "DMAC"},
        {"DMA", "DMAC"},
        {"DICHLOROMETHANE", "DCM"},
        {"METHYLENE CHLORIDE", "DCM"},
        {"TRICHLOROMETHANE", "CHLOROFORM"},
        {"TETRAHYDROFURAN", "THF"},
        {"DIMETHYL SULFOXIDE", "DMSO"},
        {"DIMETHYLSULFOXIDE", "DMSO"},
        {"H2O", "WATER"},
        {"DISTILLED WATER", "WATER"},
        {"DEIONIZED WATER", "WATER"},
        {"DI WATER", "WATER"},
        {"ETOH", "ETHANOL"},
        {"MEOH", "METHANOL"},
        {"HEXAFLUOROISOPROPANOL", "HFIP"},
        {"1,1,1,3,3,3-HEXAFLUORO-2-PROPANOL", "HFIP"},
        {"TRIFLUOROETHANOL", "TFE"},
        {"2,2,2-TRIFLUOROETHANOL", "TFE"},
        {"TRIFLUOROACETIC ACID", "TFA"},
        {"HAC", "ACETIC ACID"},
        {"GLACIAL ACETIC ACID", "ACETIC ACID"},
        {"PROPANONE", "ACETONE"},
    };
    return m;
  }

  std::map<std::string, std::string> headers_;
  std::map<std::string, std::string> solvents_;
};

// ---------------------------------------------------------------------------
// Dataset

struct LoadReport {
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::map<std::string, std::size_t> drops;  ///< reason -> count
  std::vector<std::string> ignored_columns;

  nlohmann::json to_json() const {
    return {{"rows_in", rows_in}, {"rows_out", rows_out}, {"drops", drops}, {"ignored_columns", ignored_columns}};
  }
};

/// Immutable table of validated records.
class SpinDataset {
 public:
  SpinDataset() = default;

  SpinDataset(std::vector<SpinRecord> records, std::vector<std::pair<std::string, std::string>> log = {},
              LoadReport report = {})
      : records_(std::make_shared<const std::vector<SpinRecord>>(std::move(records))),
        log_(std::move(log)),
        report_(std::move(report)) {
    for (std::size_t i = 0; i < records_->size(); ++i) validate((*records_)[i], i);
  }

  const std::vector<SpinRecord>& records() const { return records_ ? *records_ : empty(); }
  std::size_t size() const { return records().size(); }
  bool empty_set() const { return size() == 0; }
  const SpinRecord& operator[](std::size_t i) const { return records()[i]; }
  int schema_version() const { return kSchemaVersion; }
  const std::vector<std::pair<std::string, std::string>>& canonicalization_log() const { return log_; }
  const LoadReport& load_report() const { return report_; }

  SpinDataset subset(std::span<const std::size_t> indices) const {
    std::vector<SpinRecord> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(records().at(i));
    return SpinDataset(std::move(out), log_);
  }

  /// Sorted distinct polymer names.
  std::vector<std::string> polymers() const {
    std::set<std::string> s;
    for (const auto& r : records()) s.insert(r.polymer());
    return {s.begin(), s.end()};
  }

  std::map<std::string, std::size_t> polymer_counts() const {
    std::map<std::string, std::size_t> m;
    for (const auto& r : records()) ++m[r.polymer()];
    return m;
  }

  std::vector<std::size_t> rows_of(std::string_view polymer) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (records()[i].polymer() == polymer) out.push_back(i);
    return out;
  }

  std::vector<double> outcomes() const {
    std::vector<double> y;
    y.reserve(size());
    for (const auto& r : records()) y.push_back(r.fiber_diameter);
    return y;
  }

  /// Content hash of the canonical serialization.
  std::string fingerprint() const;

  static void validate(const SpinRecord& r, std::size_t row) {
    auto fail = [&](const std::string& what) {
      throw Error("invalid_record", "record " + std::to_string(row) + ": " + what);
    };
    if (r.polymer().empty()) fail("empty polymer");
    if (!std::isfinite(r.fiber_diameter) || r.fiber_diameter <= 0) fail("fiber_diameter must be finite and > 0");
    double sum = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      const double v = r.ratio(s);
      if (r.solvent(s).empty()) {
        if (v != 0.0) fail("absent solvent with nonzero ratio");
      } else if (!(v >= 0.0 && v <= 100.0)) {
        fail("solvent ratio outside [0,100]");
      }
      sum += v;
    }
    if (r.solvent_count() == 0) fail("no solvent");
    if (std::fabs(sum - 100.0) > 1e-6) fail("solvent ratios do not sum to 100");
  }

 private:
  static const std::vector<SpinRecord>& empty() {
    static const std::vector<SpinRecord> e;
    return e;
  }

  std::shared_ptr<const std::vector<SpinRecord>> records_;
  std::vector<std::pair<std::string, std::string>> log_;
  LoadReport report_;
};

struct LoadOptions {
  Canonicalizer names;
  /// Row offset reported in error messages (1 = first data row).
  std::size_t first_row_number = 1;
};

namespace detail {

inline double parse_number(const std::string& cell, std::size_t row, std::string_view column) {
  if (is_missing_token(cell)) return kNaN;
  const std::string t = trim(cell);
  double v = 0;
  const char* b = t.data();
  const char* e = t.data() + t.size();
  if (*b == '+') ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw Error("unparseable_numeric",
                "row " + std::to_string(row) + ", column '" + std::string(column) + "': cannot parse '" + t + "'");
  return v;
}

/// Fill absent ratios with 0 and rescale present ones to sum to 100.
/// Returns false when the row has no solvent or a negative ratio.
inline bool normalize_ratios(SpinRecord& r, std::string& reason) {
  double sum = 0;
  std::size_t present = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    if (r.solvent(s).empty()) {
      r.ratio(s) = 0.0;
      continue;
    }
    ++present;
    if (std::isnan(r.ratio(s))) r.ratio(s) = 0.0;
    if (r.ratio(s) < 0 || !std::isfinite(r.ratio(s))) {
      reason = "invalid_ratio";
      return false;
    }
    sum += r.ratio(s);
  }
  if (present == 0) {
    reason = "no_solvent";
    return false;
  }
  if (sum == 0.0) {
    for (std::size_t s = 0; s < 3; ++s)
      if (!r.solvent(s).empty()) r.ratio(s) = 100.0 / static_cast<double>(present);
  } else if (std::fabs(sum - 100.0) > 1e-9) {
    for (std::size_t s = 0; s < 3; ++s) r.ratio(s) = r.ratio(s) * 100.0 / sum;
  }
  return true;
}

}  // namespace detail

/// Parse delimited text into a harmonized dataset.
inline SpinDataset load_dataset_text(std::string_view text, const LoadOptions& opt = {}) {
  const csv::Table table = csv::parse(text);

  // column index -> canonical name
  std::vector<std::optional<std::string>> mapping;
  LoadReport report;
  std::set<std::string> seen;
  for (const auto& h : table.header) {
    auto canon = opt.names.header(h);
    if (canon && !seen.insert(*canon).second) canon.reset();
    if (!canon) report.ignored_columns.push_back(h);
    mapping.push_back(std::move(canon));
  }
  if (!seen.count(std::string(kOutcomeName)))
    throw Error("missing_outcome", "no fiber_diameter column in header");
  if (!seen.count("polymer")) throw Error("missing_column", "no polymer column in header");

  std::vector<SpinRecord> records;
  std::set<std::pair<std::string, std::string>> log_set;
  std::vector<std::pair<std::string, std::string>> log;
  auto note = [&](const std::string& raw, const std::string& canon) {
    if (raw != canon && log_set.emplace(raw, canon).second) log.emplace_back(raw, canon);
  };

  report.rows_in = table.rows.size();
  for (std::size_t ri = 0; ri < table.rows.size(); ++ri) {
    const auto& row = table.rows[ri];
    const std::size_t row_no = ri + opt.first_row_number;
    SpinRecord rec;
    for (std::size_t c = 0; c < mapping.size(); ++c) {
      if (!mapping[c]) continue;
      const std::string& name = *mapping[c];
      const std::string cell = c < row.size() ? row[c] : std::string{};
      if (name == kDoiName) {
        rec.doi = trim(cell);
      } else if (name == kOutcomeName) {
        rec.fiber_diameter = detail::parse_number(cell, row_no, name);
      } else if (auto ci = find_categorical(name)) {
        if (is_missing_token(cell)) continue;
        const std::string raw = squash_spaces(cell);
        std::string canon;
        if (*ci == idx(CatVar::polymer)) {
          canon = Canonicalizer::polymer(raw);
        } else if (*ci == idx(CatVar::collector_type)) {
          canon = raw;
        } else {
          canon = opt.names.solvent(raw);
          note(raw, canon);
        }
        rec.cat[*ci] = canon;
      } else if (auto ni = find_numeric(name)) {
        rec.num[*ni] = detail::parse_number(cell, row_no, name);
      }
    }
    if (!std::isfinite(rec.fiber_diameter) || rec.fiber_diameter <= 0) {
      ++report.drops["nonfinite_outcome"];
      continue;
    }
    if (rec.polymer().empty()) {
      ++report.drops["missing_polymer"];
      continue;
    }
    std::string reason;
    if (!detail::normalize_ratios(rec, reason)) {
      ++report.drops[reason];
      continue;
    }
    for (std::size_t i = kFirstOperating; i < kNumVars; ++i)
      if (std::isinf(rec.num[i]))
        throw Error("unparseable_numeric", "row " + std::to_string(row_no) + ", column '" +
                                               std::string(kNumNames[i]) + "': non-finite value");
    records.push_back(std::move(rec));
  }
  report.rows_out = records.size();
  if (records.empty()) throw Error("no_usable_rows", "dataset has zero usable rows");
  return SpinDataset(std::move(records), std::move(log), std::move(report));
}

inline SpinDataset load_dataset(const std::string& path, const LoadOptions& opt = {}) {
  return load_dataset_text(csv::read_file(path), opt);
}

/// Canonical delimited serialization (round-trips bit-exactly through load).
inline std::string write_dataset(const SpinDataset& ds, char delim = ',',
                                 const std::vector<std::string>& comments = {}) {
  csv::Writer w(delim);
  for (const auto& c : comments) w.comment(c);
  const auto header = canonical_header();
  w.row(header);
  for (const auto& r : ds.records()) {
    std::vector<std::string> fields;
    fields.reserve(header.size());
    for (const auto& h : header) {
      if (h == kDoiName) {
        fields.push_back(r.doi);
      } else if (h == kOutcomeName) {
        fields.push_back(format_double(r.fiber_diameter));
      } else if (auto ci = find_categorical(h)) {
        fields.push_back(r.cat[*ci]);
      } else {
        fields.push_back(format_double(r.num[*find_numeric(h)]));
      }
    }
    w.row(fields);
  }
  return w.str();
}

inline std::string SpinDataset::fingerprint() const { return hex64(fnv1a64(write_dataset(*this))); }

// ---------------------------------------------------------------------------
// Descriptive statistics

struct PolymerSummary {
  std::string polymer;  ///< "TOTAL" for the overall row
  stats::Summary stats;
};

inline std::vector<PolymerSummary> describe(const SpinDataset& ds, bool group_by_polymer = true) {
  if (ds.empty_set()) throw Error("empty_dataset", "describe on empty dataset");
  std::vector<PolymerSummary> out;
  if (group_by_polymer) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : ds.records()) groups[r.polymer()].push_back(r.fiber_diameter);
    for (auto& [p, v] : groups) out.push_back({p, stats::summarize(std::move(v))});
  }
  out.push_back({"TOTAL", stats::summarize(ds.outcomes())});
  return out;
}

/// Columns: Polymer, Mean, Std dev, Q1, Median, Q3, Kurtosis, Skewness, n.
inline std::string export_describe(const std::vector<PolymerSummary>& rows, char delim = ',') {
  csv::Writer w(delim);
  w.row({"Polymer", "Mean", "Std dev", "Q1 (25%)", "Median (50%)", "Q3 (75%)", "Kurtosis", "Skewness", "n"});
  auto opt = [](const std::optional<double>& v) { return v ? format_fixed(*v, 3) : std::string("NA"); };
  for (const auto& r : rows) {
    const auto& s = r.stats;
    w.row({r.polymer, format_fixed(s.mean, 3), format_fixed(s.std_dev, 3), format_fixed(s.q1, 3),
           format_fixed(s.median, 3), format_fixed(s.q3, 3), opt(s.excess_kurtosis), opt(s.skewness),
           std::to_string(s.n)});
  }
  return w.str();
}

// ---------------------------------------------------------------------------
// Empirical profiles

struct Range {
  double min = kNaN;
  double max = kNaN;
  bool valid() const { return std::isfinite(min) && std::isfinite(max); }
};

/// Per-polymer empirical distribution summary used by samplers and IMC.
struct EmpiricalProfile {
  std::string polymer;
  /// Set when the polymer subset was too small and the full dataset was used.
  bool fallback = false;
  std::vector<std::size_t> rows;
  std::array<Range, kNumVars> ranges{};
  /// Level -> probability for each categorical (absent level is "").
  std::array<std::map<std::string, double>, kCatVars> levels{};
  /// Solvents seen in any slot -> relative frequency.
  std::map<std::string, double> solvent_pool;
  /// Probability of 1, 2, 3 solvents.
  std::array<double, 3> solvent_count_freq{};
};

inline EmpiricalProfile empirical_ranges(const SpinDataset& ds, std::string_view polymer,
                                         std::size_t min_rows = 1) {
  EmpiricalProfile p;
  p.polymer = std::string(polymer);
  p.rows = ds.rows_of(polymer);
  if (p.rows.size() < min_rows || p.rows.empty()) {
    p.fallback = true;
    p.rows.resize(ds.size());
    std::iota(p.rows.begin(), p.rows.end(), std::size_t{0});
  }
  std::array<std::map<std::string, std::size_t>, kCatVars> counts;
  std::map<std::string, std::size_t> pool;
  std::array<std::size_t, 3> kcount{};
  std::size_t pool_total = 0;
  for (auto i : p.rows) {
    const auto& r = ds[i];
    for (std::size_t v = 0; v < kNumVars; ++v) {
      const double x = r.num[v];
      if (!std::isfinite(x)) continue;
      auto& rg = p.ranges[v];
      rg.min = std::isnan(rg.min) ? x : std::min(rg.min, x);
      rg.max = std::isnan(rg.max) ? x : std::max(rg.max, x);
    }
    for (std::size_t c = 0; c < kCatVars; ++c) ++counts[c][r.cat[c]];
    for (std::size_t s = 0; s < 3; ++s)
      if (!r.solvent(s).empty()) {
        ++pool[r.solvent(s)];
        ++pool_total;
      }
    if (auto k = r.solvent_count(); k >= 1) ++kcount[k - 1];
  }
  const double n = static_cast<double>(p.rows.size());
  for (std::size_t c = 0; c < kCatVars; ++c)
    for (const auto& [level, cnt] : counts[c]) p.levels[c][level] = static_cast<double>(cnt) / n;
  for (const auto& [s, cnt] : pool) p.solvent_pool[s] = static_cast<double>(cnt) / static_cast<double>(pool_total);
  for (std::size_t k = 0; k < 3; ++k) p.solvent_count_freq[k] = static_cast<double>(kcount[k]) / n;
  return p;
}

/// (polymer, sorted solvent set) combinations present in the dataset.
inline std::set<std::pair<std::string, std::string>> observed_tuples(const SpinDataset& ds) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& r : ds.records()) out.emplace(r.polymer(), solvent_set_key(r));
  return out;
}

}  // namespace espin
