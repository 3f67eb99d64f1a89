#pragma once

// Synthetic electrospinning data with a known nonlinear diameter law.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "espin/dataset.hpp"
#include "espin/sampling.hpp"

namespace espin::synthetic {

struct PolymerSpec {
  std::string_view name;
  double weight;  ///< relative frequency
  double base;    ///< nm
  std::array<std::string_view, 4> solvents;  ///< empty entries unused
};

inline constexpr std::array<PolymerSpec, 8> kPolymers = {{
    {"PAN", 0.25, 300, {"DMF", "DMSO", "DMAC", ""}},
    {"PVA", 0.15, 250, {"WATER", "ETHANOL", "", ""}},
    {"PCL", 0.15, 420, {"CHLOROFORM", "DCM", "DMF", "METHANOL"}},
    {"PLA", 0.12, 380, {"DCM", "CHLOROFORM", "DMF", "ACETONE"}},
    {"CA", 0.10, 500, {"ACETONE", "DMAC", "WATER", ""}},
    {"PVDF", 0.10, 330, {"DMF", "ACETONE", "DMAC", ""}},
    {"PET", 0.08, 460, {"TFA", "DCM", "HFIP", ""}},
    {"PS", 0.05, 520, {"THF", "DMF", "TOLUENE", ""}},
}};

struct Bounds {
  double lo, hi;
};

/// Operating-variable bounds, indexed like kNumNames from kFirstOperating.
inline constexpr std::array<Bounds, kNumVars - kFirstOperating> kBounds = {{
    {5, 25},     // solution_concentration, %
    {0.3, 1.2},  // needle_diameter, mm
    {0, 3000},   // rotation_speed, rpm
    {8, 30},     // voltage, kV
    {0.2, 3.0},  // flow_rate, mL/h
    {8, 25},     // distance, cm
    {18, 35},    // temperature, C
    {20, 70},    // humidity, %
}};

inline double unit(const SpinRecord& r, NumVar v) {
  const auto& b = kBounds[idx(v) - kFirstOperating];
  return (r.num[idx(v)] - b.lo) / (b.hi - b.lo);
}

inline double polymer_base(std::string_view polymer) {
  for (const auto& p : kPolymers)
    if (p.name == polymer) return p.base;
  return 350;
}

/// Noise-free diameter (nm). Missing humidity counts as mid-range.
inline double law(const SpinRecord& r) {
  const double c = unit(r, NumVar::solution_concentration);
  const double v = unit(r, NumVar::voltage);
  const double d = unit(r, NumVar::distance);
  const double h = std::isfinite(r.num[idx(NumVar::humidity)]) ? unit(r, NumVar::humidity) : 0.5;
  double y = polymer_base(r.polymer());
  y += 250.0 * (2 * c - 1) * (2 * c - 1);
  y += v < 0.25 || v > 0.75 ? 200.0 : 0.0;
  y += d > 0.5 ? 90.0 : 0.0;
  y += h > 0.6 ? 40.0 : 0.0;
  if (r.collector() == "drum") y -= 40.0;
  return y;
}

struct Options {
  double noise_sd = 15.0;  ///< nm
  double missing_rate = 0.03;  ///< humidity and temperature
};

/// n rows drawn from the generator; row order and values depend only on seed.
inline std::vector<SpinRecord> generate_records(std::size_t n, std::uint64_t seed, const Options& opt = {}) {
  std::vector<double> w;
  for (const auto& p : kPolymers) w.push_back(p.weight);
  std::vector<SpinRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Stream rng(seed, i);
    SpinRecord r;
    const PolymerSpec& ps = kPolymers[rng.weighted(w)];
    r.cat[idx(CatVar::polymer)] = std::string(ps.name);
    std::vector<std::string> pool;
    for (auto s : ps.solvents)
      if (!s.empty()) pool.emplace_back(s);
    const double u = rng.uniform();
    std::size_t k = u < 0.6 ? 1 : (u < 0.9 ? 2 : 3);
    k = std::min(k, pool.size());
    rng.shuffle(pool);
    const auto ratios = sample_ratios(k, rng);
    for (std::size_t s = 0; s < 3; ++s) {
      r.solvent(s) = s < k ? pool[s] : std::string();
      r.ratio(s) = s < k ? std::round(ratios[s] * 10.0) / 10.0 : 0.0;
    }
    if (k > 1) {
      double acc = 0;
      for (std::size_t s = 0; s + 1 < k; ++s) acc += r.ratio(s);
      r.ratio(k - 1) = std::round((100.0 - acc) * 10.0) / 10.0;
    }
    for (std::size_t v = kFirstOperating; v < kNumVars; ++v) {
      const auto& b = kBounds[v - kFirstOperating];
      r.num[v] = std::round(rng.uniform(b.lo, b.hi) * 100.0) / 100.0;
    }
    r.cat[idx(CatVar::collector_type)] = rng.uniform() < 0.35 ? "drum" : "plate";
    if (r.collector() == "plate") r.num[idx(NumVar::rotation_speed)] = 0.0;
    if (rng.uniform() < opt.missing_rate) r.num[idx(NumVar::humidity)] = kNaN;
    if (rng.uniform() < opt.missing_rate) r.num[idx(NumVar::temperature)] = kNaN;
    r.doi = "10.5555/synthetic." + std::to_string(i / 7);
    r.fiber_diameter = std::round((law(r) + opt.noise_sd * rng.normal()) * 1000.0) / 1000.0;
    out.push_back(std::move(r));
  }
  return out;
}

inline SpinDataset generate(std::size_t n, std::uint64_t seed, const Options& opt = {}) {
  return SpinDataset(generate_records(n, seed, opt));
}

/// Solubility table text consistent with the generator's solvent pools.
inline std::string solubility_csv() {
  std::string s = "polymer,solvent,rating,max_pct\n";
  for (const auto& p : kPolymers)
    for (auto sv : p.solvents)
      if (!sv.empty()) s += std::string(p.name) + "," + std::string(sv) + ",OK,\n";
  return s;
}

}  // namespace espin::synthetic
