#pragma once

// Leakage-free preprocessing recipe. Fitted on training rows only, then
// replayed unchanged on folds, hold-out rows and synthetic candidates.
//
// Step order: novel-level handling -> rare-level pooling -> one-hot ->
// median imputation -> zero-variance removal -> center/scale -> optional PCA.

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "espin/dataset.hpp"
#include "espin/io.hpp"
#include "espin/stats.hpp"

namespace espin {

struct RecipeConfig {
  /// Levels with training frequency strictly below this share are pooled.
  double rare_threshold = 0.01;
  bool pca = false;
  std::size_t pca_components = 20;
};

inline constexpr std::string_view kOtherLevel = "other";
inline constexpr std::string_view kNoneLevel = "(none)";

/// Output column provenance: which input variable produced it.
struct ColumnInfo {
  std::string name;
  std::string source;  ///< schema variable name
  bool indicator = false;
  std::string level;  ///< for indicators
};

class Recipe {
 public:
  static Recipe fit(std::span<const SpinRecord> train, const RecipeConfig& cfg = {}) {
    if (train.empty()) throw Error("empty_train", "cannot fit recipe on zero rows");
    Recipe r;
    r.config_ = cfg;
    const double n = static_cast<double>(train.size());

    for (std::size_t c = 0; c < kCatVars; ++c) {
      std::map<std::string, std::size_t> counts;
      for (const auto& rec : train) ++counts[level_of(rec.cat[c])];
      Family fam;
      fam.var = c;
      for (const auto& [level, cnt] : counts)
        if (static_cast<double>(cnt) >= cfg.rare_threshold * n) fam.levels.push_back(level);
        else fam.pooled = true;
      // A family whose training rows all fall in one bucket carries no signal.
      const std::size_t buckets = fam.levels.size() + (fam.pooled ? 1 : 0);
      fam.keep = buckets >= 2;
      r.families_.push_back(std::move(fam));
    }

    for (std::size_t v = 0; v < kNumVars; ++v) {
      NumericStep step;
      std::vector<double> present;
      for (const auto& rec : train)
        if (std::isfinite(rec.num[v])) present.push_back(rec.num[v]);
      if (present.empty()) {
        step.keep = false;
        r.numerics_.push_back(step);
        continue;
      }
      step.median = stats::median(present);
      std::vector<double> imputed;
      imputed.reserve(train.size());
      for (const auto& rec : train) imputed.push_back(std::isfinite(rec.num[v]) ? rec.num[v] : step.median);
      const auto [lo, hi] = std::minmax_element(imputed.begin(), imputed.end());
      step.keep = *lo != *hi;
      if (step.keep) {
        step.mean = stats::mean(imputed);
        step.sd = stats::sd(imputed);
      }
      r.numerics_.push_back(step);
    }

    r.build_columns();
    if (r.columns_.empty()) throw Error("degenerate_input", "all predictors removed by preprocessing");

    std::vector<double> y;
    for (const auto& rec : train) y.push_back(rec.fiber_diameter);
    r.outcome_sd_ = stats::sd(y);
    if (!(r.outcome_sd_ > 0)) r.warnings_.push_back("zero_outcome_variance");

    if (cfg.pca) {
      const Eigen::MatrixXd X = r.transform(train, false);
      r.pca_mean_ = X.colwise().mean().transpose();
      const Eigen::MatrixXd centered = X.rowwise() - r.pca_mean_.transpose();
      Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
      svd.setThreshold(1e-10);
      const auto rank = static_cast<std::size_t>(svd.rank());
      const std::size_t k = std::max<std::size_t>(1, std::min({cfg.pca_components, rank, std::size_t{20}}));
      r.pca_basis_ = svd.matrixV().leftCols(static_cast<Eigen::Index>(k));
      // Fix the sign of each component (largest |loading| positive) for stable output.
      for (Eigen::Index j = 0; j < r.pca_basis_.cols(); ++j) {
        Eigen::Index arg;
        r.pca_basis_.col(j).cwiseAbs().maxCoeff(&arg);
        if (r.pca_basis_(arg, j) < 0) r.pca_basis_.col(j) *= -1.0;
      }
    }
    r.fitted_ = true;
    return r;
  }

  /// Model-ready design matrix; column set and order are fixed at fit time.
  Eigen::MatrixXd apply(std::span<const SpinRecord> rows) const {
    require_fitted();
    Eigen::MatrixXd X = transform(rows, false);
    if (!config_.pca) return X;
    return (X.rowwise() - pca_mean_.transpose()) * pca_basis_;
  }

  /// Imputed numerics in raw units plus indicators; never projected.
  Eigen::MatrixXd apply_unscaled(std::span<const SpinRecord> rows) const {
    require_fitted();
    return transform(rows, true);
  }

  /// Pre-projection column descriptions (what apply_unscaled returns).
  const std::vector<ColumnInfo>& columns() const { return columns_; }

  /// Names of the columns produced by apply().
  std::vector<std::string> output_names() const {
    if (!config_.pca) {
      std::vector<std::string> n;
      for (const auto& c : columns_) n.push_back(c.name);
      return n;
    }
    std::vector<std::string> n;
    for (Eigen::Index j = 0; j < pca_basis_.cols(); ++j) n.push_back("PC" + std::to_string(j + 1));
    return n;
  }

  std::size_t output_width() const {
    return config_.pca ? static_cast<std::size_t>(pca_basis_.cols()) : columns_.size();
  }

  bool fitted() const { return fitted_; }
  const RecipeConfig& config() const { return config_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Training median of a numeric variable (NaN if dropped for lack of data).
  double median(std::size_t numeric_var) const { return numerics_.at(numeric_var).median; }
  double center(std::size_t numeric_var) const { return numerics_.at(numeric_var).mean; }
  double scale(std::size_t numeric_var) const { return numerics_.at(numeric_var).sd; }
  bool keeps_numeric(std::size_t numeric_var) const { return numerics_.at(numeric_var).keep; }
  bool keeps_categorical(std::size_t cat_var) const { return families_.at(cat_var).keep; }
  const std::vector<std::string>& levels(std::size_t cat_var) const { return families_.at(cat_var).levels; }
  const Eigen::MatrixXd& pca_basis() const { return pca_basis_; }
  const Eigen::VectorXd& pca_mean() const { return pca_mean_; }

  void serialize(io::Writer& w) const {
    require_fitted();
    w.f64(config_.rare_threshold);
    w.boolean(config_.pca);
    w.size(config_.pca_components);
    w.size(families_.size());
    for (const auto& f : families_) {
      w.size(f.var);
      w.strs(f.levels);
      w.boolean(f.pooled);
      w.boolean(f.keep);
    }
    w.size(numerics_.size());
    for (const auto& s : numerics_) {
      w.boolean(s.keep);
      w.f64(s.median);
      w.f64(s.mean);
      w.f64(s.sd);
    }
    w.f64(outcome_sd_);
    w.strs(warnings_);
    w.matrix(pca_basis_);
    w.vector(pca_mean_);
  }

  static Recipe deserialize(io::Reader& rd) {
    Recipe r;
    r.config_.rare_threshold = rd.f64();
    r.config_.pca = rd.boolean();
    r.config_.pca_components = rd.size();
    const auto nf = rd.size();
    if (nf != kCatVars) throw Error("bundle_corrupt", "recipe categorical count mismatch");
    for (std::size_t i = 0; i < nf; ++i) {
      Family f;
      f.var = rd.size();
      f.levels = rd.strs();
      f.pooled = rd.boolean();
      f.keep = rd.boolean();
      r.families_.push_back(std::move(f));
    }
    const auto nn = rd.size();
    if (nn != kNumVars) throw Error("bundle_corrupt", "recipe numeric count mismatch");
    for (std::size_t i = 0; i < nn; ++i) {
      NumericStep s;
      s.keep = rd.boolean();
      s.median = rd.f64();
      s.mean = rd.f64();
      s.sd = rd.f64();
      r.numerics_.push_back(s);
    }
    r.outcome_sd_ = rd.f64();
    r.warnings_ = rd.strs();
    r.pca_basis_ = rd.matrix();
    r.pca_mean_ = rd.vector();
    r.build_columns();
    r.fitted_ = true;
    return r;
  }

  static std::string level_of(const std::string& raw) { return raw.empty() ? std::string(kNoneLevel) : raw; }

 private:
  struct Family {
    std::size_t var = 0;
    std::vector<std::string> levels;  ///< kept levels, sorted
    bool pooled = false;              ///< at least one training level was pooled into "other"
    bool keep = true;
  };

  struct NumericStep {
    bool keep = false;
    double median = kNaN;
    double mean = 0.0;
    double sd = 1.0;
  };

  void require_fitted() const {
    if (!fitted_) throw Error("recipe_not_fitted", "recipe applied before fit");
  }

  void build_columns() {
    columns_.clear();
    for (std::size_t v = 0; v < kNumVars; ++v)
      if (numerics_[v].keep) columns_.push_back({std::string(kNumNames[v]), std::string(kNumNames[v]), false, {}});
    for (const auto& f : families_) {
      if (!f.keep) continue;
      const std::string src(kCatNames[f.var]);
      for (const auto& l : f.levels) columns_.push_back({src + "=" + l, src, true, l});
      // The pooled bucket always exists so unseen levels have somewhere to go.
      columns_.push_back({src + "=" + std::string(kOtherLevel), src, true, std::string(kOtherLevel)});
    }
  }

  Eigen::MatrixXd transform(std::span<const SpinRecord> rows, bool raw_units) const {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                              static_cast<Eigen::Index>(columns_.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& rec = rows[i];
      Eigen::Index col = 0;
      const auto row = static_cast<Eigen::Index>(i);
      for (std::size_t v = 0; v < kNumVars; ++v) {
        const auto& s = numerics_[v];
        if (!s.keep) continue;
        const double x = std::isfinite(rec.num[v]) ? rec.num[v] : s.median;
        X(row, col++) = raw_units ? x : (x - s.mean) / s.sd;
      }
      for (const auto& f : families_) {
        if (!f.keep) continue;
        const std::string level = level_of(rec.cat[f.var]);
        const auto it = std::lower_bound(f.levels.begin(), f.levels.end(), level);
        const bool known = it != f.levels.end() && *it == level;
        const auto offset = known ? static_cast<Eigen::Index>(it - f.levels.begin())
                                  : static_cast<Eigen::Index>(f.levels.size());
        X(row, col + offset) = 1.0;
        col += static_cast<Eigen::Index>(f.levels.size()) + 1;
      }
    }
    return X;
  }

  bool fitted_ = false;
  RecipeConfig config_;
  std::vector<Family> families_;
  std::vector<NumericStep> numerics_;
  std::vector<ColumnInfo> columns_;
  double outcome_sd_ = 0.0;
  std::vector<std::string> warnings_;
  Eigen::MatrixXd pca_basis_;
  Eigen::VectorXd pca_mean_;
};

}  // namespace espin
