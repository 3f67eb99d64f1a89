// Batch front end: describe, sample, train, imc, report, serve, generate.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "espin/synthetic.hpp"
#include "espin/server.hpp"

namespace {

using namespace espin;

LoadOptions load_options(const std::string& aliases) {
  LoadOptions lo;
  if (!aliases.empty()) lo.names = Canonicalizer::from_file(aliases);
  return lo;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    csv::write_file(out, text);
  }
}

void note(const std::string& msg) { std::cerr << msg << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electrospun fiber diameter modelling and inverse design"};
  app.require_subcommand(1);

  std::string data, aliases, out;

  // describe
  auto* describe_cmd = app.add_subcommand("describe", "per-polymer descriptive statistics");
  bool pooled = false;
  describe_cmd->add_option("--data", data, "delimited dataset")->required()->check(CLI::ExistingFile);
  describe_cmd->add_option("--aliases", aliases, "alias sidecar (JSON)")->check(CLI::ExistingFile);
  describe_cmd->add_flag("--pooled", pooled, "overall row only");
  describe_cmd->add_option("--out", out, "output file (default stdout)");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "draw a training subset");
  std::string method = "random";
  std::size_t n = 0;
  std::uint64_t seed = 42;
  sample_cmd->add_option("--data", data)->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--aliases", aliases)->check(CLI::ExistingFile);
  sample_cmd->add_option("--method", method)->check(CLI::IsMember({"random", "sobol-doptimal", "balanced"}));
  sample_cmd->add_option("--n", n, "rows to draw")->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", seed);
  sample_cmd->add_option("--out", out);

  // train
  auto* train_cmd = app.add_subcommand("train", "benchmark learners and save the best as a bundle");
  std::string learners = "linear,elastic_net,knn,tree,random_forest,gbt";
  double test_frac = 0.3;
  std::size_t folds = 5;
  std::size_t train_n = 0;
  std::string report_csv;
  train_cmd->add_option("--data", data)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--aliases", aliases)->check(CLI::ExistingFile);
  train_cmd->add_option("--learners", learners, "comma separated");
  train_cmd->add_option("--test-frac", test_frac)->check(CLI::Range(0.10, 0.40));
  train_cmd->add_option("--folds", folds)->check(CLI::IsMember({3, 5, 10}));
  train_cmd->add_option("--method", method)->check(CLI::IsMember({"random", "sobol-doptimal", "balanced"}));
  train_cmd->add_option("--n", train_n, "sample size (0: all rows)");
  train_cmd->add_option("--seed", seed);
  train_cmd->add_option("--out", out, "bundle path")->required();
  train_cmd->add_option("--metrics", report_csv, "metrics table (CSV)");

  // imc
  auto* imc_cmd = app.add_subcommand("imc", "inverse Monte Carlo search against a bundle");
  std::string bundle_path, mode = "experimental", polymer, strictness = "balanced", solubility, incompat, draws_out;
  double target = 0, tol = 0, no_allow = 0;
  std::size_t draws = 1000, max_solvents = 3;
  imc_cmd->add_option("--bundle", bundle_path)->required()->check(CLI::ExistingFile);
  imc_cmd->add_option("--data", data, "dataset the ranges come from")->required()->check(CLI::ExistingFile);
  imc_cmd->add_option("--aliases", aliases)->check(CLI::ExistingFile);
  imc_cmd->add_option("--mode", mode)->check(CLI::IsMember({"experimental", "optimization"}));
  imc_cmd->add_option("--polymer", polymer)->required();
  imc_cmd->add_option("--target", target, "nm")->required();
  imc_cmd->add_option("--tol", tol, "nm");
  imc_cmd->add_option("--n", draws)->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  imc_cmd->add_option("--strictness", strictness)->check(CLI::IsMember({"strict", "balanced", "lax"}));
  imc_cmd->add_option("--no-allow-pct", no_allow)->check(CLI::NonNegativeNumber);
  imc_cmd->add_option("--max-solvents", max_solvents)->check(CLI::Range(1, 3));
  imc_cmd->add_option("--seed", seed);
  imc_cmd->add_option("--solubility", solubility)->check(CLI::ExistingFile);
  imc_cmd->add_option("--incompat", incompat);
  imc_cmd->add_option("--out", out, "summary JSON")->required();
  imc_cmd->add_option("--draws", draws_out, "draw table (CSV)");

  // report
  auto* report_cmd = app.add_subcommand("report", "render metrics, diagnostics and IMC results");
  std::string imc_path, format = "text";
  report_cmd->add_option("--bundle", bundle_path)->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--imc", imc_path, "IMC summary JSON")->check(CLI::ExistingFile);
  report_cmd->add_option("--format", format)->check(CLI::IsMember({"text", "html"}));
  report_cmd->add_option("--out", out);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the local HTTP API");
  ServerConfig scfg = ServerConfig::from_env();
  serve_cmd->add_option("--host", scfg.host);
  serve_cmd->add_option("--port", scfg.port);
  serve_cmd->add_option("--data-dir", scfg.data_dir);
  serve_cmd->add_option("--workers", scfg.workers)->check(CLI::Range(1, 64));

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic dataset");
  std::size_t gen_n = 500;
  gen_cmd->add_option("--n", gen_n)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--out", out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*describe_cmd) {
      const SpinDataset ds = load_dataset(data, load_options(aliases));
      emit(out, export_describe(describe(ds, !pooled)));
    } else if (*sample_cmd) {
      const SpinDataset ds = load_dataset(data, load_options(aliases));
      const SampleResult s = draw_sample(ds, parse_sampling(method), n, seed);
      emit(out, export_sample(ds, s));
      note("sampled " + std::to_string(s.rows.size()) + " of " + std::to_string(ds.size()) + " rows (" + s.method + ")");
    } else if (*train_cmd) {
      const SpinDataset ds = load_dataset(data, load_options(aliases));
      TrainRequest req;
      req.sampling = parse_sampling(method);
      req.n = train_n;
      req.test_fraction = test_frac;
      req.folds = folds;
      req.seed = seed;
      req.learners.clear();
      for (const auto& l : CLI::detail::split(learners, ','))
        if (!trim(l).empty()) req.learners.push_back(parse_learner(trim(l)));
      const TrainOutput r = run_training(ds, req, [](double p) {
        std::fprintf(stderr, "\rtraining %3.0f%%", 100.0 * p);
        if (p >= 1.0) std::fputc('\n', stderr);
      });
      save_bundle(r.bundle, out);
      if (!report_csv.empty()) csv::write_file(report_csv, export_report(r.report));
      for (const auto& w : r.warnings) note("warning: " + w);
      const EvalEntry& best = r.report.entry(r.report.best_id);
      std::string line = "best " + best.id;
      if (best.test && best.test->r2) line += " test R2 " + format_fixed(*best.test->r2, 4);
      note(line + " -> " + out);
    } else if (*imc_cmd) {
      const SpinDataset ds = load_dataset(data, load_options(aliases));
      const ModelBundle b = load_bundle(bundle_path);
      const FeasibilityTables tables = load_feasibility(solubility, incompat);
      ImcConfig c;
      c.mode = parse_imc_mode(mode);
      c.polymer = polymer;
      c.target = target;
      c.tolerance = tol;
      c.n = draws;
      c.seed = seed;
      c.policy.mode = StrictnessPolicy::parse_mode(strictness);
      c.policy.no_allow_pct = no_allow;
      c.max_solvents = max_solvents;
      c.validate();
      const ImcResult r = run_imc(c, b, ds, tables);
      emit(out, r.summary.to_json().dump(2) + "\n");
      if (!draws_out.empty()) csv::write_file(draws_out, export_draws(r));
      for (const auto& w : tables.warnings) note("warning: " + w);
      note("accepted " + std::to_string(r.summary.accepted) + "/" + std::to_string(r.summary.n) + ", within band " +
           std::to_string(r.summary.within_band));
    } else if (*report_cmd) {
      const ModelBundle b = load_bundle(bundle_path);
      ReportInput in{b.metadata, std::nullopt};
      if (!imc_path.empty()) in.imc = nlohmann::json::parse(csv::read_file(imc_path));
      emit(out, format == "html" ? render_report_html(in) : render_report_text(in));
    } else if (*serve_cmd) {
      note("listening on http://" + scfg.host + ":" + std::to_string(scfg.port));
      return serve(scfg);
    } else if (*gen_cmd) {
      emit(out, write_dataset(synthetic::generate(gen_n, seed)));
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
