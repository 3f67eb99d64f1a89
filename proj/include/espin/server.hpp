#pragma once

// Local HTTP JSON API over the engine, with a background job queue.

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "espin/bundle.hpp"
#include "espin/chemistry.hpp"
#include "espin/dataset.hpp"
#include "espin/imc.hpp"
#include "espin/interpret.hpp"
#include "espin/workflow.hpp"

#include "httplib.h"

namespace espin {

inline constexpr std::size_t kMaxUploadBytes = 200u * 1024u * 1024u;

/// Error carrying an HTTP status.
class ApiError : public Error {
 public:
  ApiError(int status, std::string code, const std::string& msg) : Error(std::move(code), msg), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// ---------------------------------------------------------------------------
// Jobs

enum class JobStatus { queued, running, done, failed };

inline std::string_view job_status_name(JobStatus s) {
  switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "?";
}

struct JobState {
  std::string id;
  std::string kind;
  JobStatus status = JobStatus::queued;
  double progress = 0.0;
  nlohmann::json result;
  std::string error;

  nlohmann::json to_json() const {
    nlohmann::json j{{"id", id}, {"kind", kind}, {"status", job_status_name(status)}, {"progress", progress}};
    j["result"] = status == JobStatus::done ? result : nlohmann::json(nullptr);
    j["error"] = status == JobStatus::failed ? nlohmann::json(error) : nlohmann::json(nullptr);
    return j;
  }
};

/// Bounded worker pool running jobs in submission order.
class JobQueue {
 public:
  using Task = std::function<nlohmann::json(const std::function<void(double)>&)>;

  explicit JobQueue(std::size_t workers = 1) {
    for (std::size_t i = 0; i < std::max<std::size_t>(workers, 1); ++i) threads_.emplace_back([this] { loop(); });
  }

  ~JobQueue() {
    {
      std::lock_guard lk(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  std::string submit(std::string kind, Task task) {
    std::lock_guard lk(mu_);
    const std::string id = "job-" + std::to_string(++counter_);
    jobs_[id] = JobState{id, std::move(kind), JobStatus::queued, 0.0, nullptr, {}};
    pending_.emplace_back(id, std::move(task));
    cv_.notify_one();
    return id;
  }

  std::optional<JobState> get(const std::string& id) const {
    std::lock_guard lk(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
  }

  /// Blocks until the job leaves queued/running.
  JobState wait(const std::string& id) const {
    std::unique_lock lk(mu_);
    done_cv_.wait(lk, [&] {
      auto s = jobs_.at(id).status;
      return s == JobStatus::done || s == JobStatus::failed;
    });
    return jobs_.at(id);
  }

 private:
  void loop() {
    for (;;) {
      std::pair<std::string, Task> job;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return stopping_ || !pending_.empty(); });
        if (stopping_ && pending_.empty()) return;
        job = std::move(pending_.front());
        pending_.pop_front();
        jobs_[job.first].status = JobStatus::running;
      }
      const std::string& id = job.first;
      auto progress = [&](double p) {
        std::lock_guard lk(mu_);
        auto& s = jobs_[id];
        s.progress = std::max(s.progress, std::clamp(p, 0.0, 1.0));
      };
      try {
        nlohmann::json r = job.second(progress);
        std::lock_guard lk(mu_);
        auto& s = jobs_[id];
        s.result = std::move(r);
        s.progress = 1.0;
        s.status = JobStatus::done;
      } catch (const std::exception& e) {
        std::lock_guard lk(mu_);
        auto& s = jobs_[id];
        s.error = e.what();
        s.status = JobStatus::failed;
      }
      done_cv_.notify_all();
    }
  }

  mutable std::mutex mu_;
  std::condition_variable cv_;
  mutable std::condition_variable done_cv_;
  std::deque<std::pair<std::string, Task>> pending_;
  std::map<std::string, JobState> jobs_;
  std::vector<std::thread> threads_;
  std::size_t counter_ = 0;
  bool stopping_ = false;
};

// ---------------------------------------------------------------------------
// Service

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = ".";
  std::size_t workers = 2;

  /// ESPIN_DATA_DIR, ESPIN_PORT and ESPIN_HOST override the defaults.
  static ServerConfig from_env() {
    ServerConfig c;
    if (const char* d = std::getenv("ESPIN_DATA_DIR")) c.data_dir = d;
    if (const char* p = std::getenv("ESPIN_PORT")) c.port = std::atoi(p);
    if (const char* h = std::getenv("ESPIN_HOST")) c.host = h;
    return c;
  }
};

struct ModelEntry {
  std::string id;
  std::string dataset_id;
  ModelBundle bundle;
  std::vector<SpinRecord> train_rows, test_rows;
  std::optional<ResidualDiagnostics> diagnostics;
};

struct ExportEntry {
  std::string content;
  std::string content_type;
  std::string filename;
};

class Service {
 public:
  explicit Service(ServerConfig cfg) : cfg_(std::move(cfg)), jobs_(cfg_.workers) {
    const auto sol = std::filesystem::path(cfg_.data_dir) / "solubility.csv";
    const auto inc = std::filesystem::path(cfg_.data_dir) / "incompatibility.csv";
    tables_ = std::make_shared<const FeasibilityTables>(
        load_feasibility(std::filesystem::exists(sol) ? sol.string() : "", inc.string()));
  }

  const ServerConfig& config() const { return cfg_; }
  JobQueue& jobs() { return jobs_; }

  void mount(httplib::Server& srv) {
    srv.set_payload_max_length(kMaxUploadBytes);
    srv.Post("/datasets", wrap([this](const httplib::Request& q) { return post_dataset(q); }));
    srv.Get("/datasets/:id/summary", wrap([this](const httplib::Request& q) { return dataset_summary(q); }));
    srv.Get("/datasets/:id/polymers", wrap([this](const httplib::Request& q) { return dataset_polymers(q); }));
    srv.Post("/train", wrap([this](const httplib::Request& q) { return post_train(q); }, 202));
    srv.Get("/jobs/:id", wrap([this](const httplib::Request& q) { return get_job(q); }));
    srv.Get("/models/:id/metrics", wrap([this](const httplib::Request& q) { return model_metrics(q); }));
    srv.Get("/models/:id/diagnostics", wrap([this](const httplib::Request& q) { return model_diagnostics(q); }));
    srv.Get("/models/:id/importance", wrap([this](const httplib::Request& q) { return model_importance(q); }));
    srv.Post("/models/:id/surface", wrap([this](const httplib::Request& q) { return model_surface(q); }));
    srv.Post("/models/:id/imc", wrap([this](const httplib::Request& q) { return model_imc(q); }));
    srv.Post("/bundles/save", wrap([this](const httplib::Request& q) { return bundle_save(q); }));
    srv.Post("/bundles/load", wrap([this](const httplib::Request& q) { return bundle_load(q); }));
    srv.Get("/feasibility/status", wrap([this](const httplib::Request&) { return feasibility_status(); }));
    srv.Post("/feasibility/solubility", wrap([this](const httplib::Request& q) { return post_solubility(q); }));
    srv.Post("/feasibility/incompatibility", wrap([this](const httplib::Request& q) { return post_incompatibility(q); }));
    srv.Get("/exports/:id", [this](const httplib::Request& q, httplib::Response& res) { get_export(q, res); });
  }

  // Direct access used by tests and the CLI.
  std::string add_dataset(SpinDataset ds) {
    const std::string id = "ds-" + ds.fingerprint();
    std::unique_lock lk(mu_);
    datasets_.insert_or_assign(id, std::make_shared<const SpinDataset>(std::move(ds)));
    return id;
  }

  std::shared_ptr<const FeasibilityTables> tables() const {
    std::shared_lock lk(mu_);
    return tables_;
  }

 private:
  using Handler = std::function<nlohmann::json(const httplib::Request&)>;

  static void send_error(httplib::Response& res, int status, const std::string& code, const std::string& msg) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", {{"code", code}, {"message", msg}}}}.dump(), "application/json");
  }

  static httplib::Server::Handler wrap(Handler h, int ok_status = 200) {
    return [h = std::move(h), ok_status](const httplib::Request& q, httplib::Response& res) {
      try {
        nlohmann::json body = h(q);
        res.status = ok_status;
        res.set_content(body.dump(), "application/json");
      } catch (const ApiError& e) {
        send_error(res, e.status(), e.code(), e.what());
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "malformed_json", e.what());
      } catch (const Error& e) {
        send_error(res, 422, e.code(), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  static nlohmann::json body_json(const httplib::Request& q) {
    if (q.body.empty()) return nlohmann::json::object();
    nlohmann::json j = nlohmann::json::parse(q.body);
    if (!j.is_object()) throw ApiError(400, "malformed_json", "request body must be a JSON object");
    return j;
  }

  static std::string path_id(const httplib::Request& q) { return q.path_params.at("id"); }

  std::shared_ptr<const SpinDataset> dataset(const std::string& id) const {
    std::shared_lock lk(mu_);
    auto it = datasets_.find(id);
    if (it == datasets_.end()) throw ApiError(404, "unknown_dataset", "no dataset '" + id + "'");
    return it->second;
  }

  std::shared_ptr<const ModelEntry> model(const std::string& id) const {
    std::shared_lock lk(mu_);
    auto it = models_.find(id);
    if (it == models_.end()) throw ApiError(404, "unknown_model", "no model '" + id + "'");
    return it->second;
  }

  std::string add_export(const std::string& key, ExportEntry e) {
    const std::string id = "x-" + hex64(fnv1a64(key));
    std::unique_lock lk(mu_);
    exports_.insert_or_assign(id, std::move(e));
    return id;
  }

  static std::string upload_text(const httplib::Request& q) {
    if (q.has_file("file")) return q.get_file_value("file").content;
    return q.body;
  }

  // --- handlers -----------------------------------------------------------

  nlohmann::json post_dataset(const httplib::Request& q) {
    const std::string text = upload_text(q);
    if (text.empty()) throw ApiError(422, "empty_upload", "no dataset content");
    LoadOptions lo;
    if (q.has_param("aliases")) {
      const auto path = std::filesystem::path(cfg_.data_dir) / q.get_param_value("aliases");
      lo.names = Canonicalizer::from_file(path.string());
    }
    SpinDataset ds = load_dataset_text(text, lo);
    nlohmann::json report = ds.load_report().to_json();
    const std::string fp = ds.fingerprint();
    const std::size_t rows = ds.size();
    const std::string id = add_dataset(std::move(ds));
    return {{"dataset_id", id}, {"fingerprint", fp}, {"rows", rows}, {"load_report", report}};
  }

  nlohmann::json dataset_summary(const httplib::Request& q) {
    const auto ds = dataset(path_id(q));
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : describe(*ds)) {
      auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
      rows.push_back({{"polymer", s.polymer}, {"n", s.stats.n}, {"mean", s.stats.mean}, {"std_dev", s.stats.std_dev},
                      {"q1", s.stats.q1}, {"median", s.stats.median}, {"q3", s.stats.q3},
                      {"kurtosis", opt(s.stats.excess_kurtosis)}, {"skewness", opt(s.stats.skewness)}});
    }
    return {{"dataset_id", path_id(q)}, {"rows", rows}};
  }

  nlohmann::json dataset_polymers(const httplib::Request& q) {
    const auto ds = dataset(path_id(q));
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [p, n] : ds->polymer_counts()) a.push_back({{"polymer", p}, {"n", n}});
    return {{"dataset_id", path_id(q)}, {"polymers", a}};
  }

  static TrainRequest parse_train(const nlohmann::json& j) {
    TrainRequest r;
    try {
      if (j.contains("sampling")) r.sampling = parse_sampling(j.at("sampling").get<std::string>());
      if (j.contains("n")) r.n = j.at("n").get<std::size_t>();
      if (j.contains("test_fraction")) r.test_fraction = j.at("test_fraction").get<double>();
      if (j.contains("folds")) r.folds = j.at("folds").get<std::size_t>();
      if (j.contains("k")) r.folds = j.at("k").get<std::size_t>();
      if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("learners")) {
        r.learners.clear();
        for (const auto& l : j.at("learners")) r.learners.push_back(parse_learner(l.get<std::string>()));
      }
      r.validate();
    } catch (const ApiError&) {
      throw;
    } catch (const Error& e) {
      throw ApiError(422, e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ApiError(422, "invalid_field", e.what());
    }
    return r;
  }

  nlohmann::json post_train(const httplib::Request& q) {
    const nlohmann::json j = body_json(q);
    if (!j.contains("dataset_id")) throw ApiError(422, "missing_field", "dataset_id is required");
    const std::string ds_id = j.at("dataset_id").get<std::string>();
    const auto ds = dataset(ds_id);
    const TrainRequest req = parse_train(j);
    if (req.n > ds->size())
      throw ApiError(422, "sample_size", "n exceeds the " + std::to_string(ds->size()) + " dataset rows");
    const std::string model_id = "m-" + hex64(fnv1a64(ds_id + req.to_json().dump()));
    const std::string job = jobs_.submit("train", [this, ds, ds_id, req, model_id](const auto& progress) {
      TrainOutput out = run_training(*ds, req, progress);
      auto entry = std::make_shared<ModelEntry>();
      entry->id = model_id;
      entry->dataset_id = ds_id;
      entry->bundle = std::move(out.bundle);
      entry->train_rows = std::move(out.train_rows);
      entry->test_rows = std::move(out.test_rows);
      entry->diagnostics = std::move(out.diagnostics);
      {
        std::unique_lock lk(mu_);
        models_.insert_or_assign(model_id, entry);
      }
      return nlohmann::json{{"model_id", model_id}, {"best", out.report.best_id}};
    });
    return {{"job_id", job}, {"model_id", model_id}};
  }

  nlohmann::json get_job(const httplib::Request& q) {
    const auto s = jobs_.get(path_id(q));
    if (!s) throw ApiError(404, "unknown_job", "no job '" + path_id(q) + "'");
    return s->to_json();
  }

  nlohmann::json model_metrics(const httplib::Request& q) {
    const auto m = model(path_id(q));
    const auto& md = m->bundle.metadata;
    if (!md.contains("report")) throw ApiError(404, "no_metrics", "model has no evaluation report");
    const EvalReport r = EvalReport::from_json(md.at("report"));
    const std::string id = add_export(m->id + "/metrics", {export_report(r), "text/csv", m->id + "_metrics.csv"});
    return {{"model_id", m->id}, {"report", md.at("report")}, {"learner", m->bundle.model.label()},
            {"export", "/exports/" + id}};
  }

  nlohmann::json model_diagnostics(const httplib::Request& q) {
    const auto m = model(path_id(q));
    if (m->diagnostics) return {{"model_id", m->id}, {"diagnostics", m->diagnostics->to_json(true)}};
    if (m->bundle.metadata.contains("diagnostics"))
      return {{"model_id", m->id}, {"diagnostics", m->bundle.metadata.at("diagnostics")}};
    throw ApiError(404, "no_diagnostics", "model has no diagnostics");
  }

  const std::vector<SpinRecord>& eval_rows(const ModelEntry& m) const {
    if (!m.test_rows.empty()) return m.test_rows;
    if (!m.train_rows.empty()) return m.train_rows;
    throw ApiError(422, "no_rows", "model has no associated rows; load it with a dataset_id");
  }

  nlohmann::json model_importance(const httplib::Request& q) {
    const auto m = model(path_id(q));
    const std::size_t repeats = q.has_param("repeats") ? std::stoul(q.get_param_value("repeats")) : 5;
    const std::uint64_t seed = q.has_param("seed") ? std::stoull(q.get_param_value("seed")) : 1;
    if (repeats < 1 || repeats > 100) throw ApiError(422, "repeats", "repeats must be 1..100");
    return {{"model_id", m->id}, {"importance", permutation_importance(m->bundle, eval_rows(*m), repeats, seed).to_json()}};
  }

  nlohmann::json model_surface(const httplib::Request& q) {
    const auto m = model(path_id(q));
    const nlohmann::json j = body_json(q);
    const std::size_t res = j.value("resolution", std::size_t{20});
    if (res < 2 || res > 200) throw ApiError(422, "resolution", "resolution must be 2..200");
    const auto& rows = m->train_rows.empty() ? eval_rows(*m) : m->train_rows;
    const ResponseGrid g = response_grid(m->bundle, j.at("var_a").get<std::string>(), j.at("var_b").get<std::string>(),
                                         res, rows);
    return {{"model_id", m->id}, {"surface", g.to_json()}};
  }

  static ImcConfig parse_imc(const nlohmann::json& j) {
    ImcConfig c;
    try {
      c.mode = parse_imc_mode(j.value("mode", std::string("experimental")));
      c.polymer = j.at("polymer").get<std::string>();
      c.target = j.at("target").get<double>();
      c.tolerance = j.value("tolerance", 0.0);
      c.n = j.value("n", std::size_t{1000});
      c.seed = j.value("seed", std::uint64_t{1});
      c.policy.mode = StrictnessPolicy::parse_mode(j.value("strictness", std::string("balanced")));
      c.policy.no_allow_pct = j.value("no_allow_pct", 0.0);
      c.max_solvents = j.value("max_solvents", std::size_t{3});
      if (c.n > 1000000) throw Error("imc_draws", "at most 1,000,000 draws");
      c.validate();
    } catch (const Error& e) {
      throw ApiError(422, e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ApiError(422, "invalid_field", e.what());
    }
    return c;
  }

  nlohmann::json run_imc_for(const std::shared_ptr<const ModelEntry>& m, const std::string& ds_id, const ImcConfig& c) {
    const auto ds = dataset(ds_id);
    const auto tables = this->tables();
    const ImcResult r = run_imc(c, m->bundle, *ds, *tables);
    nlohmann::json summary = r.summary.to_json();
    const nlohmann::json cfg_key{{"mode", imc_mode_name(c.mode)}, {"polymer", c.polymer}, {"target", c.target},
                                 {"tolerance", c.tolerance}, {"n", c.n}, {"seed", c.seed},
                                 {"strictness", strictness_name(c.policy.mode)}, {"no_allow_pct", c.policy.no_allow_pct},
                                 {"max_solvents", c.max_solvents}};
    const std::string key = m->id + "/imc/" + ds_id + "/" + cfg_key.dump();
    const std::string draws = add_export(key + "/draws", {export_draws(r), "text/csv", "imc_draws.csv"});
    const std::string top = add_export(key + "/top", {export_top(r.summary), "text/csv", "imc_top.csv"});
    return {{"model_id", m->id}, {"summary", summary}, {"draws_export", "/exports/" + draws},
            {"top_export", "/exports/" + top}};
  }

  nlohmann::json model_imc(const httplib::Request& q) {
    const auto m = model(path_id(q));
    const nlohmann::json j = body_json(q);
    const ImcConfig c = parse_imc(j);
    const std::string ds_id = j.value("dataset_id", m->dataset_id);
    if (ds_id.empty()) throw ApiError(422, "missing_field", "dataset_id is required for this model");
    dataset(ds_id);
    if (j.value("async", false)) {
      const std::string job = jobs_.submit("imc", [this, m, ds_id, c](const auto&) { return run_imc_for(m, ds_id, c); });
      return {{"job_id", job}};
    }
    return run_imc_for(m, ds_id, c);
  }

  std::filesystem::path bundle_dir() const { return std::filesystem::path(cfg_.data_dir) / "bundles"; }

  nlohmann::json bundle_save(const httplib::Request& q) {
    const nlohmann::json j = body_json(q);
    const auto m = model(j.at("model_id").get<std::string>());
    std::filesystem::create_directories(bundle_dir());
    const std::string name = j.value("name", m->id) + ".espb";
    if (name.find('/') != std::string::npos || name.find("..") != std::string::npos)
      throw ApiError(422, "invalid_name", "bundle name must be a plain file name");
    const auto path = bundle_dir() / name;
    const std::string bytes = encode_bundle(m->bundle);
    csv::write_file(path.string(), bytes);
    return {{"model_id", m->id}, {"file", name}, {"bytes", bytes.size()}, {"crc32", crc32_of(bytes)}};
  }

  nlohmann::json bundle_load(const httplib::Request& q) {
    std::string bytes;
    std::string ds_id;
    if (q.has_file("file")) {
      bytes = q.get_file_value("file").content;
      if (q.has_param("dataset_id")) ds_id = q.get_param_value("dataset_id");
    } else {
      const nlohmann::json j = body_json(q);
      const std::string name = j.at("file").get<std::string>();
      if (name.find('/') != std::string::npos || name.find("..") != std::string::npos)
        throw ApiError(422, "invalid_name", "bundle name must be a plain file name");
      const auto path = bundle_dir() / name;
      if (!std::filesystem::exists(path)) throw ApiError(404, "unknown_bundle", "no bundle '" + name + "'");
      bytes = csv::read_file(path.string());
      ds_id = j.value("dataset_id", std::string());
    }
    ModelBundle b;
    try {
      b = decode_bundle(bytes);
    } catch (const Error& e) {
      throw ApiError(422, e.code(), e.what());
    }
    auto entry = std::make_shared<ModelEntry>();
    entry->id = "b-" + hex64(fnv1a64(bytes));
    entry->bundle = std::move(b);
    if (!ds_id.empty()) {
      const auto ds = dataset(ds_id);
      entry->dataset_id = ds_id;
      entry->train_rows = ds->records();
    }
    {
      std::unique_lock lk(mu_);
      models_.insert_or_assign(entry->id, entry);
    }
    return {{"model_id", entry->id}, {"learner", entry->bundle.model.label()}, {"metadata", entry->bundle.metadata}};
  }

  nlohmann::json feasibility_status() const { return tables()->status(); }

  nlohmann::json post_solubility(const httplib::Request& q) {
    auto t = std::make_shared<FeasibilityTables>(*tables());
    t->warnings.clear();
    t->solubility = parse_solubility(upload_text(q), Canonicalizer{}, &t->warnings);
    {
      std::unique_lock lk(mu_);
      tables_ = t;
    }
    return t->status();
  }

  nlohmann::json post_incompatibility(const httplib::Request& q) {
    auto t = std::make_shared<FeasibilityTables>(*tables());
    t->incompatibility = parse_incompatibility(upload_text(q), Canonicalizer{});
    t->fallback_incompatibility = false;
    {
      std::unique_lock lk(mu_);
      tables_ = t;
    }
    return t->status();
  }

  void get_export(const httplib::Request& q, httplib::Response& res) const {
    std::shared_lock lk(mu_);
    auto it = exports_.find(path_id(q));
    if (it == exports_.end()) return send_error(res, 404, "unknown_export", "no export '" + path_id(q) + "'");
    res.set_header("Content-Disposition", "attachment; filename=\"" + it->second.filename + "\"");
    res.set_content(it->second.content, it->second.content_type);
  }

  ServerConfig cfg_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const SpinDataset>> datasets_;
  std::map<std::string, std::shared_ptr<const ModelEntry>> models_;
  std::map<std::string, ExportEntry> exports_;
  std::shared_ptr<const FeasibilityTables> tables_;
  JobQueue jobs_;
};

/// Blocking server on cfg.host:cfg.port (loopback by default).
inline int serve(const ServerConfig& cfg) {
  Service svc(cfg);
  httplib::Server srv;
  svc.mount(srv);
  if (!srv.listen(cfg.host, cfg.port)) {
    std::fprintf(stderr, "cannot listen on %s:%d\n", cfg.host.c_str(), cfg.port);
    return 1;
  }
  return 0;
}

}  // namespace espin
