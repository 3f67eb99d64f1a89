#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include "espin/server.hpp"
#include "espin/synthetic.hpp"

using namespace espin;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Api : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("espin_server_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    fs::copy_file(fs::path(ESPIN_DATA_DIR) / "solubility_fixture5.csv", dir_ / "solubility.csv",
                  fs::copy_options::overwrite_existing);
    fs::copy_file(fs::path(ESPIN_DATA_DIR) / "incompatibility.csv", dir_ / "incompatibility.csv",
                  fs::copy_options::overwrite_existing);
    ServerConfig cfg;
    cfg.data_dir = dir_.string();
    cfg.workers = 1;
    service_ = new Service(cfg);
    server_ = new httplib::Server;
    service_->mount(*server_);
    port_ = server_->bind_to_any_port("127.0.0.1");
    thread_ = std::thread([] { server_->listen_after_bind(); });
    server_->wait_until_ready();
  }

  static void TearDownTestSuite() {
    server_->stop();
    thread_.join();
    delete server_;
    delete service_;
    fs::remove_all(dir_);
  }

  static httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(300, 0);
    return c;
  }

  static json post(const std::string& path, const json& body, int expect) {
    auto r = client().Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, expect) << path << ": " << r->body;
    return json::parse(r->body);
  }

  static json get(const std::string& path, int expect = 200) {
    auto r = client().Get(path);
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, expect) << path << ": " << r->body;
    return json::parse(r->body);
  }

  static std::string upload(const std::string& csv) {
    auto r = client().Post("/datasets", csv, "text/csv");
    EXPECT_EQ(r->status, 200) << r->body;
    return json::parse(r->body).at("dataset_id").get<std::string>();
  }

  static json wait_job(const std::string& id) {
    for (int i = 0; i < 3000; ++i) {
      const json s = get("/jobs/" + id);
      const std::string st = s.at("status").get<std::string>();
      if (st == "done" || st == "failed") return s;
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    ADD_FAILURE() << "job " << id << " did not finish";
    return {};
  }

  // Uploads a small synthetic dataset and trains two fast learners once.
  static const std::pair<std::string, std::string>& trained() {
    static std::pair<std::string, std::string> ids = [] {
      const std::string ds = upload(write_dataset(synthetic::generate(300, 61)));
      const json r = post("/train", {{"dataset_id", ds}, {"learners", {"linear", "tree"}}, {"folds", 3}, {"seed", 4}}, 202);
      const json s = wait_job(r.at("job_id").get<std::string>());
      EXPECT_EQ(s.at("status"), "done") << s.dump();
      return std::make_pair(ds, r.at("model_id").get<std::string>());
    }();
    return ids;
  }

  static inline fs::path dir_;
  static inline Service* service_ = nullptr;
  static inline httplib::Server* server_ = nullptr;
  static inline std::thread thread_;
  static inline int port_ = 0;
};

}  // namespace

TEST_F(Api, FeasibilityStatusReflectsDataDirFiles) {
  const json s = get("/feasibility/status");
  EXPECT_EQ(s["counts"]["OK"], 3);
  EXPECT_EQ(s["counts"]["COND"], 1);
  EXPECT_EQ(s["counts"]["NO"], 1);
  EXPECT_FALSE(s["fallback_incompatibility"].get<bool>());
}

TEST_F(Api, UploadFingerprintIsStable) {
  const std::string csv = write_dataset(synthetic::generate(80, 62));
  auto a = client().Post("/datasets", csv, "text/csv");
  auto b = client().Post("/datasets", csv, "text/csv");
  ASSERT_EQ(a->status, 200);
  const json ja = json::parse(a->body), jb = json::parse(b->body);
  EXPECT_EQ(ja["fingerprint"], jb["fingerprint"]);
  EXPECT_EQ(ja["dataset_id"], jb["dataset_id"]);
  EXPECT_EQ(ja["rows"], 80);
  const json p = get("/datasets/" + ja["dataset_id"].get<std::string>() + "/polymers");
  EXPECT_FALSE(p["polymers"].empty());
  const json sum = get("/datasets/" + ja["dataset_id"].get<std::string>() + "/summary");
  EXPECT_EQ(sum["rows"].back()["polymer"], "TOTAL");
}

TEST_F(Api, BadUploadIs422) {
  auto r = client().Post("/datasets", "polymer,solvent_1\nPAN,DMF\n", "text/csv");
  EXPECT_EQ(r->status, 422);
  EXPECT_TRUE(json::parse(r->body)["error"].contains("code"));
}

TEST_F(Api, InvalidFoldsRejected) {
  const std::string ds = upload(write_dataset(synthetic::generate(60, 63)));
  const json e = post("/train", {{"dataset_id", ds}, {"k", 4}}, 422);
  EXPECT_EQ(e["error"]["code"], "invalid_folds");
  post("/train", {{"dataset_id", ds}, {"test_fraction", 0.5}}, 422);
  post("/train", {{"dataset_id", ds}, {"n", 100000}}, 422);
  post("/train", {{"dataset_id", "ds-missing"}}, 404);
}

TEST_F(Api, MalformedJsonIs400) {
  auto r = client().Post("/train", "{not json", "application/json");
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body)["error"]["code"], "malformed_json");
}

TEST_F(Api, UnknownJobAndModelAre404) {
  get("/jobs/job-999999", 404);
  get("/models/m-nope/metrics", 404);
}

TEST_F(Api, TrainingProducesMetricsAndDiagnostics) {
  const auto& [ds, model] = trained();
  const json m = get("/models/" + model + "/metrics");
  EXPECT_EQ(m["report"]["entries"].size(), 2u);
  const json d = get("/models/" + model + "/diagnostics");
  EXPECT_TRUE(d["diagnostics"].contains("flags"));
  const json imp = get("/models/" + model + "/importance?repeats=2&seed=3");
  EXPECT_EQ(imp["importance"]["items"].size(), kNumVars + kCatVars);
  const json s = post("/models/" + model + "/surface", {{"var_a", "voltage"}, {"var_b", "distance"}, {"resolution", 4}}, 200);
  EXPECT_EQ(s["surface"]["z"].size(), 4u);
  post("/models/" + model + "/surface", {{"var_a", "voltage"}, {"var_b", "distance"}, {"resolution", 1}}, 422);
}

TEST_F(Api, ImcRepeatIsByteIdentical) {
  const auto& [ds, model] = trained();
  const json body{{"mode", "experimental"}, {"polymer", "PAN"}, {"target", 400}, {"tolerance", 60}, {"n", 300}, {"seed", 5}};
  auto a = client().Post("/models/" + model + "/imc", body.dump(), "application/json");
  auto b = client().Post("/models/" + model + "/imc", body.dump(), "application/json");
  ASSERT_EQ(a->status, 200) << a->body;
  EXPECT_EQ(a->body, b->body);
  const json j = json::parse(a->body);
  EXPECT_FALSE(j["summary"].contains("p_acc"));
  auto csv_a = client().Get(j["draws_export"].get<std::string>());
  ASSERT_EQ(csv_a->status, 200);
  EXPECT_EQ(std::count(csv_a->body.begin(), csv_a->body.end(), '\n'), 301);
  const json bad{{"polymer", "PAN"}, {"target", -1}};
  post("/models/" + model + "/imc", bad, 422);
}

TEST_F(Api, BundleSaveLoadPreservesPredictions) {
  const auto& [ds, model] = trained();
  const json saved = post("/bundles/save", {{"model_id", model}, {"name", "roundtrip"}}, 200);
  EXPECT_TRUE(fs::exists(dir_ / "bundles" / "roundtrip.espb"));
  const json loaded = post("/bundles/load", {{"file", "roundtrip.espb"}, {"dataset_id", ds}}, 200);
  const std::string bid = loaded["model_id"].get<std::string>();
  const json body{{"mode", "experimental"}, {"polymer", "PAN"}, {"target", 400}, {"tolerance", 60}, {"n", 100}, {"seed", 8}};
  const json a = post("/models/" + model + "/imc", body, 200);
  const json b = post("/models/" + bid + "/imc", body, 200);
  EXPECT_EQ(a["summary"], b["summary"]);
  post("/bundles/save", {{"model_id", model}, {"name", "../escape"}}, 422);
}

TEST_F(Api, SolubilityUploadReplacesTable) {
  auto r = client().Post("/feasibility/solubility", "polymer,solvent,rating\nPAN,DMF,OK\nPAN,WATER,NO\n", "text/csv");
  ASSERT_EQ(r->status, 200) << r->body;
  const json s = get("/feasibility/status");
  EXPECT_EQ(s["counts"]["OK"], 1);
  EXPECT_EQ(s["counts"]["NO"], 1);
  auto bad = client().Post("/feasibility/solubility", "polymer,solvent,rating\nPAN,DMF,PERHAPS\n", "text/csv");
  EXPECT_EQ(bad->status, 422);
  client().Post("/feasibility/solubility", csv::read_file(std::string(ESPIN_DATA_DIR) + "/solubility_fixture5.csv"),
                "text/csv");
}

TEST(JobQueue, RunsTasksAndReportsFailures) {
  JobQueue q(1);
  const auto ok = q.submit("t", [](const auto& progress) {
    progress(0.5);
    progress(0.2);
    return json{{"v", 1}};
  });
  const auto bad = q.submit("t", [](const auto&) -> json { throw Error("boom", "nope"); });
  const auto a = q.wait(ok), b = q.wait(bad);
  EXPECT_EQ(a.status, JobStatus::done);
  EXPECT_EQ(a.progress, 1.0);
  EXPECT_EQ(a.result["v"], 1);
  EXPECT_EQ(b.status, JobStatus::failed);
  EXPECT_FALSE(q.get("job-0-missing"));
}
