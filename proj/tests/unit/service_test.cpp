// Copyright 2026 The Redmx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>

#include "redmx/errors.hpp"
#include "redmx/fixtures.hpp"
#include "redmx/io.hpp"
#include "support/random_models.hpp"

namespace redmx::service {
namespace {

using nlohmann::json;

const char* kBraceOp = "add at 3 c 141.42135623730951 row -0.70710678118654757 0.70710678118654757 0 0";

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { start({}); }

  void start(ServiceOptions options) {
    service_ = std::make_unique<DesignService>(std::move(options));
    service_->create_session(fixtures::system_a(), std::string(kDefaultSession));
    service_->create_session(fixtures::system_a_geometry(), std::string("geo"));
    service_->create_session(fixtures::system_c(), std::string("c"));
    ASSERT_TRUE(service_->bind("127.0.0.1", 0));
    thread_ = std::thread([this] { service_->run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", service_->port());
    for (int i = 0; i < 200; ++i) {
      if (auto r = client_->Get("/health"); r && r->status == 200) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    FAIL() << "service did not come up";
  }

  void TearDown() override { shutdown(); }

  void shutdown() {
    if (!service_) return;
    service_->stop();
    if (thread_.joinable()) thread_.join();
    client_.reset();
    service_.reset();
  }

  struct Reply {
    int status = 0;
    json body;
  };

  Reply get(const std::string& path) {
    auto r = client_->Get(path);
    if (!r) return {};
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }

  Reply post(const std::string& path, const json& body) {
    return post_text(path, body.dump(), "application/json");
  }

  Reply post_text(const std::string& path, const std::string& body, const std::string& type) {
    auto r = client_->Post(path, body, type);
    if (!r) return {};
    json parsed;
    try {
      parsed = json::parse(r->body);
    } catch (const json::exception&) {
    }
    return {r->status, parsed};
  }

  static std::vector<double> redundancies(const json& report) {
    std::vector<double> out;
    for (const auto& e : report.at("elements")) out.push_back(e.at("redundancy").get<double>());
    return out;
  }

  std::unique_ptr<DesignService> service_;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(ServiceTest, Health) {
  const Reply r = get("/health");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
  EXPECT_EQ(r.body["sessions"], 3);
}

TEST_F(ServiceTest, ModelOfSeededSystemA) {
  const Reply r = get("/sessions/default/model");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["id"], "default");
  EXPECT_EQ(r.body["generation"], 0);
  EXPECT_EQ(r.body["n_s"], 1);
  EXPECT_EQ(r.body["geometry"], false);
  const std::vector<double> expected{0.0, 0.586, 0.207, 0.0, 0.207};
  const auto got = redundancies(r.body);
  ASSERT_EQ(got.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(got[i], expected[i], 5e-4);
  EXPECT_EQ(r.body["zero_redundancy_ids"], json({1, 4}));
  EXPECT_EQ(r.body["elements"][0]["kind"], "raw");
  EXPECT_EQ(r.body["trace_text"], format_number(r.body["trace"].get<double>(), 0, NumberStyle::Shortest));
  EXPECT_EQ(get("/model").body, r.body);
}

TEST_F(ServiceTest, GeometricModel) {
  const Reply r = get("/sessions/geo/model");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["geometry"], true);
  EXPECT_EQ(r.body["dimension"], 2);
  EXPECT_EQ(r.body["nodes"].size(), 5u);
  EXPECT_EQ(r.body["elements"][0]["kind"], "truss");
  EXPECT_EQ(r.body["elements"][0]["nodes"], json({1, 2}));
  EXPECT_EQ(r.body["elements"][0]["E"], 200.0);
}

TEST_F(ServiceTest, SystemCFlagsElementTwo) {
  const Reply r = get("/sessions/c/redundancy");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["elements"][1]["zero"], true);
}

TEST_F(ServiceTest, UnknownSessionIs404) {
  EXPECT_EQ(get("/sessions/nope/model").status, 404);
  EXPECT_EQ(get("/sessions/nope/redundancy").body["error"], "unknown_session");
  EXPECT_EQ(post("/sessions/nope/update", {{"op", "remove 2"}}).status, 404);
  EXPECT_EQ(post("/sessions/nope/preview", {{"op", kBraceOp}}).status, 404);
  EXPECT_EQ(post("/sessions/nope/undo", json::object()).status, 404);
}

TEST_F(ServiceTest, AddDiffMatchesReferenceDiagonals) {
  const Reply r = post("/sessions/default/update", {{"op", kBraceOp}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["generation"], 1);
  EXPECT_EQ(r.body["n_s"], 2);
  const Eigen::VectorXd ra = fixtures::printed_redundancy_a().diagonal();
  const Eigen::VectorXd rb = fixtures::printed_redundancy_b().diagonal();
  const int old_rows[] = {0, 1, 3, 4, 5};
  int checked = 0;
  for (const auto& d : r.body["diff"]) {
    const int id = d["id"];
    if (id > 5) {
      EXPECT_TRUE(d["before"].is_null());
      EXPECT_NEAR(d["after"].get<double>(), rb[2], 1e-3);
      continue;
    }
    EXPECT_NEAR(d["delta"].get<double>(), rb[old_rows[id - 1]] - ra[id - 1], 1e-3);
    ++checked;
  }
  EXPECT_EQ(checked, 5);
}

TEST_F(ServiceTest, DeterminateRemovalIs409AndUnchanged) {
  const Reply before = get("/sessions/default/model");
  const Reply r = post("/sessions/default/update", {{"op", "remove 1"}});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["error"], "statically_determinate_removal");
  EXPECT_EQ(r.body["element_ids"], json({1}));
  EXPECT_EQ(r.body["element_numbers"], json({1}));
  EXPECT_EQ(get("/sessions/default/model").body, before.body);
  const Reply structured =
      post("/sessions/default/update", {{"type", "remove"}, {"element", 4}});
  EXPECT_EQ(structured.status, 409);
  EXPECT_EQ(structured.body["element_ids"], json({4}));
}

TEST_F(ServiceTest, SingularExchangeIs409) {
  const Reply r = post("/sessions/default/update", {{"op", "exchange 1 c 200 row 0 0 0 1"}});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["error"], "gate_singular");
}

TEST_F(ServiceTest, MalformedOperationsAre422) {
  EXPECT_EQ(post("/sessions/default/update", {{"op", "frobnicate 1"}}).body["error"], "malformed_op");
  EXPECT_EQ(post("/sessions/default/update", {{"type", "add"}}).status, 422);
  EXPECT_EQ(post("/sessions/default/update", {{"type", "twist"}}).status, 422);
  EXPECT_EQ(post("/sessions/default/update", json::array()).status, 422);
  EXPECT_EQ(post_text("/sessions/default/update", "{not json", "application/json").body["error"],
            "malformed_request");
  const Reply invalid = post("/sessions/default/update", {{"op", "remove 9"}});
  EXPECT_EQ(invalid.status, 422);
  EXPECT_EQ(invalid.body["error"], "invalid_op");
  EXPECT_EQ(post("/sessions/default/update", {{"op", "add c 1 row 1 0"}}).body["error"], "invalid_op");
  EXPECT_EQ(get("/sessions/default/model").body["generation"], 0);
}

TEST_F(ServiceTest, SelfExchangeHasZeroDiff) {
  const Reply r = post("/sessions/geo/update",
                       {{"type", "exchange"},
                        {"element", "@2"},
                        {"replacement", {{"kind", "truss"}, {"nodes", {1, 3}}, {"E", 200}, {"A", 1}}}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  for (const auto& d : r.body["diff"]) EXPECT_NEAR(d["delta"].get<double>(), 0.0, 1e-12);
}

TEST_F(ServiceTest, StructuredOperations) {
  Reply r = post("/sessions/geo/update",
                 {{"type", "add"},
                  {"at", 3},
                  {"element", {{"id", 6}, {"kind", "truss"}, {"nodes", {4, 2}}, {"E", 200}, {"A", 1}}}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["elements"][2]["id"], 6);
  r = post("/sessions/geo/update", {{"type", "remove"}, {"elements", {4}}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  r = post("/sessions/geo/update", json::parse(R"({"type": "exchange", "element": {"id": 6},
                                                   "replacement": {"c": [200], "rows": [{"4": 1.0}]}})"));
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["generation"], 3);
  const auto got = redundancies(r.body);
  const std::vector<double> expected{0.0, 0.586, 0.207, 0.0, 0.207};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(got[i], expected[i], 5e-4);
  const Reply model = get("/sessions/geo/model");
  EXPECT_EQ(model.body["elements"][2]["kind"], "raw");
}

TEST_F(ServiceTest, GroupedAddIsOneGeneration) {
  const Reply r = post("/sessions/default/update", json::parse(R"({"type": "add", "elements": [
      {"c": [10], "rows": [[1, 0, 0, 0]]}, {"c": [20], "rows": [[0, 1, 0, 0]]}]})"));
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["generation"], 1);
  EXPECT_EQ(r.body["n_s"], 3);
}

TEST_F(ServiceTest, PreviewMatchesUpdateAndKeepsGeneration) {
  const Reply preview = post("/sessions/default/preview", {{"op", kBraceOp}});
  ASSERT_EQ(preview.status, 200) << preview.body.dump();
  EXPECT_EQ(preview.body["generation"], 0);
  EXPECT_EQ(get("/sessions/default/model").body["generation"], 0);
  const Reply update = post("/sessions/default/update", {{"op", kBraceOp}});
  for (const auto& p : preview.body["elements"]) {
    EXPECT_GE(p["delta"].get<double>(), -1e-12);
    for (const auto& d : update.body["diff"]) {
      if (d["id"] == p["id"]) EXPECT_NEAR(p["delta"].get<double>(), d["delta"].get<double>(), 1e-12);
    }
  }
}

TEST_F(ServiceTest, PreviewRejectsNonAddAndOrthogonalIsZero) {
  EXPECT_EQ(post("/sessions/default/preview", {{"op", "remove 2"}}).status, 422);
  // Element 1 is the only member on DOF 2.
  const Reply r = post("/sessions/default/preview", {{"op", "add c 50 row 0 1 0 0"}});
  ASSERT_EQ(r.status, 200);
  for (const auto& e : r.body["elements"]) {
    if (e["number"] != 1) EXPECT_NEAR(e["delta"].get<double>(), 0.0, 1e-12) << e.dump();
  }
}

TEST_F(ServiceTest, UndoRestoresExactly) {
  EXPECT_EQ(post("/sessions/default/undo", json::object()).body["error"], "nothing_to_undo");
  const Reply before = get("/sessions/default/redundancy");
  ASSERT_EQ(post("/sessions/default/update", {{"op", kBraceOp}}).status, 200);
  const Reply undone = post_text("/sessions/default/undo", "", "application/json");
  ASSERT_EQ(undone.status, 200);
  EXPECT_EQ(undone.body["generation"], 2);
  EXPECT_EQ(undone.body["undo_depth"], 0);
  EXPECT_EQ(undone.body["elements"], before.body["elements"]);
  EXPECT_EQ(undone.body["trace"], before.body["trace"]);
}

TEST_F(ServiceTest, CycleEqualsThreeUndos) {
  const std::string ops[] = {kBraceOp, "remove 4", "exchange 3 c 200 row 0 0 0 1"};
  for (const auto& op : ops) ASSERT_EQ(post("/sessions/default/update", {{"op", op}}).status, 200);
  const Reply cycled = get("/sessions/default/redundancy");
  for (int i = 0; i < 3; ++i) ASSERT_EQ(post("/sessions/default/undo", json::object()).status, 200);
  const Reply undone = get("/sessions/default/redundancy");
  EXPECT_EQ(undone.body["generation"], 6);
  const auto a = redundancies(cycled.body);
  const auto b = redundancies(undone.body);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST_F(ServiceTest, UndoDepthIsBounded) {
  shutdown();
  ServiceOptions options;
  options.undo_depth = 2;
  start(options);
  for (int i = 0; i < 4; ++i) {
    ASSERT_EQ(post("/sessions/default/update", {{"op", "exchange 2 c 141.4213562373095 row 0 0 0.7071067811865476 0.7071067811865476"}}).status, 200);
  }
  EXPECT_EQ(post("/sessions/default/undo", json::object()).status, 200);
  EXPECT_EQ(post("/sessions/default/undo", json::object()).status, 200);
  EXPECT_EQ(post("/sessions/default/undo", json::object()).status, 409);
}

TEST_F(ServiceTest, ExpectedGenerationConflict) {
  EXPECT_EQ(post("/sessions/default/update", {{"op", "remove 2"}, {"expected_generation", 5}}).body["error"],
            "generation_mismatch");
  EXPECT_EQ(post("/sessions/default/update", {{"op", "remove 2"}, {"expected_generation", 0}}).status, 200);
}

TEST_F(ServiceTest, ConcurrentConflictingPostsHaveOneWinner) {
  for (int round = 0; round < 5; ++round) {
    const int generation = get("/sessions/geo/model").body["generation"];
    std::vector<int> statuses(2);
    std::vector<std::thread> threads;
    for (int t = 0; t < 2; ++t) {
      threads.emplace_back([&, t] {
        httplib::Client c("127.0.0.1", service_->port());
        const json body = {{"op", "add truss 2 4 E 100 A 1"}, {"expected_generation", generation}};
        auto r = c.Post("/sessions/geo/update", body.dump(), "application/json");
        statuses[static_cast<std::size_t>(t)] = r ? r->status : 0;
      });
    }
    for (auto& th : threads) th.join();
    std::sort(statuses.begin(), statuses.end());
    EXPECT_EQ(statuses, (std::vector<int>{200, 409}));
    EXPECT_EQ(get("/sessions/geo/model").body["generation"], generation + 1);
  }
}

TEST_F(ServiceTest, VerifyFlagReportsAgreement) {
  const Reply r = post("/sessions/default/update?verify=1", {{"op", kBraceOp}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["verification"]["ok"], true);
  EXPECT_EQ(r.body["verification"]["recomputed_n_s"], r.body["n_s"]);
  const Reply m = get("/sessions/default/model?verify=true");
  EXPECT_EQ(m.body["verification"]["ok"], true);
  EXPECT_FALSE(get("/sessions/default/model").body.contains("verification"));
}

TEST_F(ServiceTest, CreateSessions) {
  std::string text = serialize_model(fixtures::system_b());
  Reply r = post_text("/sessions", text, "text/plain");
  ASSERT_EQ(r.status, 201) << r.body.dump();
  const std::string id = r.body["id"];
  EXPECT_EQ(r.body["n_s"], 2);
  EXPECT_EQ(get("/sessions/" + id + "/redundancy").status, 200);

  r = post("/sessions", {{"document", text}, {"id", "mine"}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body["id"], "mine");

  r = post_text("/sessions", "rxm 1\ndim 2\nnode 1 0 0 fix xy\nnode 2 1 q\n", "text/plain");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["error"], "parse_error");
  EXPECT_EQ(r.body["line"], 4);
  r = post_text("/sessions", "rxm 1\ndim 2\nnode 1 0 0 fix xy\nnode 2 1 0\ntruss 1 1 2 E 1 A 1\n",
                "text/plain");
  EXPECT_EQ(r.body["error"], "invalid_model");
  EXPECT_EQ(post("/sessions", {{"nodocument", 1}}).body["error"], "malformed_request");
}

TEST_F(ServiceTest, ParseOperationForms) {
  EXPECT_TRUE(std::holds_alternative<RemoveStep>(parse_operation({{"op", "remove @3"}})));
  const ScriptStep s = parse_operation(
      {{"type", "add"}, {"element", {{"kind", "beam"}, {"nodes", {1, 2}}, {"E", 1}, {"A", 1}, {"I", 2}}}});
  const auto& add = std::get<AddStep>(s);
  EXPECT_EQ(std::get<GeometricPayload>(add.elements[0].payload).kind, ElementKind::PlaneBeam);
  EXPECT_THROW(parse_operation({{"type", "remove"}, {"element", "x3"}}), redmx::ModelError);
  EXPECT_THROW(parse_operation({{"type", "remove"}, {"element", 0}}), redmx::ModelError);
  EXPECT_THROW(parse_operation({{"op", "remove 1\nremove 2"}}), redmx::Error);
}

TEST_F(ServiceTest, StaticFiles) {
  shutdown();
  const auto dir = std::filesystem::temp_directory_path() / "redmx_static_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "index.html") << "<html>redmx</html>";
  ServiceOptions options;
  options.static_dir = dir.string();
  start(options);
  auto r = client_->Get("/index.html");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, "<html>redmx</html>");
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace redmx::service
