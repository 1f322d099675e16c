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

#include <deque>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "httplib.h"
#include "redmx/errors.hpp"
#include "redmx/woodbury.hpp"

namespace redmx::service {

using nlohmann::json;

namespace {

struct Session {
  std::shared_mutex mutex;
  Workbench bench;
  std::deque<Workbench> undo;
};

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, json body)
      : std::runtime_error(body.value("message", "")), status_(status), body_(std::move(body)) {}
  int status() const { return status_; }
  const json& body() const { return body_; }

 private:
  int status_;
  json body_;
};

json error_body(const std::string& code, const std::string& message) {
  return {{"error", code}, {"message", message}};
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

ElementRef ref_from_json(const json& j) {
  ElementRef ref;
  if (j.is_number_integer()) {
    ref.value = j.get<int>();
  } else if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.empty() || s[0] != '@') throw ModelError("element reference must be a number or @id");
    ref.kind = ElementRef::Kind::Id;
    ref.value = std::stoi(s.substr(1));
  } else if (j.is_object() && j.contains("id")) {
    ref.kind = ElementRef::Kind::Id;
    ref.value = j.at("id").get<int>();
  } else {
    throw ModelError("invalid element reference " + j.dump());
  }
  if (ref.value < 1) throw ModelError("element references start at 1");
  return ref;
}

ScriptElement element_from_json(const json& j) {
  if (!j.is_object()) throw ModelError("element payload must be an object");
  ScriptElement e;
  e.id = j.value("id", 0);
  if (j.contains("c")) {
    RawPayload p;
    p.stiffness = j.at("c").get<std::vector<double>>();
    for (const auto& row : j.at("rows")) {
      RawRow r;
      if (row.is_object()) {
        r.sparse = true;
        for (const auto& [key, value] : row.items()) {
          const int column = std::stoi(key);
          if (column < 1) throw ModelError("sparse columns start at 1");
          r.columns.push_back(column - 1);
          r.values.push_back(value.get<double>());
        }
      } else {
        r.values = row.get<std::vector<double>>();
      }
      p.rows.push_back(std::move(r));
    }
    if (p.rows.size() != p.stiffness.size()) throw ModelError("c and rows differ in length");
    e.payload = std::move(p);
    return e;
  }
  GeometricPayload g;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "truss") {
    g.kind = ElementKind::Truss;
  } else if (kind == "beam") {
    g.kind = ElementKind::PlaneBeam;
    g.moment_of_inertia = j.at("I").get<double>();
  } else {
    throw ModelError("unknown element kind '" + kind + "'");
  }
  const auto nodes = j.at("nodes").get<std::vector<int>>();
  if (nodes.size() != 2) throw ModelError("an element needs exactly two nodes");
  g.node_ids = {nodes[0], nodes[1]};
  g.youngs_modulus = j.at("E").get<double>();
  g.area = j.at("A").get<double>();
  e.payload = g;
  return e;
}

std::string number_text(double v) { return format_number(v, 0, NumberStyle::Shortest); }

json diff_json(const RedundancyReport& before, const RedundancyReport& after) {
  std::unordered_map<int, double> old;
  for (const auto& e : before.elements) old.emplace(e.id, e.redundancy);
  json diff = json::array();
  for (const auto& e : after.elements) {
    json d = {{"id", e.id}, {"number", e.position + 1}, {"after", e.redundancy}};
    if (auto it = old.find(e.id); it != old.end()) {
      d["before"] = it->second;
      d["delta"] = e.redundancy - it->second;
      old.erase(it);
    } else {
      d["before"] = nullptr;
      d["delta"] = nullptr;
    }
    diff.push_back(std::move(d));
  }
  for (const auto& e : before.elements) {
    if (old.count(e.id) != 0) {
      diff.push_back({{"id", e.id}, {"number", nullptr}, {"before", e.redundancy},
                      {"after", nullptr}, {"delta", nullptr}});
    }
  }
  return diff;
}

json verification_json(const Workbench& bench) {
  const OracleDeviation d = oracle_deviation(bench.state());
  const Index ns = bench.state().rows() - numerical_rank(bench.state().sys);
  return {{"redundancy", d.redundancy},
          {"stiffness_inverse", d.stiffness_inverse},
          {"trace", d.trace},
          {"recomputed_n_s", ns},
          {"ok", d.redundancy <= 1e-9 && d.stiffness_inverse <= 1e-9 && d.trace <= 1e-8}};
}

bool wants_verify(const httplib::Request& req) {
  if (!req.has_param("verify")) return false;
  const std::string v = req.get_param_value("verify");
  return v == "1" || v == "true";
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw HttpError(422, error_body("malformed_request", std::string("invalid JSON: ") + e.what()));
  }
}

}  // namespace

ScriptStep parse_operation(const json& body) {
  if (!body.is_object()) throw ModelError("operation must be a JSON object");
  try {
    if (body.contains("op")) {
      const std::string text = body.at("op").get<std::string>();
      UpdateScript script = parse_update_script("rxu 1\n" + text);
      if (script.steps.size() != 1) throw ModelError("expected exactly one operation");
      return std::move(script.steps.front().step);
    }
    const std::string type = body.at("type").get<std::string>();
    if (type == "add") {
      AddStep step;
      if (body.contains("at") && !body.at("at").is_null()) step.at = body.at("at").get<int>();
      if (body.contains("elements")) {
        for (const auto& e : body.at("elements")) step.elements.push_back(element_from_json(e));
        step.grouped = true;
      } else {
        step.elements.push_back(element_from_json(body.at("element")));
      }
      if (step.elements.empty()) throw ModelError("add needs at least one element");
      return step;
    }
    if (type == "remove") {
      RemoveStep step;
      if (body.contains("elements")) {
        for (const auto& r : body.at("elements")) step.elements.push_back(ref_from_json(r));
      } else {
        step.elements.push_back(ref_from_json(body.at("element")));
      }
      if (step.elements.empty()) throw ModelError("remove needs at least one element");
      return step;
    }
    if (type == "exchange") {
      ExchangeStep step;
      step.element = ref_from_json(body.at("element"));
      step.replacement = element_from_json(body.at("replacement"));
      return step;
    }
    throw ModelError("unknown operation type '" + type + "'");
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed operation: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ModelError("malformed number in operation");
  } catch (const std::out_of_range&) {
    throw ModelError("number out of range in operation");
  }
}

json report_json(const Workbench& bench) {
  const RedundancyReport r = bench.report();
  json elements = json::array();
  for (const auto& e : r.elements) {
    const RowRange range = bench.state().sys.row_range(e.position);
    std::vector<double> diagonal(r.diagonal.data() + range.offset,
                                 r.diagonal.data() + range.offset + range.count);
    elements.push_back({{"number", e.position + 1},
                        {"id", e.id},
                        {"modes", e.modes},
                        {"redundancy", e.redundancy},
                        {"zero", e.zero},
                        {"diagonal", diagonal}});
  }
  return {{"generation", r.generation},
          {"n_q", r.modes},
          {"n", r.dofs},
          {"n_s", r.static_indeterminacy},
          {"trace", r.trace},
          {"trace_text", number_text(r.trace)},
          {"zero_redundancy_ids", r.zero_redundancy_ids},
          {"elements", elements}};
}

json model_json(const Workbench& bench) {
  json out = report_json(bench);
  out["geometry"] = bench.has_geometry();
  json nodes = json::array();
  if (bench.has_geometry()) {
    const StructuralModel& g = *bench.geometry();
    out["dimension"] = g.dimension;
    for (const auto& n : g.nodes) {
      std::vector<double> coords(n.coords.data(), n.coords.data() + g.dimension);
      std::vector<bool> fixed(n.fixed.begin(), n.fixed.begin() + g.dimension);
      nodes.push_back({{"id", n.id},
                       {"coords", coords},
                       {"fixed", fixed},
                       {"fixed_rotation", n.fixed_rotation}});
    }
  } else {
    out["dimension"] = nullptr;
  }
  out["nodes"] = nodes;
  auto& elements = out["elements"];
  for (std::size_t p = 0; p < bench.elements().size(); ++p) {
    const auto& record = bench.elements()[p];
    if (record) {
      elements[p]["kind"] = record->kind == ElementKind::Truss ? "truss" : "beam";
      elements[p]["nodes"] = {record->node_ids[0], record->node_ids[1]};
      elements[p]["E"] = record->youngs_modulus;
      elements[p]["A"] = record->area;
      if (record->kind == ElementKind::PlaneBeam) elements[p]["I"] = record->moment_of_inertia;
    } else {
      elements[p]["kind"] = "raw";
      elements[p]["nodes"] = nullptr;
    }
  }
  return out;
}

struct DesignService::Impl {
  ServiceOptions options;
  httplib::Server server;
  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::uint64_t next_session = 1;
  bool bound = false;
  int port = 0;

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) {
      throw HttpError(404, error_body("unknown_session", "no session '" + id + "'"));
    }
    return it->second;
  }

  std::string add_session(const ModelDocument& document, std::optional<std::string> id) {
    auto session = std::make_shared<Session>();
    session->bench = Workbench::from_document(document);
    std::lock_guard lock(sessions_mutex);
    std::string key = id ? *id : "s" + std::to_string(next_session++);
    while (!id && sessions.count(key) != 0) key = "s" + std::to_string(next_session++);
    sessions[key] = std::move(session);
    return key;
  }

  // Runs fn under an exclusive, non-blocking session lock.
  template <typename Fn>
  json mutate(const std::string& id, const json& body, Fn&& fn) {
    auto session = find(id);
    std::unique_lock lock(session->mutex, std::try_to_lock);
    if (!lock.owns_lock()) {
      throw HttpError(409, error_body("busy", "another update of this session is in progress"));
    }
    const std::uint64_t generation = session->bench.state().generation;
    if (body.is_object() && body.contains("expected_generation") &&
        !body.at("expected_generation").is_null()) {
      const auto expected = body.at("expected_generation").get<std::uint64_t>();
      if (expected != generation) {
        json e = error_body("generation_mismatch", "session is at generation " +
                                                       std::to_string(generation));
        e["generation"] = generation;
        throw HttpError(409, e);
      }
    }
    return fn(*session);
  }

  json update(Session& s, const json& body, bool verify) {
    ScriptStep step;
    try {
      step = parse_operation(body);
    } catch (const ParseError& e) {
      json b = error_body("malformed_op", e.what());
      b["line"] = e.line();
      b["column"] = e.column();
      throw HttpError(422, b);
    } catch (const ModelError& e) {
      throw HttpError(422, error_body("malformed_op", e.what()));
    }
    const RedundancyReport before = s.bench.report();
    Workbench snapshot = s.bench;
    try {
      s.bench.apply(step);
    } catch (const StaticallyDeterminateRemoval& e) {
      json b = error_body("statically_determinate_removal", e.what());
      b["element_ids"] = e.ids();
      std::vector<std::size_t> numbers;
      for (auto p : e.positions()) numbers.push_back(p + 1);
      b["element_numbers"] = numbers;
      b["rcond"] = e.rcond();
      throw HttpError(409, b);
    } catch (const GateSingular& e) {
      json b = error_body("gate_singular", e.what());
      b["rcond"] = e.rcond();
      throw HttpError(409, b);
    } catch (const ModelError& e) {
      throw HttpError(422, error_body("invalid_op", e.what()));
    }
    s.undo.push_back(std::move(snapshot));
    while (s.undo.size() > options.undo_depth) s.undo.pop_front();
    json out = report_json(s.bench);
    out["diff"] = diff_json(before, s.bench.report());
    out["undo_depth"] = s.undo.size();
    if (verify) out["verification"] = verification_json(s.bench);
    return out;
  }

  json preview(Session& s, const json& body) {
    ScriptStep step;
    try {
      step = parse_operation(body);
    } catch (const Error& e) {
      throw HttpError(422, error_body("malformed_op", e.what()));
    }
    const auto* add = std::get_if<AddStep>(&step);
    if (add == nullptr) throw HttpError(422, error_body("malformed_op", "preview needs an add"));
    Eigen::VectorXd delta;
    try {
      delta = s.bench.preview(*add);
    } catch (const ModelError& e) {
      throw HttpError(422, error_body("invalid_op", e.what()));
    } catch (const GateSingular& e) {
      throw HttpError(409, error_body("gate_singular", e.what()));
    }
    const SystemMatrices& sys = s.bench.state().sys;
    json elements = json::array();
    for (std::size_t p = 0; p < sys.element_count(); ++p) {
      const RowRange r = sys.row_range(p);
      std::vector<double> rows(delta.data() + r.offset, delta.data() + r.offset + r.count);
      elements.push_back({{"number", p + 1},
                          {"id", sys.elements()[p].id},
                          {"delta", delta.segment(r.offset, r.count).sum()},
                          {"diagonal_delta", rows}});
    }
    return {{"generation", s.bench.state().generation}, {"elements", elements}};
  }

  void routes() {
    auto guard = [](auto&& fn) {
      return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
          fn(req, res);
        } catch (const HttpError& e) {
          send(res, e.status(), e.body());
        } catch (const std::exception& e) {
          send(res, 500, error_body("internal", e.what()));
        }
      };
    };
    auto session_id = [](const httplib::Request& req) {
      return req.matches.size() > 1 ? std::string(req.matches[1]) : std::string(kDefaultSession);
    };

    server.Get("/health", guard([this](const httplib::Request&, httplib::Response& res) {
      std::size_t count = 0;
      {
        std::lock_guard lock(sessions_mutex);
        count = sessions.size();
      }
      send(res, 200, {{"status", "ok"}, {"sessions", count}});
    }));

    server.Post("/sessions", guard([this](const httplib::Request& req, httplib::Response& res) {
      std::string text = req.body;
      std::optional<std::string> requested;
      const auto first = text.find_first_not_of(" \t\r\n");
      if (first != std::string::npos && text[first] == '{') {
        const json body = parse_body(req);
        if (!body.contains("document") || !body.at("document").is_string()) {
          throw HttpError(422, error_body("malformed_request", "missing 'document' string"));
        }
        text = body.at("document").get<std::string>();
        if (body.contains("id")) requested = body.at("id").get<std::string>();
      }
      std::string id;
      try {
        id = add_session(parse_model(text), requested);
      } catch (const ParseError& e) {
        json b = error_body("parse_error", e.what());
        b["line"] = e.line();
        b["column"] = e.column();
        throw HttpError(422, b);
      } catch (const Error& e) {
        throw HttpError(422, error_body("invalid_model", e.what()));
      }
      json out = model_json(find(id)->bench);
      out["id"] = id;
      send(res, 201, out);
    }));

    auto get_model = [this, session_id](const httplib::Request& req, httplib::Response& res) {
      auto s = find(session_id(req));
      std::shared_lock lock(s->mutex);
      json out = model_json(s->bench);
      out["id"] = session_id(req);
      if (wants_verify(req)) out["verification"] = verification_json(s->bench);
      send(res, 200, out);
    };
    auto get_redundancy = [this, session_id](const httplib::Request& req,
                                             httplib::Response& res) {
      auto s = find(session_id(req));
      std::shared_lock lock(s->mutex);
      json out = report_json(s->bench);
      out["id"] = session_id(req);
      if (wants_verify(req)) out["verification"] = verification_json(s->bench);
      send(res, 200, out);
    };
    auto post_update = [this, session_id](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const bool verify = wants_verify(req);
      json out = mutate(session_id(req), body, [&](Session& s) { return update(s, body, verify); });
      out["id"] = session_id(req);
      send(res, 200, out);
    };
    auto post_preview = [this, session_id](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      auto s = find(session_id(req));
      std::shared_lock lock(s->mutex);
      json out = preview(*s, body);
      out["id"] = session_id(req);
      send(res, 200, out);
    };
    auto post_undo = [this, session_id](const httplib::Request& req, httplib::Response& res) {
      const json body = req.body.empty() ? json::object() : parse_body(req);
      json out = mutate(session_id(req), body, [&](Session& s) {
        if (s.undo.empty()) throw HttpError(409, error_body("nothing_to_undo", "undo stack is empty"));
        const std::uint64_t generation = s.bench.state().generation + 1;
        s.bench = std::move(s.undo.back());
        s.undo.pop_back();
        s.bench.set_generation(generation);
        json r = report_json(s.bench);
        r["undo_depth"] = s.undo.size();
        return r;
      });
      out["id"] = session_id(req);
      send(res, 200, out);
    };

    server.Get(R"(/sessions/([^/]+)/model)", guard(get_model));
    server.Get(R"(/sessions/([^/]+)/redundancy)", guard(get_redundancy));
    server.Post(R"(/sessions/([^/]+)/update)", guard(post_update));
    server.Post(R"(/sessions/([^/]+)/preview)", guard(post_preview));
    server.Post(R"(/sessions/([^/]+)/undo)", guard(post_undo));
    server.Get("/model", guard(get_model));
    server.Get("/redundancy", guard(get_redundancy));

    if (!options.static_dir.empty()) server.set_mount_point("/", options.static_dir);
  }
};

DesignService::DesignService(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  // SO_REUSEADDR only.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  impl_->routes();
}

DesignService::~DesignService() { stop(); }

std::string DesignService::create_session(const ModelDocument& document,
                                          std::optional<std::string> id) {
  return impl_->add_session(document, std::move(id));
}

bool DesignService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p <= 0) return false;
    impl_->port = p;
  } else {
    if (!impl_->server.bind_to_port(host, port)) return false;
    impl_->port = port;
  }
  impl_->bound = true;
  return true;
}

int DesignService::port() const { return impl_->port; }

bool DesignService::run() {
  if (!impl_->bound) return false;
  return impl_->server.listen_after_bind();
}

void DesignService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace redmx::service
