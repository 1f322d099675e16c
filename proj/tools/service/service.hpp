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

// HTTP session service for interactive design. See openapi.yaml for the
// request and response schemas.

#ifndef REDMX_SERVICE_SERVICE_HPP_
#define REDMX_SERVICE_SERVICE_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "redmx/io.hpp"
#include "redmx/workbench.hpp"

namespace redmx::service {

inline constexpr const char* kDefaultSession = "default";

struct ServiceOptions {
  std::size_t undo_depth = 32;
  std::string static_dir;  // served under / when set
};

/// Parses an update request body: {"op": "<script step>"} or a structured
/// operation. Throws ParseError or ModelError.
ScriptStep parse_operation(const nlohmann::json& body);

nlohmann::json report_json(const Workbench& bench);
nlohmann::json model_json(const Workbench& bench);

class DesignService {
 public:
  explicit DesignService(ServiceOptions options = {});
  ~DesignService();
  DesignService(const DesignService&) = delete;
  DesignService& operator=(const DesignService&) = delete;

  /// Builds a session from a document and returns its id. Throws on
  /// invalid models.
  std::string create_session(const ModelDocument& document,
                             std::optional<std::string> id = std::nullopt);

  /// Port 0 picks a free port. Returns false when binding fails.
  bool bind(const std::string& host, int port);
  int port() const;
  /// Serves until stop(); requires a successful bind().
  bool run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace redmx::service

#endif  // REDMX_SERVICE_SERVICE_HPP_
