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

// redmx command line tool.
//
// Exit codes:
//   0 success
//   1 usage error
//   2 parse or model error
//   3 kinematically indeterminate model (rank deficient / not positive definite)
//   4 removal of a statically determinate part
//   5 singular update gate
//   6 benchmark correctness gate failed
//   7 --verify found a deviation from recomputation
//   8 file I/O error
//   9 could not bind the service address

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "redmx/errors.hpp"
#include "redmx/fixtures.hpp"
#include "redmx/io.hpp"
#include "redmx/redundancy.hpp"
#include "redmx/scalable.hpp"
#include "redmx/woodbury.hpp"
#include "redmx/workbench.hpp"
#include "service.hpp"

namespace {

enum Exit {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kIndeterminate = 3,
  kDeterminateRemoval = 4,
  kGateSingular = 5,
  kBenchGate = 6,
  kVerify = 7,
  kIo = 8,
  kBind = 9,
};

constexpr redmx::Index kVerifyDefaultLimit = 2000;

class IoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path);
  out << content;
  if (!out) throw IoFailure("cannot write " + path);
}

redmx::NumberStyle parse_style(const std::string& name) {
  if (name == "fixed") return redmx::NumberStyle::Fixed;
  if (name == "significant") return redmx::NumberStyle::Significant;
  return redmx::NumberStyle::Shortest;
}

struct ExportOptions {
  std::string r_path;
  std::string kinv_path;
  std::string report_path;
  int precision = 3;
  std::string style = "fixed";
};

void add_export_options(CLI::App* app, ExportOptions& o) {
  app->add_option("--export-R", o.r_path, "Write R to a .mat.txt file");
  app->add_option("--export-Kinv", o.kinv_path, "Write K^-1 to a .mat.txt file");
  app->add_option("--report", o.report_path, "Also write the report to a .report.txt file");
  app->add_option("--precision", o.precision, "Digits in matrix exports")
      ->check(CLI::Range(0, 17));
  app->add_option("--style", o.style, "Number style of matrix exports")
      ->check(CLI::IsMember({"fixed", "significant", "shortest"}));
}

void write_exports(const redmx::SystemState& state, const ExportOptions& o,
                   const std::string& report) {
  const auto style = parse_style(o.style);
  if (!o.r_path.empty()) {
    write_file(o.r_path, redmx::export_matrix(state.redundancy.to_dense(), o.precision, style));
  }
  if (!o.kinv_path.empty()) {
    write_file(o.kinv_path, redmx::export_matrix(state.stiffness_inverse, o.precision, style));
  }
  if (!o.report_path.empty()) write_file(o.report_path, report);
}

redmx::ModelDocument load_model(const std::string& path) {
  return redmx::parse_model(read_file(path));
}

int run_compute(const std::string& model_path, int scalable_k, const ExportOptions& o) {
  redmx::ModelDocument document;
  if (scalable_k > 0) {
    document = redmx::generate_scalable_truss(scalable_k);
  } else {
    if (model_path.empty()) throw UsageFailure("compute needs a model file or --scalable K");
    document = load_model(model_path);
  }
  const redmx::Workbench bench = redmx::Workbench::from_document(document);
  const std::string report = redmx::format_report(bench.report());
  std::cout << report;
  write_exports(bench.state(), o, report);
  return kOk;
}

int run_update(const std::string& model_path, const std::string& script_path,
               std::optional<bool> verify_flag, const std::string& model_out,
               const ExportOptions& o) {
  redmx::Workbench bench = redmx::Workbench::from_document(load_model(model_path));
  const redmx::UpdateScript script = redmx::parse_update_script(read_file(script_path));
  const bool verify = verify_flag.value_or(bench.state().rows() <= kVerifyDefaultLimit);
  std::size_t number = 0;
  for (const auto& line : script.steps) {
    ++number;
    try {
      bench.apply(line.step);
    } catch (const redmx::Error& e) {
      std::cerr << "step " << number << " (line " << line.line << "): ";
      throw;
    }
    std::cout << "step " << number << " line " << line.line << ": "
              << redmx::serialize_step(line.step).substr(0, redmx::serialize_step(line.step).find('\n'))
              << " -> generation " << bench.state().generation << ", n_q "
              << bench.state().rows() << ", trace "
              << redmx::format_number(bench.state().redundancy.view().trace(), 6) << '\n';
    if (verify) {
      const redmx::OracleDeviation d = redmx::oracle_deviation(bench.state());
      if (!(d.redundancy <= 1e-9) || !(d.stiffness_inverse <= 1e-9) || !(d.trace <= 1e-8)) {
        std::ostringstream msg;
        msg << "step " << number << " deviates from recomputation: R " << d.redundancy
            << ", K^-1 " << d.stiffness_inverse << ", trace " << d.trace;
        throw redmx::OracleMismatch(msg.str());
      }
    }
  }
  if (verify) std::cout << "verified " << number << " steps against recomputation\n";
  const std::string report = redmx::format_report(bench.report());
  std::cout << report;
  write_exports(bench.state(), o, report);
  if (!model_out.empty()) write_file(model_out, redmx::serialize_model(bench.document()));
  return kOk;
}

std::vector<int> parse_k_values(const std::vector<std::string>& specs) {
  std::vector<int> out;
  for (const auto& spec : specs) {
    std::stringstream items(spec);
    std::string item;
    while (std::getline(items, item, ',')) {
      const auto dots = item.find("..");
      try {
        if (dots == std::string::npos) {
          out.push_back(std::stoi(item));
        } else {
          const int lo = std::stoi(item.substr(0, dots));
          const int hi = std::stoi(item.substr(dots + 2));
          if (hi < lo) throw UsageFailure("empty k range " + item);
          for (int k = lo; k <= hi; ++k) out.push_back(k);
        }
      } catch (const std::logic_error&) {
        throw UsageFailure("invalid k value '" + item + "'");
      }
    }
  }
  return out;
}

int run_bench(const std::vector<std::string>& k_specs, int reps, int warmup,
              const std::string& scenario, bool verify, const std::string& out_path,
              const std::string& plot_path) {
  redmx::BenchConfig config;
  config.k_values = parse_k_values(k_specs);
  config.repetitions = reps;
  config.warmup = warmup;
  config.verify = verify;
  if (scenario == "add") {
    config.scenario = redmx::Scenario::Add;
  } else if (scenario == "remove") {
    config.scenario = redmx::Scenario::Remove;
  } else if (scenario == "exchange") {
    config.scenario = redmx::Scenario::Exchange;
  }
  if (const char* seed = std::getenv("REDMX_SEED")) {
    try {
      config.seed = std::stoull(seed);
    } catch (const std::logic_error&) {
      throw UsageFailure("REDMX_SEED must be an unsigned integer");
    }
  }
  try {
    redmx::validate(config);
  } catch (const redmx::ModelError& e) {
    throw UsageFailure(e.what());
  }

  std::cerr << "# seed " << config.seed << '\n';
  const auto records = redmx::run_benchmark(config, [](const redmx::BenchRecord& r) {
    std::cerr << "# k " << r.k << " done: recompute " << r.t_recompute_ms << " ms\n";
  });
  std::ostringstream table;
  redmx::write_bench_table(table, records);
  std::cout << table.str();
  if (!out_path.empty()) write_file(out_path, table.str());
  if (!plot_path.empty()) {
    std::ostringstream plot;
    redmx::write_gnuplot(plot, records);
    write_file(plot_path, plot.str());
  }
  if (records.size() >= 4) {
    for (auto series : {redmx::Series::Recompute, redmx::Series::Add, redmx::Series::Remove,
                        redmx::Series::Exchange}) {
      try {
        const double slope = redmx::fit_loglog_slope(records, series);
        std::cout << "# slope " << redmx::series_name(series) << ' '
                  << redmx::format_number(slope, 3) << ' ' << redmx::slope_label(slope) << '\n';
      } catch (const redmx::ModelError&) {
        // series not measured in this scenario
      }
    }
  }
  return kOk;
}

redmx::service::DesignService* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

int run_serve(const std::string& model_path, const std::string& bind, const std::string& dir) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw UsageFailure("--bind expects host:port");
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::logic_error&) {
    throw UsageFailure("invalid port in --bind");
  }
  if (port < 0 || port > 65535) throw UsageFailure("invalid port in --bind");

  redmx::service::ServiceOptions options;
  options.static_dir = dir;
  redmx::service::DesignService service(options);
  if (!model_path.empty()) {
    service.create_session(load_model(model_path), std::string(redmx::service::kDefaultSession));
  }
  if (!service.bind(host, port)) {
    std::cerr << "error: cannot bind " << bind << '\n';
    return kBind;
  }
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << host << ':' << service.port() << std::endl;
  service.run();
  g_service = nullptr;
  return kOk;
}

int run_fixtures(const std::string& dir) {
  namespace fs = std::filesystem;
  namespace fx = redmx::fixtures;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoFailure("cannot create " + dir + ": " + ec.message());
  const fs::path out(dir);
  auto put = [&](const std::string& name, const std::string& content) {
    write_file((out / name).string(), content);
    std::cout << (out / name).string() << '\n';
  };
  using redmx::NumberStyle;
  put("system_a.rxm", redmx::serialize_model(fx::system_a()));
  put("system_b.rxm", redmx::serialize_model(fx::system_b()));
  put("system_c.rxm", redmx::serialize_model(fx::system_c()));
  put("system_a_geometry.rxm", redmx::serialize_model(fx::system_a_geometry()));
  put("cycle.rxu", fx::cycle_script());
  put("remove_determinate.rxu", "rxu 1\nremove 1\n");
  put("redundancy_a.printed.mat.txt",
      redmx::export_matrix(fx::printed_redundancy_a(), 3, NumberStyle::Significant));
  put("redundancy_b.printed.mat.txt",
      redmx::export_matrix(fx::printed_redundancy_b(), 3, NumberStyle::Significant));
  put("redundancy_c.printed.mat.txt",
      redmx::export_matrix(fx::printed_redundancy_c(), 3, NumberStyle::Significant));
  put("redundancy_cycle.printed.mat.txt",
      redmx::export_matrix(fx::printed_redundancy_cycle(), 3, NumberStyle::Significant));
  const auto full = [](const redmx::SystemMatrices& sys) {
    return redmx::export_matrix(redmx::SystemState::build(sys).redundancy.to_dense(), 0,
                                NumberStyle::Shortest);
  };
  put("redundancy_a.mat.txt", full(fx::system_a()));
  put("redundancy_b.mat.txt", full(fx::system_b()));
  put("redundancy_c.mat.txt", full(fx::system_c()));
  redmx::SystemState cycle = redmx::SystemState::build(fx::system_c());
  redmx::update_exchange(cycle, fx::kExchangePosition, fx::restored_bar());
  put("redundancy_cycle.mat.txt",
      redmx::export_matrix(cycle.redundancy.to_dense(), 0, NumberStyle::Shortest));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Redundancy matrices of trusses and frames with low-rank updates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "redmx 0.3.0");

  ExportOptions compute_exports;
  std::string compute_model;
  int scalable_k = 0;
  auto* compute = app.add_subcommand("compute", "Compute R and print the redundancy report");
  compute->add_option("model", compute_model, "Model file (.rxm)");
  compute->add_option("--scalable", scalable_k, "Use the scalable spatial truss with this k")
      ->check(CLI::Range(1, 64));
  add_export_options(compute, compute_exports);

  ExportOptions update_exports;
  std::string update_model;
  std::string update_script;
  std::string update_model_out;
  bool verify_on = false;
  bool verify_off = false;
  auto* update = app.add_subcommand("update", "Apply an update script (.rxu) to a model");
  update->add_option("model", update_model, "Model file (.rxm)")->required();
  update->add_option("script", update_script, "Update script (.rxu)")->required();
  auto* v_on = update->add_flag("--verify", verify_on,
                                "Check every step against recomputation "
                                "(default when n_q <= 2000)");
  update->add_flag("--no-verify", verify_off, "Skip the per-step check")->excludes(v_on);
  update->add_option("--write-model", update_model_out, "Write the final model (.rxm)");
  add_export_options(update, update_exports);

  std::vector<std::string> k_specs{"4..10"};
  int reps = 5;
  int warmup = 1;
  std::string scenario = "all";
  std::string bench_out;
  std::string bench_plot;
  bool bench_verify = false;
  auto* bench = app.add_subcommand("bench", "Time recomputation against updates");
  bench->add_option("--k", k_specs, "k values: list or ranges such as 4..10 or 4,6,8")
      ->delimiter(' ');
  bench->add_option("--reps", reps, "Repetitions per k (>= 3)");
  bench->add_option("--warmup", warmup, "Untimed update cycles per k");
  bench->add_option("--scenario", scenario, "Operations to time")
      ->check(CLI::IsMember({"all", "add", "remove", "exchange"}));
  bench->add_option("--out", bench_out, "Write the table to a file");
  bench->add_option("--plot", bench_plot, "Write gnuplot data to a file");
  bench->add_flag("--verify", bench_verify, "Check every timed update against recomputation");

  std::string serve_model;
  std::string bind = "127.0.0.1:7878";
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP design service");
  serve->add_option("model", serve_model, "Model file seeding the default session");
  serve->add_option("--bind", bind, "host:port (port 0 picks a free port)");
  serve->add_option("--static", static_dir, "Directory of static UI assets");

  std::string fixtures_dir = "fixtures";
  auto* fixtures = app.add_subcommand("fixtures", "Write the reference fixture files");
  fixtures->add_option("--out", fixtures_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*compute) return run_compute(compute_model, scalable_k, compute_exports);
    if (*update) {
      std::optional<bool> verify;
      if (verify_on) verify = true;
      if (verify_off) verify = false;
      return run_update(update_model, update_script, verify, update_model_out, update_exports);
    }
    if (*bench) {
      return run_bench(k_specs, reps, warmup, scenario, bench_verify, bench_out, bench_plot);
    }
    if (*serve) return run_serve(serve_model, bind, static_dir);
    if (*fixtures) return run_fixtures(fixtures_dir);
  } catch (const UsageFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const redmx::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const redmx::StaticallyDeterminateRemoval& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDeterminateRemoval;
  } catch (const redmx::GateSingular& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kGateSingular;
  } catch (const redmx::RankDeficient& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIndeterminate;
  } catch (const redmx::NotPositiveDefinite& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIndeterminate;
  } catch (const redmx::BenchGateFailed& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBenchGate;
  } catch (const redmx::OracleMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerify;
  } catch (const redmx::ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  }
  return kUsage;
}
