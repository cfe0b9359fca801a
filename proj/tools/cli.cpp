#include "cli.hpp"

#include "dmpanim/error.hpp"
#include "dmpanim/formats.hpp"
#include "dmpanim/kinematics.hpp"
#include "dmpanim/runner.hpp"
#include "dmpanim/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <future>
#include <optional>
#include <ostream>
#include <thread>

namespace dmpanim::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Inputs {
  std::string model;
  std::string mod;
  std::string robot;
  std::string demo;
  double settle = 0.5;
  std::size_t max_steps = 10'000'000;
};

struct Loaded {
  DmpModel model;
  ModulationConfig config;
  std::optional<RobotConfig> robot;
  std::optional<Demonstration> demo;

  RunContext context(double settle, std::size_t max_steps) const {
    RunContext c;
    c.demo = demo ? &*demo : nullptr;
    c.robot = robot ? &*robot : nullptr;
    c.settle_fraction = settle;
    c.max_steps = max_steps;
    return c;
  }
};

Loaded load(const Inputs& in) {
  Loaded l{io::load_model(in.model), {}, std::nullopt, std::nullopt};
  if (!in.mod.empty()) l.config = io::load_modulation(in.mod);
  if (!in.robot.empty()) l.robot = io::load_robot(in.robot);
  if (!in.demo.empty()) l.demo = io::load_demo(in.demo);
  return l;
}

void add_inputs(CLI::App& cmd, Inputs& in) {
  cmd.add_option("--model", in.model, "Model JSON")->required();
  cmd.add_option("--mod", in.mod, "Modulation config JSON");
  cmd.add_option("--robot", in.robot, "Robot config JSON (needed for follow-through)");
  cmd.add_option("--demo", in.demo, "Demonstration used to rank dimensions for anticipation");
  cmd.add_option("--settle", in.settle, "Settling window as a fraction of tau")
      ->capture_default_str();
  cmd.add_option("--max-steps", in.max_steps, "Row limit per rollout")->capture_default_str();
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    std::string_view item(list.data() + start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v)) {
        throw ValidationError("sweep: invalid value '" + std::string(item) + "'");
      }
      values.push_back(v);
    } else if (end < list.size()) {
      throw ValidationError("sweep: empty entry in value list");
    }
    start = end + 1;
  }
  if (values.empty()) throw ValidationError("sweep: empty value list");
  return values;
}

void report_error(std::ostream& err, bool as_json, int code, std::string_view kind,
                  std::string_view message, const std::vector<Violation>* violations) {
  if (as_json) {
    json error{{"kind", kind}, {"exit_code", code}, {"message", message}};
    if (violations) {
      json list = json::array();
      for (const Violation& v : *violations) {
        json item{{"rule", v.rule}, {"message", v.message}};
        if (!v.hint.empty()) item["hint"] = v.hint;
        list.push_back(std::move(item));
      }
      error["violations"] = std::move(list);
    }
    err << json{{"error", error}}.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    return;
  }
  err << "error (" << kind << "): " << message << '\n';
  if (violations) {
    for (const Violation& v : *violations) {
      err << "  [" << v.rule << "] " << v.message;
      if (!v.hint.empty()) err << " (" << v.hint << ")";
      err << '\n';
    }
  }
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn and modulate dynamic movement primitives", "dmpanim"};
  app.require_subcommand(1);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "Report errors as one JSON object on stderr");

  // train
  std::string demo_path, out_path;
  std::size_t n_basis = 30;
  std::optional<double> tau;
  double alpha = 25.0;
  CLI::App* train = app.add_subcommand("train", "Fit a model to a demonstration");
  train->add_option("--demo", demo_path, "Demonstration (.csv or .json)")->required();
  train->add_option("--n-basis", n_basis, "Number of basis functions")->capture_default_str();
  train->add_option("--out", out_path, "Model JSON to write")->required();
  train->add_option("--tau", tau, "Duration in seconds (default: demonstration duration)");
  train->add_option("--alpha", alpha, "Attractor gain; beta = alpha / 4")->capture_default_str();

  // rollout
  Inputs rollout_in;
  std::string rollout_out;
  CLI::App* rollout_cmd = app.add_subcommand("rollout", "Generate a modulated trajectory");
  add_inputs(*rollout_cmd, rollout_in);
  rollout_cmd->add_option("--out", rollout_out, "Trajectory file (.csv or .json)")->required();

  // sweep
  Inputs sweep_in;
  std::string param, values_text, sweep_dir, sweep_format = "csv";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  CLI::App* sweep = app.add_subcommand("sweep", "Roll out one trajectory per parameter value");
  add_inputs(*sweep, sweep_in);
  sweep->add_option("--param", param, "Parameter name")->required();
  sweep->add_option("--values", values_text, "Comma-separated values")->required();
  sweep->add_option("--out", sweep_dir, "Output directory")->required();
  sweep->add_option("--format", sweep_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sweep->add_option("--jobs", jobs, "Parallel rollouts")->check(CLI::PositiveNumber);

  // serve
  std::string host = "127.0.0.1", static_dir, persist_dir;
  int port = 8080;
  std::size_t serve_max_steps = 1'000'000;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str();
  serve_cmd->add_option("--static", static_dir, "Directory served under /");
  serve_cmd->add_option("--max-steps", serve_max_steps, "Row limit per rollout")
      ->capture_default_str();
  serve_cmd->add_option("--persist", persist_dir, "Directory for stored artifacts");

  for (CLI::App* sub : {train, rollout_cmd, sweep, serve_cmd}) sub->fallthrough();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, json_errors, 1, "usage", e.what(), nullptr);
    return 1;
  }

  try {
    if (*train) {
      const Demonstration demo = io::load_demo(demo_path);
      LearnOptions options;
      options.n_basis = n_basis;
      options.tau = tau;
      options.gains.alpha = alpha;
      const LearnResult result = learn(demo, options);
      io::write_file(out_path, io::write_model_json(result.model));
      const double rmse = reconstruction_rmse(result.model, demo);
      out << "rmse " << io::format_double(rmse) << '\n';
      out << "relative_rmse " << io::format_double(rmse / std::max(motion_range(demo), 1e-300))
          << '\n';
      for (std::size_t i : result.degenerate_basis) {
        err << "warning: basis " << i << " has no support in the demonstration; weight set to 0\n";
      }
      return 0;
    }

    if (*rollout_cmd) {
      const Loaded l = load(rollout_in);
      const Trajectory t =
          run_modulated(l.model, l.config, l.context(rollout_in.settle, rollout_in.max_steps));
      io::write_file(rollout_out, io::export_trajectory(t, io::format_for(rollout_out)));
      out << "rows " << t.steps() << '\n';
      return 0;
    }

    if (*sweep) {
      const std::vector<double> values = parse_values(values_text);
      const Loaded l = load(sweep_in);
      // Reject unknown names before any work.
      {
        ModulationConfig probe = l.config;
        set_parameter(probe, param, values.front());
      }
      fs::create_directories(sweep_dir);
      std::vector<std::string> files(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) {
        files[i] = param + "_" + std::to_string(i) + "." + sweep_format;
      }
      auto point = [&](std::size_t i) {
        ModulationConfig config = l.config;
        set_parameter(config, param, values[i]);
        const Trajectory t =
            run_modulated(l.model, config, l.context(sweep_in.settle, sweep_in.max_steps));
        const auto format = sweep_format == "csv" ? io::TrajectoryFormat::Csv
                                                  : io::TrajectoryFormat::Json;
        io::write_file(fs::path(sweep_dir) / files[i], io::export_trajectory(t, format));
      };
      for (std::size_t begin = 0; begin < values.size(); begin += jobs) {
        const std::size_t end = std::min(values.size(), begin + jobs);
        std::vector<std::future<void>> batch;
        for (std::size_t i = begin; i < end; ++i) {
          batch.push_back(std::async(std::launch::async, point, i));
        }
        for (auto& f : batch) f.get();
      }
      json points = json::array();
      for (std::size_t i = 0; i < values.size(); ++i) {
        points.push_back({{"value", values[i]}, {"file", files[i]}});
      }
      const json manifest{{"format_version", io::kFormatVersion},
                          {"param", param},
                          {"model", fs::path(sweep_in.model).filename().string()},
                          {"settle", sweep_in.settle},
                          {"points", points}};
      io::write_file(fs::path(sweep_dir) / "manifest.json", manifest.dump(2) + "\n");
      out << "points " << values.size() << '\n';
      return 0;
    }

    if (*serve_cmd) {
      ServiceOptions options;
      options.max_steps = serve_max_steps;
      if (!static_dir.empty()) options.static_dir = static_dir;
      if (!persist_dir.empty()) options.persist_dir = persist_dir;
      Service service(options);
      out << "listening on http://" << host << ":" << port << '\n' << std::flush;
      if (serve(service, host, port) != 0) {
        report_error(err, json_errors, 1, "usage", "cannot listen on " + host + ":" +
                                                       std::to_string(port), nullptr);
        return 1;
      }
      return 0;
    }
  } catch (const CouplingError& e) {
    const int code = static_cast<int>(e.kind());
    report_error(err, json_errors, code, to_string(e.kind()), "coupling validation failed",
                 &e.violations());
    return code;
  } catch (const Error& e) {
    const int code = static_cast<int>(e.kind());
    report_error(err, json_errors, code, to_string(e.kind()), e.what(), nullptr);
    return code;
  } catch (const fs::filesystem_error& e) {
    report_error(err, json_errors, 2, "parse", e.what(), nullptr);
    return 2;
  }
  return 1;
}

}  // namespace dmpanim::cli
