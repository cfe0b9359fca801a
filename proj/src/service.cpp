#include "dmpanim/service.hpp"

#include "dmpanim/error.hpp"
#include "dmpanim/formats.hpp"
#include "dmpanim/runner.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdio>
#include <mutex>
#include <vector>

namespace dmpanim {

using nlohmann::json;

namespace {

std::string dump(const json& j) {
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

Response json_response(int status, const json& body) { return {status, "application/json", dump(body)}; }

Response error_response(int status, std::string_view kind, std::string_view message,
                        const std::vector<Violation>* violations = nullptr) {
  json error{{"kind", kind}, {"message", message}};
  if (violations) {
    json list = json::array();
    for (const Violation& v : *violations) {
      json item{{"rule", v.rule}, {"message", v.message}};
      if (!v.hint.empty()) item["hint"] = v.hint;
      list.push_back(std::move(item));
    }
    error["violations"] = std::move(list);
  }
  return json_response(status, json{{"error", std::move(error)}});
}

Response not_found(std::string_view what, std::string_view id) {
  return error_response(404, "not-found", std::string(what) + " '" + std::string(id) + "' not found");
}

std::vector<std::string> segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < path.size()) {
    const std::size_t end = std::min(path.find('/', start), path.size());
    if (end > start) out.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

json parse_object(std::string_view body) {
  json j;
  try {
    j = json::parse(body.begin(), body.end());
  } catch (const json::exception& e) {
    throw ParseError(std::string("request body: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("request body: expected a JSON object");
  return j;
}

ModulationConfig modulation_from(const json& j) {
  if (j.is_object() && j.contains("format_version")) {
    return io::modulation_from_payload(io::unwrap(j, io::FileKind::Modulation));
  }
  return io::modulation_from_payload(j);
}

RobotConfig robot_from(const json& j) {
  if (j.is_object() && j.contains("format_version")) {
    return io::robot_from_payload(io::unwrap(j, io::FileKind::Robot));
  }
  return io::robot_from_payload(j);
}

}  // namespace

std::string content_id(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.persist_dir) load_persisted();
}

Response Service::handle(std::string_view method, std::string_view target, std::string_view body) {
  std::string_view path = target;
  std::string_view query;
  if (const std::size_t q = target.find('?'); q != std::string_view::npos) {
    path = target.substr(0, q);
    query = target.substr(q + 1);
  }
  const std::vector<std::string> seg = segments(path);
  try {
    if (seg.empty() || seg[0] != "api") return error_response(404, "not-found", "no such route");
    const bool get = method == "GET";
    const bool post = method == "POST";
    auto wrong_method = [] { return error_response(405, "method-not-allowed", "method not allowed"); };

    if (seg.size() == 1) return get ? list() : wrong_method();
    const std::string& collection = seg[1];
    if (collection == "health" && seg.size() == 2) {
      return get ? json_response(200, json{{"status", "ok"}}) : wrong_method();
    }
    if (collection == "demos") {
      if (seg.size() == 2) return post ? post_demo(body) : get ? list() : wrong_method();
      if (seg.size() == 3) return get ? get_demo(seg[2]) : wrong_method();
    } else if (collection == "models") {
      if (seg.size() == 2) return post ? post_model(body) : get ? list() : wrong_method();
      if (seg.size() == 3) return get ? get_model(seg[2]) : wrong_method();
      if (seg.size() == 4 && seg[3] == "rollout") {
        const bool csv = query.find("format=csv") != std::string_view::npos;
        return post ? rollout(seg[2], body, csv) : wrong_method();
      }
    } else if (collection == "robots") {
      if (seg.size() == 2) return post ? post_robot(body) : get ? list() : wrong_method();
      if (seg.size() == 3) return get ? get_robot(seg[2]) : wrong_method();
    }
    return error_response(404, "not-found", "no such route");
  } catch (const CouplingError& e) {
    return error_response(422, "validation", e.what(), &e.violations());
  } catch (const ParseError& e) {
    return error_response(400, "parse", e.what());
  } catch (const NumericError& e) {
    return error_response(422, "numeric", e.what());
  } catch (const Error& e) {
    return error_response(422, to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

Response Service::post_demo(std::string_view body) {
  Demonstration demo = io::parse_demo_csv(body);
  const std::string canonical = io::write_demo_csv(demo);
  const std::string id = content_id(canonical);
  {
    std::unique_lock lock(mutex_);
    if (demos_.find(id) == demos_.end()) {
      demos_.emplace(id, demo);
      persist(std::filesystem::path("demos") / (id + ".csv"), canonical);
    }
  }
  return json_response(201, json{{"demo_id", id},
                                 {"steps", demo.steps()},
                                 {"dims", demo.dims()},
                                 {"dt", demo.dt()},
                                 {"dim_names", demo.dim_names()}});
}

Response Service::post_model(std::string_view body) {
  const json request = parse_object(body);
  for (const auto& item : request.items()) {
    if (item.key() != "demo_id" && item.key() != "n_basis" && item.key() != "tau" &&
        item.key() != "alpha") {
      throw ParseError("request body: unknown field '" + item.key() + "'");
    }
  }
  const auto demo_it = request.find("demo_id");
  if (demo_it == request.end() || !demo_it->is_string()) {
    throw ParseError("request body: 'demo_id' must be a string");
  }
  const std::string demo_id = demo_it->get<std::string>();

  LearnOptions options;
  if (const auto n = request.find("n_basis"); n != request.end()) {
    if (!n->is_number_integer()) throw LearnError("n_basis must be an integer >= 2");
    const auto value = n->get<std::int64_t>();
    if (value < 2 || value > 100'000) throw LearnError("n_basis must lie in [2, 100000]");
    options.n_basis = static_cast<std::size_t>(value);
  }
  if (const auto t = request.find("tau"); t != request.end() && !t->is_null()) {
    if (!t->is_number()) throw LearnError("tau must be a number");
    options.tau = t->get<double>();
  }
  if (const auto a = request.find("alpha"); a != request.end() && !a->is_null()) {
    if (!a->is_number()) throw LearnError("alpha must be a number");
    options.gains.alpha = a->get<double>();
  }

  std::optional<Demonstration> demo;
  {
    std::shared_lock lock(mutex_);
    const auto it = demos_.find(demo_id);
    if (it == demos_.end()) return not_found("demonstration", demo_id);
    demo = it->second;
  }
  const LearnResult learned = learn(*demo, options);
  const double rmse = reconstruction_rmse(learned.model, *demo);
  const std::string document = io::write_model_json(learned.model);
  const std::string id = content_id(document);
  {
    std::unique_lock lock(mutex_);
    if (models_.find(id) == models_.end()) {
      models_.emplace(id, StoredModel{learned.model, demo_id, rmse});
      persist(std::filesystem::path("models") / (id + ".json"), document);
      persist(std::filesystem::path("models") / (id + ".meta.json"),
              dump(json{{"demo_id", demo_id}, {"rmse", rmse}}));
    }
  }
  return json_response(201, json{{"model_id", id},
                                 {"demo_id", demo_id},
                                 {"rmse", rmse},
                                 {"degenerate_basis", learned.degenerate_basis}});
}

Response Service::post_robot(std::string_view body) {
  const RobotConfig robot = robot_from(parse_object(body));
  const std::string document = io::write_robot_json(robot);
  const std::string id = content_id(document);
  {
    std::unique_lock lock(mutex_);
    if (robots_.find(id) == robots_.end()) {
      robots_.emplace(id, robot);
      persist(std::filesystem::path("robots") / (id + ".json"), document);
    }
  }
  return json_response(201, json{{"robot_id", id}, {"dims", robot.dims()}});
}

Response Service::rollout(const std::string& model_id, std::string_view body, bool csv) {
  std::optional<StoredModel> stored;
  std::optional<Demonstration> demo;
  {
    std::shared_lock lock(mutex_);
    const auto it = models_.find(model_id);
    if (it == models_.end()) return not_found("model", model_id);
    stored = it->second;
    if (const auto d = demos_.find(stored->demo_id); d != demos_.end()) demo = d->second;
  }

  ModulationConfig config;
  std::optional<RobotConfig> robot;
  RunContext context;
  context.max_steps = options_.max_steps;
  if (!is_blank(body)) {
    const json request = parse_object(body);
    const bool wrapped = !request.contains("format_version") &&
                         (request.contains("modulation") || request.contains("robot") ||
                          request.contains("robot_id") || request.contains("settle"));
    if (!wrapped) {
      config = modulation_from(request);
    } else {
      for (const auto& item : request.items()) {
        if (item.key() != "modulation" && item.key() != "robot" && item.key() != "robot_id" &&
            item.key() != "settle") {
          throw ParseError("request body: unknown field '" + item.key() + "'");
        }
      }
      if (const auto m = request.find("modulation"); m != request.end() && !m->is_null()) {
        config = modulation_from(*m);
      }
      if (request.contains("robot") && request.contains("robot_id")) {
        throw ParseError("request body: give 'robot' or 'robot_id', not both");
      }
      if (const auto r = request.find("robot"); r != request.end() && !r->is_null()) {
        robot = robot_from(*r);
      }
      if (const auto r = request.find("robot_id"); r != request.end() && !r->is_null()) {
        if (!r->is_string()) throw ParseError("request body: 'robot_id' must be a string");
        std::shared_lock lock(mutex_);
        const auto it = robots_.find(r->get<std::string>());
        if (it == robots_.end()) return not_found("robot", r->get<std::string>());
        robot = it->second;
      }
      if (const auto s = request.find("settle"); s != request.end() && !s->is_null()) {
        if (!s->is_number()) throw ParseError("request body: 'settle' must be a number");
        context.settle_fraction = s->get<double>();
      }
    }
  }
  context.demo = demo ? &*demo : nullptr;
  context.robot = robot ? &*robot : nullptr;
  const Trajectory trajectory = run_modulated(stored->model, config, context);
  if (csv) return {200, "text/csv", io::write_trajectory_csv(trajectory)};
  return {200, "application/json", io::write_trajectory_json(trajectory)};
}

Response Service::get_demo(const std::string& id) {
  std::shared_lock lock(mutex_);
  const auto it = demos_.find(id);
  if (it == demos_.end()) return not_found("demonstration", id);
  return {200, "application/json", io::write_demo_json(it->second)};
}

Response Service::get_model(const std::string& id) {
  std::shared_lock lock(mutex_);
  const auto it = models_.find(id);
  if (it == models_.end()) return not_found("model", id);
  return json_response(200, json{{"model_id", id},
                                 {"demo_id", it->second.demo_id},
                                 {"rmse", it->second.rmse},
                                 {"model", io::wrap(io::FileKind::Model,
                                                    io::model_payload(it->second.model))}});
}

Response Service::get_robot(const std::string& id) {
  std::shared_lock lock(mutex_);
  const auto it = robots_.find(id);
  if (it == robots_.end()) return not_found("robot", id);
  return {200, "application/json", io::write_robot_json(it->second)};
}

Response Service::list() const {
  std::shared_lock lock(mutex_);
  json demos = json::array();
  for (const auto& [id, demo] : demos_) {
    demos.push_back({{"demo_id", id}, {"steps", demo.steps()}, {"dims", demo.dims()}});
  }
  json models = json::array();
  for (const auto& [id, m] : models_) {
    models.push_back({{"model_id", id}, {"demo_id", m.demo_id}, {"rmse", m.rmse}});
  }
  json robots = json::array();
  for (const auto& [id, r] : robots_) robots.push_back({{"robot_id", id}, {"dims", r.dims()}});
  return json_response(200, json{{"demos", demos}, {"models", models}, {"robots", robots}});
}

void Service::persist(const std::filesystem::path& relative, std::string_view content) const {
  if (!options_.persist_dir) return;
  const std::filesystem::path path = *options_.persist_dir / relative;
  std::filesystem::create_directories(path.parent_path());
  io::write_file(path, content);
}

void Service::load_persisted() {
  namespace fs = std::filesystem;
  const fs::path root = *options_.persist_dir;
  auto files = [&](const char* sub, const char* suffix) {
    std::vector<fs::path> out;
    if (!fs::is_directory(root / sub)) return out;
    for (const auto& entry : fs::directory_iterator(root / sub)) {
      const std::string name = entry.path().filename().string();
      const std::string_view ext(suffix);
      if (name.size() > ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0 &&
          name.find(".meta.") == std::string::npos) {
        out.push_back(entry.path());
      }
    }
    return out;
  };
  for (const fs::path& p : files("demos", ".csv")) {
    demos_.emplace(p.stem().string(), io::load_demo(p));
  }
  for (const fs::path& p : files("robots", ".json")) {
    robots_.emplace(p.stem().string(), io::load_robot(p));
  }
  for (const fs::path& p : files("models", ".json")) {
    const std::string id = p.stem().string();
    StoredModel stored{io::load_model(p), "", 0.0};
    const fs::path meta = p.parent_path() / (id + ".meta.json");
    if (fs::exists(meta)) {
      try {
        const json m = json::parse(io::read_file(meta));
        stored.demo_id = m.at("demo_id").get<std::string>();
        stored.rmse = m.at("rmse").get<double>();
      } catch (const json::exception& e) {
        throw ParseError(meta.string() + ": " + e.what());
      }
    }
    models_.emplace(id, std::move(stored));
  }
}

void Service::bind(httplib::Server& server) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = handle(req.method, req.target, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/api(/.*)?)", handler);
  server.Post(R"(/api(/.*)?)", handler);
  server.Put(R"(/api(/.*)?)", handler);
  server.Delete(R"(/api(/.*)?)", handler);
  if (options_.static_dir) server.set_mount_point("/", options_.static_dir->string());
}

int serve(Service& service, const std::string& host, int port) {
  httplib::Server server;
  service.bind(server);
  if (!server.listen(host, port)) return 1;
  return 0;
}

}  // namespace dmpanim
