#pragma once

// HTTP facade. Service::handle is transport-free so it can be exercised
// directly; bind() attaches it to an httplib server.

#include "dmpanim/dmp.hpp"
#include "dmpanim/kinematics.hpp"
#include "dmpanim/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace dmpanim {

struct ServiceOptions {
  /// Upper bound on rows per rollout response.
  std::size_t max_steps = 1'000'000;
  /// When set, artifacts are written here and reloaded on start.
  std::optional<std::filesystem::path> persist_dir;
  /// Directory served under "/".
  std::optional<std::filesystem::path> static_dir;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string content_id(std::string_view bytes);

class Service {
 public:
  explicit Service(ServiceOptions options = {});

  /// `target` may carry a query string (e.g. "?format=csv").
  Response handle(std::string_view method, std::string_view target, std::string_view body);

  /// Registers the API routes and static mount on `server`.
  void bind(httplib::Server& server);

  const ServiceOptions& options() const noexcept { return options_; }

 private:
  struct StoredModel {
    DmpModel model;
    std::string demo_id;
    double rmse = 0.0;
  };

  Response post_demo(std::string_view body);
  Response post_model(std::string_view body);
  Response post_robot(std::string_view body);
  Response rollout(const std::string& model_id, std::string_view body, bool csv);
  Response get_demo(const std::string& id);
  Response get_model(const std::string& id);
  Response get_robot(const std::string& id);
  Response list() const;

  void load_persisted();
  void persist(const std::filesystem::path& relative, std::string_view content) const;

  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Demonstration, std::less<>> demos_;
  std::map<std::string, StoredModel, std::less<>> models_;
  std::map<std::string, RobotConfig, std::less<>> robots_;
};

/// Blocks serving on host:port until the process stops. Returns non-zero if
/// the socket cannot be bound.
int serve(Service& service, const std::string& host, int port);

}  // namespace dmpanim
