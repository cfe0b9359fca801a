#include "dmpanim/formats.hpp"

#include "dmpanim/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

namespace dmpanim::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) { throw ParseError(message); }

// Runs `body`, converting every failure into ParseError.
template <class F>
auto guarded(const char* what, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    throw ParseError(std::string(what) + ": input too large");
  } catch (const std::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

std::string dump(const json& j) {
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

json parse_json_text(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/true,
                       /*ignore_comments=*/false);
  return j;
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where + ": expected an object");
  return j;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      fail(where + ": unknown field '" + item.key() + "'");
    }
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where + ": missing field '" + key + "'");
  return *it;
}

double to_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where + ": number must be finite");
  return d;
}

double number_field(const json& obj, const char* key, const std::string& where) {
  return to_number(field(obj, key, where), where + "." + key);
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return to_number(*it, where + "." + key);
}

std::size_t to_index(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) fail(where + ": expected a non-negative integer");
  const auto value = v.get<std::uint64_t>();
  if (value > std::numeric_limits<std::uint32_t>::max()) fail(where + ": index too large");
  return static_cast<std::size_t>(value);
}

std::vector<double> to_numbers(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(to_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Vector to_vector(const json& v, const std::string& where) {
  const std::vector<double> values = to_numbers(v, where);
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix to_matrix(const json& v, const std::string& where, std::optional<std::size_t> cols = {}) {
  if (!v.is_array()) fail(where + ": expected an array of rows");
  Matrix m;
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::vector<double> row = to_numbers(v[r], where + "[" + std::to_string(r) + "]");
    if (r == 0) {
      if (!cols) cols = row.size();
      m.resize(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(*cols));
    }
    if (row.size() != *cols) {
      fail(where + ": row " + std::to_string(r) + " has " + std::to_string(row.size()) +
           " values, expected " + std::to_string(*cols));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
  }
  if (v.empty()) m.resize(0, static_cast<Eigen::Index>(cols.value_or(0)));
  return m;
}

json from_vector(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json from_matrix(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::string> to_names(const json& obj, const std::string& where) {
  const auto it = obj.find("dim_names");
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) fail(where + ".dim_names: expected an array of strings");
  std::vector<std::string> names;
  for (const json& n : *it) {
    if (!n.is_string()) fail(where + ".dim_names: expected an array of strings");
    names.push_back(n.get<std::string>());
  }
  return names;
}

std::vector<Coupling> to_couplings(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where + ": expected an array of couplings");
  std::vector<Coupling> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& c = require_object(v[i], at);
    check_keys(c, {"source", "target", "delta"}, at);
    Coupling coupling;
    coupling.source = to_index(field(c, "source", at), at + ".source");
    coupling.target = to_index(field(c, "target", at), at + ".target");
    if (const auto d = c.find("delta"); d != c.end()) {
      if (!d->is_number_integer() || (d->get<std::int64_t>() != 1 && d->get<std::int64_t>() != -1)) {
        fail(at + ".delta: expected 1 or -1");
      }
      coupling.delta = static_cast<int>(d->get<std::int64_t>());
    }
    out.push_back(coupling);
  }
  return out;
}

json from_couplings(const std::vector<Coupling>& couplings) {
  json out = json::array();
  for (const Coupling& c : couplings) {
    out.push_back({{"source", c.source}, {"target", c.target}, {"delta", c.delta}});
  }
  return out;
}

// CSV helpers ------------------------------------------------------------------

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                        : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

struct CsvHeader {
  std::optional<double> dt;
  std::optional<long> version;
  std::vector<std::string> columns;
  bool has_columns = false;
};

// Parses "# key=value key=value" or "# columns=a;b" into `header`.
void parse_comment(std::string_view body, std::size_t line_no, CsvHeader& header) {
  body = trim(body);
  if (body.rfind("columns=", 0) == 0) {
    header.has_columns = true;
    header.columns.clear();
    for (std::string_view name : split(body.substr(8), ';')) header.columns.emplace_back(name);
    return;
  }
  std::size_t pos = 0;
  while (pos < body.size()) {
    const std::size_t end = std::min(body.find_first_of(" \t", pos), body.size());
    const std::string_view token = body.substr(pos, end - pos);
    pos = end + 1;
    const std::size_t eq = token.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string_view key = token.substr(0, eq);
    const std::string_view value = token.substr(eq + 1);
    const std::string where = "line " + std::to_string(line_no);
    if (key == "dt") {
      if (header.dt) fail(where + ": duplicate dt");
      const auto dt = parse_double(value);
      if (!dt || !std::isfinite(*dt) || !(*dt > 0.0)) fail(where + ": dt must be a positive number");
      header.dt = dt;
    } else if (key == "format_version") {
      const auto v = parse_double(value);
      if (!v || *v != std::floor(*v)) fail(where + ": invalid format_version");
      if (*v > kFormatVersion || *v < 1) {
        fail(where + ": unsupported format_version " + std::string(value));
      }
      header.version = static_cast<long>(*v);
    }
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find('\n', start);
    if (pos == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return lines;
}

std::string safe_name(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (c == ';' || c == '\n' || c == '\r' || c == ',') c = '_';
  }
  return out;
}

std::string default_name(std::size_t d) { return "d" + std::to_string(d); }

}  // namespace

// ---------------------------------------------------------------------------

std::string_view kind_name(FileKind kind) {
  switch (kind) {
    case FileKind::Demonstration: return "demonstration";
    case FileKind::Model: return "model";
    case FileKind::Modulation: return "modulation";
    case FileKind::Robot: return "robot";
    case FileKind::Trajectory: return "trajectory";
  }
  return "unknown";
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

json wrap(FileKind kind, json payload) {
  return json{{"format_version", kFormatVersion},
              {"kind", std::string(kind_name(kind))},
              {"payload", std::move(payload)}};
}

json unwrap(const json& document, FileKind expected) {
  require_object(document, "document");
  check_keys(document, {"format_version", "kind", "payload"}, "document");
  const json& version = field(document, "format_version", "document");
  if (!version.is_number_integer()) fail("document.format_version: expected an integer");
  const auto v = version.get<std::int64_t>();
  if (v < 1 || v > kFormatVersion) {
    fail("document.format_version: unsupported version " + std::to_string(v));
  }
  const json& kind = field(document, "kind", "document");
  if (!kind.is_string()) fail("document.kind: expected a string");
  const std::string k = kind.get<std::string>();
  bool known = false;
  for (FileKind candidate : {FileKind::Demonstration, FileKind::Model, FileKind::Modulation,
                             FileKind::Robot, FileKind::Trajectory}) {
    known = known || k == kind_name(candidate);
  }
  if (!known) fail("document.kind: unknown kind '" + k + "'");
  if (k != kind_name(expected)) {
    fail("document.kind: expected '" + std::string(kind_name(expected)) + "', found '" + k + "'");
  }
  return require_object(field(document, "payload", "document"), "payload");
}

// Demonstration -------------------------------------------------------------------

json demo_payload(const Demonstration& demo) {
  json p{{"dt", demo.dt()}, {"positions", from_matrix(demo.positions())}};
  if (!demo.dim_names().empty()) p["dim_names"] = demo.dim_names();
  return p;
}

Demonstration demo_from_payload(const json& payload) {
  return guarded("demonstration", [&] {
    require_object(payload, "payload");
    check_keys(payload, {"dt", "positions", "dim_names"}, "payload");
    const double dt = number_field(payload, "dt", "payload");
    Matrix positions = to_matrix(field(payload, "positions", "payload"), "payload.positions");
    return Demonstration(dt, std::move(positions), to_names(payload, "payload"));
  });
}

Demonstration parse_demo_csv(std::string_view text) {
  return guarded("demonstration csv", [&] {
    CsvHeader header;
    std::vector<std::vector<double>> rows;
    const std::vector<std::string_view> lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::size_t line_no = i + 1;
      const std::string_view line = trim(lines[i]);
      if (line.empty()) continue;
      if (line.front() == '#') {
        if (!rows.empty()) fail("line " + std::to_string(line_no) + ": comment after data rows");
        parse_comment(line.substr(1), line_no, header);
        continue;
      }
      if (rows.empty() && !header.dt && line.rfind("dt=", 0) == 0) {
        parse_comment(line, line_no, header);
        continue;
      }
      if (!header.dt) fail("missing dt header line before data (expected '# dt=<seconds>')");
      const std::size_t row_index = rows.size();
      const std::vector<std::string_view> cells = split(line, ';');
      if (!rows.empty() && cells.size() != rows.front().size()) {
        fail("row " + std::to_string(row_index) + " (line " + std::to_string(line_no) + ") has " +
             std::to_string(cells.size()) + " columns, expected " +
             std::to_string(rows.front().size()));
      }
      std::vector<double> values;
      values.reserve(cells.size());
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto v = parse_double(cells[c]);
        if (!v || !std::isfinite(*v)) {
          fail("row " + std::to_string(row_index) + " (line " + std::to_string(line_no) +
               "), column " + std::to_string(c) + ": invalid value '" + std::string(cells[c]) +
               "'");
        }
        values.push_back(*v);
      }
      rows.push_back(std::move(values));
    }
    if (!header.dt) fail("missing dt header line");
    if (rows.empty()) fail("no data rows");
    const std::size_t cols = rows.front().size();
    if (header.has_columns && header.columns.size() != cols) {
      fail("columns header names " + std::to_string(header.columns.size()) +
           " dimensions, data has " + std::to_string(cols));
    }
    Matrix positions(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        positions(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    return Demonstration(*header.dt, std::move(positions), header.columns);
  });
}

std::string write_demo_csv(const Demonstration& demo) {
  std::string out = "# format_version=" + std::to_string(kFormatVersion) +
                    " dt=" + format_double(demo.dt()) + "\n";
  if (!demo.dim_names().empty()) {
    out += "# columns=";
    for (std::size_t d = 0; d < demo.dims(); ++d) {
      if (d) out += ';';
      out += safe_name(demo.dim_names()[d]);
    }
    out += '\n';
  }
  const Matrix& p = demo.positions();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      if (c) out += ';';
      out += format_double(p(r, c));
    }
    out += '\n';
  }
  return out;
}

Demonstration parse_demo_json(std::string_view text) {
  return guarded("demonstration json", [&] {
    return demo_from_payload(unwrap(parse_json_text(text), FileKind::Demonstration));
  });
}

std::string write_demo_json(const Demonstration& demo) {
  return dump(wrap(FileKind::Demonstration, demo_payload(demo)));
}

// Model ----------------------------------------------------------------------------

json model_payload(const DmpModel& model) {
  json p{{"alpha", model.alpha},
         {"beta", model.beta},
         {"tau", model.tau},
         {"dt", model.dt},
         {"basis", {{"centers", model.basis.centers()}, {"widths", model.basis.widths()}}},
         {"weights", from_matrix(model.weights)},
         {"goal", from_vector(model.goal)},
         {"start", from_vector(model.start)}};
  if (!model.dim_names.empty()) p["dim_names"] = model.dim_names;
  return p;
}

DmpModel model_from_payload(const json& payload) {
  return guarded("model", [&] {
    require_object(payload, "payload");
    check_keys(payload,
               {"alpha", "beta", "tau", "dt", "basis", "weights", "goal", "start", "dim_names"},
               "payload");
    DmpModel model;
    model.alpha = number_field(payload, "alpha", "payload");
    model.beta = number_field(payload, "beta", "payload");
    if (model.alpha != 4.0 * model.beta) {
      fail("payload: alpha (" + format_double(model.alpha) + ") must equal 4 * beta (" +
           format_double(model.beta) + ")");
    }
    model.tau = number_field(payload, "tau", "payload");
    model.dt = number_field(payload, "dt", "payload");
    const json& basis = require_object(field(payload, "basis", "payload"), "payload.basis");
    check_keys(basis, {"centers", "widths"}, "payload.basis");
    model.basis = BasisSet(to_numbers(field(basis, "centers", "payload.basis"), "payload.basis.centers"),
                           to_numbers(field(basis, "widths", "payload.basis"), "payload.basis.widths"));
    model.goal = to_vector(field(payload, "goal", "payload"), "payload.goal");
    model.start = to_vector(field(payload, "start", "payload"), "payload.start");
    model.weights = to_matrix(field(payload, "weights", "payload"), "payload.weights",
                              model.basis.size());
    model.dim_names = to_names(payload, "payload");
    model.validate();
    return model;
  });
}

DmpModel parse_model_json(std::string_view text) {
  return guarded("model json",
                 [&] { return model_from_payload(unwrap(parse_json_text(text), FileKind::Model)); });
}

std::string write_model_json(const DmpModel& model) {
  return dump(wrap(FileKind::Model, model_payload(model)));
}

// Modulation -------------------------------------------------------------------------

json modulation_payload(const ModulationConfig& c) {
  json p{{"p_arc", c.p_arc},   {"p_ant", c.p_ant},       {"p_time", c.p_time},
         {"p_exa", c.p_exa},   {"p_sec", c.p_sec},       {"p_follow", c.p_follow},
         {"p_rand", c.p_rand}, {"seed", c.seed}};
  if (c.t_ant) p["t_ant"] = *c.t_ant;
  if (c.t_ant_fraction) p["t_ant_fraction"] = *c.t_ant_fraction;
  if (c.n_ant) p["n_ant"] = *c.n_ant;
  if (c.ant_dims) p["ant_dims"] = *c.ant_dims;
  if (c.slow_k) p["slow"] = {{"k", *c.slow_k}};
  if (!c.timing_sectors.empty()) {
    json sectors = json::array();
    for (const TimingSector& s : c.timing_sectors) {
      sectors.push_back({{"fraction", s.fraction}, {"speed", s.speed}});
    }
    p["timing_sectors"] = std::move(sectors);
  }
  if (!c.secondary.empty()) p["secondary"] = from_couplings(c.secondary);
  if (!c.follow.empty()) p["follow"] = from_couplings(c.follow);
  if (c.goal_override) p["goal"] = from_vector(*c.goal_override);
  return p;
}

ModulationConfig modulation_from_payload(const json& payload) {
  return guarded("modulation", [&] {
    const std::string at = "payload";
    require_object(payload, at);
    check_keys(payload,
               {"p_arc", "p_ant", "t_ant", "t_ant_fraction", "n_ant", "ant_dims", "slow", "p_time",
                "timing_sectors", "p_exa", "p_sec", "secondary", "p_follow", "follow", "p_rand",
                "seed", "goal"},
               at);
    ModulationConfig c;
    c.p_arc = optional_number(payload, "p_arc", at).value_or(c.p_arc);
    c.p_ant = optional_number(payload, "p_ant", at).value_or(c.p_ant);
    c.t_ant = optional_number(payload, "t_ant", at);
    c.t_ant_fraction = optional_number(payload, "t_ant_fraction", at);
    if (const auto it = payload.find("n_ant"); it != payload.end() && !it->is_null()) {
      c.n_ant = to_index(*it, at + ".n_ant");
    }
    if (const auto it = payload.find("ant_dims"); it != payload.end() && !it->is_null()) {
      if (!it->is_array()) fail(at + ".ant_dims: expected an array");
      std::vector<std::size_t> dims;
      for (std::size_t i = 0; i < it->size(); ++i) {
        dims.push_back(to_index((*it)[i], at + ".ant_dims[" + std::to_string(i) + "]"));
      }
      c.ant_dims = std::move(dims);
    }
    if (const auto it = payload.find("slow"); it != payload.end() && !it->is_null()) {
      require_object(*it, at + ".slow");
      check_keys(*it, {"k"}, at + ".slow");
      c.slow_k = number_field(*it, "k", at + ".slow");
    }
    c.p_time = optional_number(payload, "p_time", at).value_or(c.p_time);
    if (const auto it = payload.find("timing_sectors"); it != payload.end() && !it->is_null()) {
      if (!it->is_array()) fail(at + ".timing_sectors: expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string where = at + ".timing_sectors[" + std::to_string(i) + "]";
        const json& s = (*it)[i];
        TimingSector sector;
        if (s.is_array()) {
          if (s.size() != 2) fail(where + ": expected [fraction, speed]");
          sector.fraction = to_number(s[0], where + "[0]");
          sector.speed = to_number(s[1], where + "[1]");
        } else {
          require_object(s, where);
          check_keys(s, {"fraction", "speed"}, where);
          sector.fraction = number_field(s, "fraction", where);
          sector.speed = number_field(s, "speed", where);
        }
        c.timing_sectors.push_back(sector);
      }
    }
    c.p_exa = optional_number(payload, "p_exa", at).value_or(c.p_exa);
    c.p_sec = optional_number(payload, "p_sec", at).value_or(c.p_sec);
    if (const auto it = payload.find("secondary"); it != payload.end() && !it->is_null()) {
      c.secondary = to_couplings(*it, at + ".secondary");
    }
    c.p_follow = optional_number(payload, "p_follow", at).value_or(c.p_follow);
    if (const auto it = payload.find("follow"); it != payload.end() && !it->is_null()) {
      c.follow = to_couplings(*it, at + ".follow");
    }
    c.p_rand = optional_number(payload, "p_rand", at).value_or(c.p_rand);
    if (const auto it = payload.find("seed"); it != payload.end() && !it->is_null()) {
      if (it->is_number_unsigned()) {
        c.seed = it->get<std::uint64_t>();
      } else if (it->is_string()) {
        const std::string s = it->get<std::string>();
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), c.seed);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
          fail(at + ".seed: expected an unsigned 64-bit integer");
        }
      } else {
        fail(at + ".seed: expected an unsigned 64-bit integer");
      }
    }
    if (const auto it = payload.find("goal"); it != payload.end() && !it->is_null()) {
      c.goal_override = to_vector(*it, at + ".goal");
    }
    return c;
  });
}

ModulationConfig parse_modulation_json(std::string_view text) {
  return guarded("modulation json", [&] {
    return modulation_from_payload(unwrap(parse_json_text(text), FileKind::Modulation));
  });
}

std::string write_modulation_json(const ModulationConfig& config) {
  return dump(wrap(FileKind::Modulation, modulation_payload(config)));
}

// Robot --------------------------------------------------------------------------------

json robot_payload(const RobotConfig& robot) {
  json joints = json::array();
  for (const JointInfo& j : robot.joints()) {
    json o{{"name", j.name},
           {"parent", j.parent ? json(*j.parent) : json(nullptr)},
           {"axis", {j.axis.x(), j.axis.y(), j.axis.z()}},
           {"dim_index", j.dim_index}};
    if (j.limits) o["limits"] = {j.limits->first, j.limits->second};
    if (!j.rpy.isZero(0.0)) o["rpy"] = {j.rpy.x(), j.rpy.y(), j.rpy.z()};
    joints.push_back(std::move(o));
  }
  return json{{"axis_threshold_deg", robot.axis_threshold_deg()}, {"joints", std::move(joints)}};
}

RobotConfig robot_from_payload(const json& payload) {
  return guarded("robot", [&] {
    const std::string at = "payload";
    require_object(payload, at);
    check_keys(payload, {"axis_threshold_deg", "joints"}, at);
    const double threshold = optional_number(payload, "axis_threshold_deg", at)
                                 .value_or(RobotConfig::kDefaultAxisThresholdDeg);
    const json& list = field(payload, "joints", at);
    if (!list.is_array()) fail(at + ".joints: expected an array");
    std::vector<JointInfo> joints;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = at + ".joints[" + std::to_string(i) + "]";
      const json& o = require_object(list[i], where);
      check_keys(o, {"name", "parent", "axis", "dim_index", "limits", "rpy"}, where);
      JointInfo j;
      const json& name = field(o, "name", where);
      if (!name.is_string()) fail(where + ".name: expected a string");
      j.name = name.get<std::string>();
      if (const auto p = o.find("parent"); p != o.end() && !p->is_null()) {
        if (!p->is_string()) fail(where + ".parent: expected a string or null");
        j.parent = p->get<std::string>();
      }
      const std::vector<double> axis = to_numbers(field(o, "axis", where), where + ".axis");
      if (axis.size() != 3) fail(where + ".axis: expected 3 numbers");
      j.axis = Eigen::Vector3d(axis[0], axis[1], axis[2]);
      j.dim_index = to_index(field(o, "dim_index", where), where + ".dim_index");
      if (const auto l = o.find("limits"); l != o.end() && !l->is_null()) {
        const std::vector<double> limits = to_numbers(*l, where + ".limits");
        if (limits.size() != 2) fail(where + ".limits: expected [min, max]");
        j.limits = std::make_pair(limits[0], limits[1]);
      }
      if (const auto r = o.find("rpy"); r != o.end() && !r->is_null()) {
        const std::vector<double> rpy = to_numbers(*r, where + ".rpy");
        if (rpy.size() != 3) fail(where + ".rpy: expected 3 numbers");
        j.rpy = Eigen::Vector3d(rpy[0], rpy[1], rpy[2]);
      }
      joints.push_back(std::move(j));
    }
    return RobotConfig(std::move(joints), threshold);
  });
}

RobotConfig parse_robot_json(std::string_view text) {
  return guarded("robot json",
                 [&] { return robot_from_payload(unwrap(parse_json_text(text), FileKind::Robot)); });
}

std::string write_robot_json(const RobotConfig& robot) {
  return dump(wrap(FileKind::Robot, robot_payload(robot)));
}

// Trajectory ------------------------------------------------------------------------------

json trajectory_payload(const Trajectory& t) {
  json p{{"dt", t.dt},
         {"positions", from_matrix(t.positions)},
         {"velocities", from_matrix(t.velocities)},
         {"accelerations", from_matrix(t.accelerations)},
         {"phase", from_vector(t.phase)}};
  if (!t.dim_names.empty()) p["dim_names"] = t.dim_names;
  return p;
}

namespace {

void check_trajectory(const Trajectory& t) {
  if (!(t.dt > 0.0) || !std::isfinite(t.dt)) fail("trajectory: dt must be positive");
  if (t.positions.rows() < 1 || t.positions.cols() < 1) fail("trajectory: empty");
  if (t.velocities.rows() != t.positions.rows() || t.velocities.cols() != t.positions.cols() ||
      t.accelerations.rows() != t.positions.rows() ||
      t.accelerations.cols() != t.positions.cols()) {
    fail("trajectory: positions, velocities and accelerations must share one shape");
  }
  if (t.phase.size() != t.positions.rows()) fail("trajectory: one phase value per row required");
  if (!t.dim_names.empty() && t.dim_names.size() != t.dims()) {
    fail("trajectory: dim_names size does not match the column count");
  }
}

}  // namespace

Trajectory trajectory_from_payload(const json& payload) {
  return guarded("trajectory", [&] {
    const std::string at = "payload";
    require_object(payload, at);
    check_keys(payload,
               {"dt", "positions", "velocities", "accelerations", "phase", "dim_names"}, at);
    Trajectory t;
    t.dt = number_field(payload, "dt", at);
    t.positions = to_matrix(field(payload, "positions", at), at + ".positions");
    t.velocities = to_matrix(field(payload, "velocities", at), at + ".velocities");
    t.accelerations = to_matrix(field(payload, "accelerations", at), at + ".accelerations");
    t.phase = to_vector(field(payload, "phase", at), at + ".phase");
    t.dim_names = to_names(payload, at);
    check_trajectory(t);
    return t;
  });
}

Trajectory parse_trajectory_json(std::string_view text) {
  return guarded("trajectory json", [&] {
    return trajectory_from_payload(unwrap(parse_json_text(text), FileKind::Trajectory));
  });
}

std::string write_trajectory_json(const Trajectory& trajectory) {
  return dump(wrap(FileKind::Trajectory, trajectory_payload(trajectory)));
}

std::string write_trajectory_csv(const Trajectory& t) {
  std::string out = "# format_version=" + std::to_string(kFormatVersion) +
                    " kind=trajectory dt=" + format_double(t.dt) + "\n";
  out += "time";
  for (std::size_t d = 0; d < t.dims(); ++d) {
    const std::string name = t.dim_names.empty() ? default_name(d) : safe_name(t.dim_names[d]);
    out += ";" + name + ".pos;" + name + ".vel;" + name + ".acc";
  }
  out += ";phase\n";
  for (Eigen::Index r = 0; r < t.positions.rows(); ++r) {
    out += format_double(static_cast<double>(r) * t.dt);
    for (Eigen::Index d = 0; d < t.positions.cols(); ++d) {
      out += ';';
      out += format_double(t.positions(r, d));
      out += ';';
      out += format_double(t.velocities(r, d));
      out += ';';
      out += format_double(t.accelerations(r, d));
    }
    out += ';';
    out += format_double(t.phase(r));
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory_csv(std::string_view text) {
  return guarded("trajectory csv", [&] {
    CsvHeader header;
    std::optional<std::vector<std::string_view>> columns;
    std::vector<std::vector<double>> rows;
    const std::vector<std::string_view> lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::size_t line_no = i + 1;
      const std::string_view line = trim(lines[i]);
      if (line.empty()) continue;
      if (line.front() == '#') {
        if (columns) fail("line " + std::to_string(line_no) + ": comment after column header");
        parse_comment(line.substr(1), line_no, header);
        continue;
      }
      if (!columns) {
        columns = split(line, ';');
        continue;
      }
      const std::vector<std::string_view> cells = split(line, ';');
      if (cells.size() != columns->size()) {
        fail("row " + std::to_string(rows.size()) + " (line " + std::to_string(line_no) +
             ") has " + std::to_string(cells.size()) + " columns, expected " +
             std::to_string(columns->size()));
      }
      std::vector<double> values;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto v = parse_double(cells[c]);
        if (!v || !std::isfinite(*v)) {
          fail("row " + std::to_string(rows.size()) + " (line " + std::to_string(line_no) +
               "), column " + std::to_string(c) + ": invalid value '" + std::string(cells[c]) +
               "'");
        }
        values.push_back(*v);
      }
      rows.push_back(std::move(values));
    }
    if (!header.dt) fail("missing dt header line");
    if (!columns) fail("missing column header line");
    const std::size_t ncols = columns->size();
    if (ncols < 5 || (ncols - 2) % 3 != 0 || columns->front() != "time" ||
        columns->back() != "phase") {
      fail("column header must be time;<name>.pos;<name>.vel;<name>.acc;...;phase");
    }
    const std::size_t dims = (ncols - 2) / 3;
    std::vector<std::string> names;
    bool defaults = true;
    for (std::size_t d = 0; d < dims; ++d) {
      const std::string_view pos = (*columns)[1 + 3 * d];
      if (pos.size() < 5 || pos.substr(pos.size() - 4) != ".pos") {
        fail("column " + std::to_string(1 + 3 * d) + ": expected '<name>.pos'");
      }
      const std::string name(pos.substr(0, pos.size() - 4));
      if ((*columns)[2 + 3 * d] != name + ".vel" || (*columns)[3 + 3 * d] != name + ".acc") {
        fail("columns for '" + name + "' must be .pos, .vel, .acc in that order");
      }
      defaults = defaults && name == default_name(d);
      names.push_back(name);
    }
    if (rows.empty()) fail("no data rows");

    Trajectory t;
    t.dt = *header.dt;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto nd = static_cast<Eigen::Index>(dims);
    t.positions.resize(n, nd);
    t.velocities.resize(n, nd);
    t.accelerations.resize(n, nd);
    t.phase.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::vector<double>& row = rows[static_cast<std::size_t>(r)];
      for (Eigen::Index d = 0; d < nd; ++d) {
        const auto base = static_cast<std::size_t>(1 + 3 * d);
        t.positions(r, d) = row[base];
        t.velocities(r, d) = row[base + 1];
        t.accelerations(r, d) = row[base + 2];
      }
      t.phase(r) = row.back();
    }
    if (!defaults) t.dim_names = std::move(names);
    check_trajectory(t);
    return t;
  });
}

std::string export_trajectory(const Trajectory& trajectory, TrajectoryFormat format) {
  return format == TrajectoryFormat::Csv ? write_trajectory_csv(trajectory)
                                         : write_trajectory_json(trajectory);
}

// Files ----------------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ParseError("failed writing '" + path.string() + "'");
}

namespace {

template <class F>
auto with_path(const std::filesystem::path& path, F&& parse) -> decltype(parse(std::string_view{})) {
  const std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

bool is_csv(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv";
}

}  // namespace

Demonstration load_demo(const std::filesystem::path& path) {
  return with_path(path, [&](std::string_view text) {
    return is_csv(path) ? parse_demo_csv(text) : parse_demo_json(text);
  });
}

DmpModel load_model(const std::filesystem::path& path) {
  return with_path(path, [](std::string_view text) { return parse_model_json(text); });
}

ModulationConfig load_modulation(const std::filesystem::path& path) {
  return with_path(path, [](std::string_view text) { return parse_modulation_json(text); });
}

RobotConfig load_robot(const std::filesystem::path& path) {
  return with_path(path, [](std::string_view text) { return parse_robot_json(text); });
}

TrajectoryFormat format_for(const std::filesystem::path& path) {
  return is_csv(path) ? TrajectoryFormat::Csv : TrajectoryFormat::Json;
}

}  // namespace dmpanim::io
