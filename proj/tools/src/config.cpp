#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "dmpath/cli/cli.hpp"
#include "json.hpp"

namespace dmpath::cli {

namespace {

using nlohmann::json;

constexpr double kMbps = 1e6;
constexpr double kMs = 1e-3;

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

const json& object_at(const json& parent, const char* key, std::string_view where) {
  if (!parent.contains(key)) {
    throw ConfigError(std::string(where) + ": missing '" + key + "'");
  }
  const json& v = parent.at(key);
  if (!v.is_object()) throw ConfigError(std::string(where) + "." + key + " must be an object");
  return v;
}

double number(const json& parent, const char* key, std::string_view where) {
  if (!parent.contains(key)) {
    throw ConfigError(std::string(where) + ": missing '" + key + "'");
  }
  const json& v = parent.at(key);
  if (!v.is_number()) throw ConfigError(std::string(where) + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const json& parent, const char* key, double fallback, std::string_view where) {
  return parent.contains(key) ? number(parent, key, where) : fallback;
}

std::uint64_t count_or(const json& parent, const char* key, std::uint64_t fallback,
                       std::string_view where) {
  if (!parent.contains(key)) return fallback;
  const json& v = parent.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(std::string(where) + "." + key + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

// Either "delay_ms": x or "delay_gamma": {...}.
std::optional<DelayModel> parse_delay(const json& obj, std::string_view where) {
  const bool fixed = obj.contains("delay_ms");
  const bool gamma = obj.contains("delay_gamma");
  if (fixed && gamma) throw ConfigError(std::string(where) + ": give delay_ms or delay_gamma, not both");
  if (fixed) {
    return DelayModel::fixed(number(obj, "delay_ms", where) * kMs);
  }
  if (gamma) {
    const std::string sub = std::string(where) + ".delay_gamma";
    const json& g = object_at(obj, "delay_gamma", where);
    reject_unknown(g, sub, {"eta_ms", "alpha", "beta_ms"});
    return DelayModel::shifted_gamma(number(g, "eta_ms", sub) * kMs, number(g, "alpha", sub),
                                     number(g, "beta_ms", sub) * kMs);
  }
  return std::nullopt;
}

struct ParsedPath {
  PathSpec model;
  PathSpec physical;
};

ParsedPath parse_path(const json& p, std::size_t index) {
  const std::string where = "paths[" + std::to_string(index) + "]";
  if (!p.is_object()) throw ConfigError(where + " must be an object");
  reject_unknown(p, where,
                 {"name", "bandwidth_mbps", "delay_ms", "delay_gamma", "loss", "cost_per_bit", "sim"});
  ParsedPath out;
  out.model.bandwidth_bits_per_s = number(p, "bandwidth_mbps", where) * kMbps;
  auto delay = parse_delay(p, where);
  if (!delay) throw ConfigError(where + ": missing delay_ms or delay_gamma");
  out.model.delay = *delay;
  out.model.loss_prob = number_or(p, "loss", 0.0, where);
  out.model.cost_per_bit = number_or(p, "cost_per_bit", 0.0, where);
  out.physical = out.model;
  if (p.contains("sim")) {
    const std::string sub = where + ".sim";
    const json& s = object_at(p, "sim", where);
    reject_unknown(s, sub, {"bandwidth_mbps", "delay_ms", "delay_gamma", "loss"});
    if (s.contains("bandwidth_mbps")) {
      out.physical.bandwidth_bits_per_s = number(s, "bandwidth_mbps", sub) * kMbps;
    }
    if (auto d = parse_delay(s, sub)) out.physical.delay = *d;
    out.physical.loss_prob = number_or(s, "loss", out.model.loss_prob, sub);
  }
  return out;
}

}  // namespace

sim::Scenario parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, "config",
                 {"name", "workload", "paths", "attempts", "guard_ms", "seed", "total_packets",
                  "queue_packets"});

  sim::Scenario s;
  try {
    const json& w = object_at(doc, "workload", "config");
    reject_unknown(w, "workload", {"rate_mbps", "lifetime_ms", "cost_bound", "packet_bytes"});
    s.workload.rate_bits_per_s = number(w, "rate_mbps", "workload") * kMbps;
    s.workload.lifetime_s = number(w, "lifetime_ms", "workload") * kMs;
    if (w.contains("cost_bound") && !w.at("cost_bound").is_null()) {
      s.workload.cost_bound = number(w, "cost_bound", "workload");
    }
    s.workload.packet_bits = count_or(w, "packet_bytes", 1024, "workload") * 8;

    if (!doc.contains("paths") || !doc.at("paths").is_array() || doc.at("paths").empty()) {
      throw ConfigError("config: 'paths' must be a non-empty array");
    }
    std::vector<PathSpec> model_paths;
    std::vector<PathSpec> physical_paths;
    std::size_t index = 0;
    for (const auto& p : doc.at("paths")) {
      auto parsed = parse_path(p, index++);
      model_paths.push_back(parsed.model);
      physical_paths.push_back(parsed.physical);
    }
    const auto attempts = count_or(doc, "attempts", 2, "config");
    s.model = Network(std::move(model_paths), attempts);
    s.physical = Network(std::move(physical_paths), attempts);
    s.guard_s = number_or(doc, "guard_ms", 0.0, "config") * kMs;
    s.timer_delay_error.assign(s.model.size(), 1.0);
    s.sim.seed = count_or(doc, "seed", s.sim.seed, "config");
    s.sim.total_packets = count_or(doc, "total_packets", s.sim.total_packets, "config");
    s.sim.queue_packets = count_or(doc, "queue_packets", s.sim.queue_packets, "config");
    s.validate();
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  return s;
}

sim::Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

}  // namespace dmpath::cli
