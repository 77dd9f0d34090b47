#include "uekit/cli/config.hpp"

#include <cstdio>
#include <fstream>

#include <CLI11.hpp>

#include "uekit/core.hpp"
#include "uekit/error.hpp"

namespace uekit::cli {

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path.string());
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object()) throw Error(ErrorKind::kMalformedInput, "config must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedInput, "config " + path.string() + ": " + e.what());
  }
}

namespace {

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

}  // namespace

void apply_config(CLI::App& sub, const nlohmann::json& config) {
  const nlohmann::json* section = nullptr;
  if (auto it = config.find(sub.get_name()); it != config.end() && it->is_object()) {
    section = &*it;
  }
  for (CLI::Option* opt : sub.get_options()) {
    if (opt->count() > 0 || opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    const nlohmann::json* value = nullptr;
    if (section && section->contains(name)) {
      value = &(*section)[name];
    } else if (config.contains(name)) {
      value = &config[name];
    }
    if (!value || value->is_null()) continue;
    if (value->is_array()) {
      for (const auto& e : *value) opt->add_result(scalar_text(e));
    } else {
      opt->add_result(scalar_text(*value));
    }
    opt->run_callback();
  }
}

std::string config_hash(const nlohmann::ordered_json& resolved) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(resolved.dump())));
  return buf;
}

}  // namespace uekit::cli
