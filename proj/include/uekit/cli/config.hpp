#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace CLI {
class App;
}

namespace uekit::cli {

// JSON run configuration. Keys are long flag names without dashes; a key may
// sit at the top level or inside a section named after the subcommand (the
// section wins). Flags given on the command line override both.
nlohmann::json load_config(const std::filesystem::path& path);
void apply_config(CLI::App& subcommand, const nlohmann::json& config);

// 16 hex digits of FNV-1a64 over the compact JSON dump.
std::string config_hash(const nlohmann::ordered_json& resolved);

}  // namespace uekit::cli
