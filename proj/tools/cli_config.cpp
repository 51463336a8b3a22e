#include "cli_config.hpp"

#include <fstream>
#include <string_view>

#include "stiffbvp/errors.hpp"

namespace stiffbvp::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(number) + ": expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.starts_with("--")) key.erase(0, 2);
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(number) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::vector<std::string> expand_config(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  std::vector<std::string> out{args[0], args[1]};
  for (const auto& [key, value] : read_config_file(path)) out.push_back("--" + key + "=" + value);
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

}  // namespace stiffbvp::cli
