#pragma once

// key = value configuration files for the command-line tool.

#include <string>
#include <utility>
#include <vector>

namespace stiffbvp::cli {

/// Reads `key = value` lines; '#' starts a comment, blank lines are skipped.
/// Throws stiffbvp::ConfigError on unreadable files or malformed lines.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

/// Copies argv, inserting "--key=value" for every entry of the file named by
/// --config right after the subcommand, so that later command-line flags
/// take precedence.
std::vector<std::string> expand_config(int argc, const char* const* argv);

}  // namespace stiffbvp::cli
