#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tsgan {

inline constexpr const char* kVersion = "1.0.0";

// Reads key=value lines ('#' comments and blank lines skipped) and returns them
// as "--key=value" arguments. Throws ConfigError on malformed lines.
std::vector<std::string> read_config_args(const std::filesystem::path& path);

// `args` excludes the program name. Exit status: 0 success, 1 runtime failure,
// 2 usage or configuration error.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tsgan
