#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace elsim::cli {

/// A config value is missing, malformed, or has the wrong type.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& expected, const std::string& what)
      : std::runtime_error(what), key_(key), expected_(expected) {}
  const std::string& key() const { return key_; }
  const std::string& expected() const { return expected_; }

 private:
  std::string key_, expected_;
};

/// Runs one subcommand. `args` excludes the program name. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace elsim::cli
