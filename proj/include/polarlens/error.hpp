#pragma once

#include <stdexcept>
#include <string>

namespace polarlens {

// Exit codes used by the CLI and documented in the README.
enum class ExitCode : int { success = 0, fatal = 1, partial = 2 };

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (bad JSON config, missing paths, bad parameters).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error("config: " + msg) {}
};

// Unreadable/unwritable streams, unsupported formats, lock conflicts.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error("io: " + msg) {}
};

// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error("contract: " + msg) {}
};

// External scorer failed after retries; carries the affected user.
class ScoringError : public Error {
 public:
  ScoringError(const std::string& user_id, const std::string& msg)
      : Error("scoring: user " + user_id + ": " + msg), user_id_(user_id) {}
  const std::string& user_id() const { return user_id_; }

 private:
  std::string user_id_;
};

// A requested result does not exist (empty window, no qualifying interval).
class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& msg) : Error("not found: " + msg) {}
};

}  // namespace polarlens
