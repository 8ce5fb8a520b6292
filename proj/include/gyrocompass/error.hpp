#pragma once

// Error taxonomy shared by the whole library. Every throw site uses one of the
// factory helpers so the CLI can map error classes onto distinct exit codes.

#include <stdexcept>
#include <string>

namespace gyro {

enum class Errc {
  invalid_input,     // bad argument values, shape mismatches, bad config
  degenerate,        // gimbal lock, zero gravity vector, indeterminate heading, pole
  parse,             // malformed recording / manifest / checkpoint files
  training_diverged  // non-finite loss during optimization
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

inline Error invalid_input(const std::string& msg) {
  return Error(Errc::invalid_input, msg);
}

inline Error degenerate(const std::string& msg) {
  return Error(Errc::degenerate, msg);
}

inline Error parse_error(const std::string& path, long line, const std::string& msg) {
  return Error(Errc::parse, path + ":" + std::to_string(line) + ": " + msg);
}

inline Error training_diverged(const std::string& msg) {
  return Error(Errc::training_diverged, msg);
}

}  // namespace gyro
