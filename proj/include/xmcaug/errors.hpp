#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace xmcaug {

// All pipeline failures carry a stable kind tag (e.g. "MalformedHeader",
// "ZeroFrequencyLabel") plus a human-readable message with file/line context.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

[[noreturn]] inline void fail(std::string kind, const std::string& msg) {
  throw Error(std::move(kind), msg);
}

}  // namespace xmcaug
