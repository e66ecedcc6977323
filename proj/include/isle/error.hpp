#pragma once

#include <stdexcept>
#include <string>

namespace isle {

enum class ErrorKind {
  validation,  // malformed input or violated precondition
  io,          // filesystem failure
  range,       // decomposition index beyond what is available
  degenerate,  // statistic undefined for the given sample
  network,     // transport failure or non-OK server status
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace isle
