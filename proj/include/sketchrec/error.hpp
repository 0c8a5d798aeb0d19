#pragma once

#include <stdexcept>
#include <string>

namespace skr {

enum class Errc {
  invalid_argument = 1,
  incompatible = 2,
  overflow = 3,
  domain = 4,
  numeric = 5,
  non_identifiable = 6,
  io = 7,
  too_large = 8,
  degenerate = 9,
  precondition = 10,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace skr
