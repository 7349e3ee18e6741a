#pragma once

#include <stdexcept>
#include <string>

namespace bidride {

enum class ErrorKind {
  InvalidParameter,
  Overflow,
  InfeasibleSettlement,
  InfeasibleFee,
  InvalidBid,
  RejectedBid,
  LateBid,
  RevisionRejected,
  InvalidTrack,
  IncomparableBaseline,
  Refused,
  Parse,
  Invariant,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

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

}  // namespace bidride
