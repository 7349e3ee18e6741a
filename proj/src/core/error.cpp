#include "core/error.hpp"

namespace bidride {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::InfeasibleSettlement: return "infeasible-settlement";
    case ErrorKind::InfeasibleFee: return "infeasible-fee";
    case ErrorKind::InvalidBid: return "invalid-bid";
    case ErrorKind::RejectedBid: return "rejected-bid";
    case ErrorKind::LateBid: return "late-bid";
    case ErrorKind::RevisionRejected: return "revision-rejected";
    case ErrorKind::InvalidTrack: return "invalid-track";
    case ErrorKind::IncomparableBaseline: return "incomparable-baseline";
    case ErrorKind::Refused: return "refused";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Invariant: return "invariant";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace bidride
