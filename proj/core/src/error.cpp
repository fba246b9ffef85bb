#include "ghostmark/error.hpp"

namespace ghostmark {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kEncoding: return "encoding";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kAuth: return "auth";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kCommitment: return "commitment";
    case ErrorKind::kLockContention: return "lock-contention";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace ghostmark
