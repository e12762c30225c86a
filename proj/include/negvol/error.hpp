#pragma once

#include <stdexcept>
#include <string>

namespace negvol {

/// Failure categories. Each maps to one CLI exit code.
enum class ErrorKind {
  Config,      // invalid configuration or parameters
  Io,          // unreadable/unwritable files, malformed formats, non-finite data
  Geometry,    // open meshes, penetration, shape mismatch, empty surfaces
  Degenerate,  // degenerate histograms, ambiguous splits, empty joints
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

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::Geometry: return 4;
    case ErrorKind::Degenerate: return 5;
  }
  return 1;
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

}  // namespace negvol
