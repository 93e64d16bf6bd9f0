#pragma once

#include <stdexcept>
#include <string>

namespace toricflex {

/// Error categories surfaced by the engine. The CLI maps every category to a
/// nonzero exit code and prints the stage tag next to the message.
enum class errc {
  domain,           // input outside the documented domain (degenerate cone, singular point, ...)
  capability,       // input is valid but beyond a configured bound
  rank_mismatch,    // lattice vectors of different ranks
  field_extension,  // a required root does not exist in the exact field
  infeasible,       // a construction precondition was not met
  internal,         // an invariant that must hold was violated
  parse             // malformed external input
};

inline const char* to_string(errc c) {
  switch (c) {
    case errc::domain: return "domain";
    case errc::capability: return "capability";
    case errc::rank_mismatch: return "rank-mismatch";
    case errc::field_extension: return "field-extension";
    case errc::infeasible: return "infeasible";
    case errc::internal: return "internal";
    case errc::parse: return "parse";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, std::string stage, const std::string& message)
      : std::runtime_error("[" + std::string(to_string(code)) + "][" + stage + "] " + message),
        code_(code),
        stage_(std::move(stage)) {}

  errc code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  errc code_;
  std::string stage_;
};

[[noreturn]] inline void fail(errc code, std::string stage, const std::string& message) {
  throw error(code, std::move(stage), message);
}

}  // namespace toricflex
