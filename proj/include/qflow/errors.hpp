#pragma once

#include <stdexcept>
#include <string>

namespace qflow {

enum class errc {
  config,
  invalid_field,
  grid_too_small,
  degenerate_field,
  invalid_density,
  solver_failure,
  divergence,
  no_convergence,
  bad_ordering,
  coverage,
  insufficient_sample,
  degenerate_fit,
  unwrap_failure,
  resolution,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline const char* errc_name(errc code) {
  switch (code) {
    case errc::config: return "config";
    case errc::invalid_field: return "invalid-field";
    case errc::grid_too_small: return "grid-too-small";
    case errc::degenerate_field: return "degenerate-field";
    case errc::invalid_density: return "invalid-density";
    case errc::solver_failure: return "solver-failure";
    case errc::divergence: return "divergence";
    case errc::no_convergence: return "no-convergence";
    case errc::bad_ordering: return "bad-ordering";
    case errc::coverage: return "coverage";
    case errc::insufficient_sample: return "insufficient-sample";
    case errc::degenerate_fit: return "degenerate-fit";
    case errc::unwrap_failure: return "unwrap-failure";
    case errc::resolution: return "resolution";
  }
  return "unknown";
}

}  // namespace qflow
