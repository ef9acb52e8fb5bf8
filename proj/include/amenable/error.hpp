#pragma once

#include <stdexcept>
#include <string>

namespace amenable {

enum class Errc {
  origin_missing,
  dimension_mismatch,
  empty_set,
  index_out_of_range,
  parameter_domain,
  omega_too_small,
  subsequence_not_found,
  precondition_violation,
  invalid_tiling,
  size_cap,
  eigensolver_failure,
  unnormalized_input,
  incompatible_box,
  evaluator_failure,
  // Raised when a computed certificate contradicts a guaranteed invariant.
  invariant_violation,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::origin_missing: return "origin_missing";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::empty_set: return "empty_set";
    case Errc::index_out_of_range: return "index_out_of_range";
    case Errc::parameter_domain: return "parameter_domain";
    case Errc::omega_too_small: return "omega_too_small";
    case Errc::subsequence_not_found: return "subsequence_not_found";
    case Errc::precondition_violation: return "precondition_violation";
    case Errc::invalid_tiling: return "invalid_tiling";
    case Errc::size_cap: return "size_cap";
    case Errc::eigensolver_failure: return "eigensolver_failure";
    case Errc::unnormalized_input: return "unnormalized_input";
    case Errc::incompatible_box: return "incompatible_box";
    case Errc::evaluator_failure: return "evaluator_failure";
    case Errc::invariant_violation: return "invariant_violation";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace amenable
