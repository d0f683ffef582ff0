#ifndef KRP_ERROR_HPP
#define KRP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace krp {

// Domain error codes. Kept in sync with the krp_status values of the C API.
enum class Errc {
  ok = 0,
  invalid_argument,
  parse_error,
  dimension_mismatch,
  invariant_violation,
  size_mismatch,
  too_large,
  empty_allowable_set,
  unknown_zone,
  empty_file,
  not_binary,
  k_mismatch,
  not_a_tree,
  infeasible,
  io_error,
  unsupported,
  internal,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace krp

#endif
