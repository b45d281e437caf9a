#ifndef FINVN_ERROR_HPP
#define FINVN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace finvn {

// Every failure mode the library reports, by name. The CLI maps these to
// exit codes; tests match on them.
enum class errc {
  not_hermitian,
  not_psd,
  singular,
  shape_mismatch,
  horizon_too_short,
  not_a_gauge,
  not_almost_convergent,
  not_dominated,
  not_regular_gauge,
  not_compatible,
  non_commuting_family,
  no_convergence,
  not_c1,
  singular_ei,
  unitarity_defect,
  commutation_defect,
  law_violation,
  resource_limit,
  not_2_positive,
  dimension_too_large,
  bad_config,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace finvn

#endif
