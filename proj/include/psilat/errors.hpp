#pragma once

#include <stdexcept>
#include <string>

namespace psilat {

/// Base class of every error raised by the library. `kind()` is the stable
/// machine-readable name that ends up in CLI reports.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define PSILAT_DEFINE_ERROR(Name)                                            \
  class Name : public Error {                                                \
  public:                                                                    \
    explicit Name(const std::string& what) : Error(#Name, what) {}           \
  };

PSILAT_DEFINE_ERROR(DivisionByZero)
PSILAT_DEFINE_ERROR(NotAUnit)
PSILAT_DEFINE_ERROR(PrecisionExhausted)
PSILAT_DEFINE_ERROR(NotInvertible)
PSILAT_DEFINE_ERROR(InvalidArgument)
PSILAT_DEFINE_ERROR(NotEtale)
PSILAT_DEFINE_ERROR(CommutationFailure)
PSILAT_DEFINE_ERROR(NotFullRank)
PSILAT_DEFINE_ERROR(NotComparable)
PSILAT_DEFINE_ERROR(NonStabilizing)
PSILAT_DEFINE_ERROR(NonTerminatingRewrite)
PSILAT_DEFINE_ERROR(NotAdmissible)
PSILAT_DEFINE_ERROR(RankExtractionUnstable)
PSILAT_DEFINE_ERROR(Inconclusive)
PSILAT_DEFINE_ERROR(NotEquivariant)
PSILAT_DEFINE_ERROR(ParameterOutOfRange)
PSILAT_DEFINE_ERROR(ParseError)

#undef PSILAT_DEFINE_ERROR

}  // namespace psilat
