#ifndef JBD_ERROR_HPP
#define JBD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace jbd
{

enum class ErrorKind
{
    NonFinite,
    DimensionMismatch,
    RankDeficient,
    BreakdownToZero,
    ZeroVector,
    ParseError,
    UnsupportedField,
    NoConvergence,
    NotConverged,
    MissingCache,
    ZeroStart,
    Breakdown,
    InsufficientSteps,
    DomainError,
    IoError,
    InvalidConfig,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (the experiment runner in particular) can map it to an exit code.
class Error : public std::runtime_error
{
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what),
          kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

} // namespace jbd

#endif
