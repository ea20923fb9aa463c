#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finitype {

enum class ErrorKind {
    OutOfChart,
    DegenerateChart,
    DerivUnavailable,
    QuadratureBudgetExceeded,
    InsufficientShells,
    DirectionInsideCone,
    SampleOutsideCoveredRange,
    NyquistViolation,
    TailModelUnreliable,
    UnderResolved,
    DivisionGuard,
    OrderAmbiguous,
    NotHomogeneous,
    PreconditionFailed,
    ConfigInvalid,
};

std::string_view to_string(ErrorKind kind);

// All recoverable failures of the library surface as this one exception type;
// callers dispatch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace finitype
