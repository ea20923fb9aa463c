#include "finitype/errors.hpp"

namespace finitype {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::OutOfChart: return "OutOfChart";
        case ErrorKind::DegenerateChart: return "DegenerateChart";
        case ErrorKind::DerivUnavailable: return "DerivUnavailable";
        case ErrorKind::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
        case ErrorKind::InsufficientShells: return "InsufficientShells";
        case ErrorKind::DirectionInsideCone: return "DirectionInsideCone";
        case ErrorKind::SampleOutsideCoveredRange: return "SampleOutsideCoveredRange";
        case ErrorKind::NyquistViolation: return "NyquistViolation";
        case ErrorKind::TailModelUnreliable: return "TailModelUnreliable";
        case ErrorKind::UnderResolved: return "UnderResolved";
        case ErrorKind::DivisionGuard: return "DivisionGuard";
        case ErrorKind::OrderAmbiguous: return "OrderAmbiguous";
        case ErrorKind::NotHomogeneous: return "NotHomogeneous";
        case ErrorKind::PreconditionFailed: return "PreconditionFailed";
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

}  // namespace finitype
