#pragma once

#include <stdexcept>
#include <string>

namespace tdc {

enum class ErrorKind {
    InvalidArgument,
    UnknownVertex,
    DimensionMismatch,
    DegenerateSimplex,
    NegativeSquaredRadius,
    SingularSystem,
    MedialAxisProximity,
    PointNotOnManifold,
    OutOfChart,
    NoConvergence,
    EmptyInput,
    DisconnectedGraph,
    NeighborhoodTooSparse,
    AttemptBudgetExhausted,
    SparsityViolation,
    IterationCap,
    TooLarge,
    DenseSampleTooCoarse,
    UnsupportedDim,
    ParseError,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnknownVertex: return "UnknownVertex";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorKind::NegativeSquaredRadius: return "NegativeSquaredRadius";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::MedialAxisProximity: return "MedialAxisProximity";
    case ErrorKind::PointNotOnManifold: return "PointNotOnManifold";
    case ErrorKind::OutOfChart: return "OutOfChart";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::NeighborhoodTooSparse: return "NeighborhoodTooSparse";
    case ErrorKind::AttemptBudgetExhausted: return "AttemptBudgetExhausted";
    case ErrorKind::SparsityViolation: return "SparsityViolation";
    case ErrorKind::IterationCap: return "IterationCap";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::DenseSampleTooCoarse: return "DenseSampleTooCoarse";
    case ErrorKind::UnsupportedDim: return "UnsupportedDim";
    case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

} // namespace tdc
