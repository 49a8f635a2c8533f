#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twistgeo {

enum class ErrorKind {
    BaseMismatch,
    NumericsError,
    DegenerateMetric,
    DegeneratePlane,
    CaseMismatch,
    InvalidWarp,
    NormalizationError,
    InvalidFrame,
    IntegrationError,
    NotInLeaf,
    NotALoop,
    InvalidAction,
    WordBoundExceeded,
    InvalidH,
    InvalidArgument,
    ParseError,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind().
class GeoError : public std::runtime_error {
public:
    GeoError(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw GeoError(kind, what); }

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::BaseMismatch: return "BaseMismatch";
        case ErrorKind::NumericsError: return "NumericsError";
        case ErrorKind::DegenerateMetric: return "DegenerateMetric";
        case ErrorKind::DegeneratePlane: return "DegeneratePlane";
        case ErrorKind::CaseMismatch: return "CaseMismatch";
        case ErrorKind::InvalidWarp: return "InvalidWarp";
        case ErrorKind::NormalizationError: return "NormalizationError";
        case ErrorKind::InvalidFrame: return "InvalidFrame";
        case ErrorKind::IntegrationError: return "IntegrationError";
        case ErrorKind::NotInLeaf: return "NotInLeaf";
        case ErrorKind::NotALoop: return "NotALoop";
        case ErrorKind::InvalidAction: return "InvalidAction";
        case ErrorKind::WordBoundExceeded: return "WordBoundExceeded";
        case ErrorKind::InvalidH: return "InvalidH";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace twistgeo
