#pragma once

#include <stdexcept>
#include <string>

namespace qst {

enum class ErrorKind {
    NotHermitian,
    BadRank,
    NotPure,
    DimensionMismatch,
    Infeasible,
    InvalidArgument,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::BadRank: return "BadRank";
    case ErrorKind::NotPure: return "NotPure";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace qst
