#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace degen {

enum class ErrorKind {
    invalid_domain,
    resolution_too_coarse,
    invalid_weight,
    invalid_nonlinearity,
    hypothesis_violation,
    empty_decomposition,
    numerical_failure,
    seed_failure,
    missing_bump,
    enumeration_overflow,
    precondition,
    config,
    io,
    parse,
};

/// Hypotheses of the degenerate problem that a run can reject.
enum class Hypothesis { none, a1, a2, f1, f2 };

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_domain: return "invalid-domain";
    case ErrorKind::resolution_too_coarse: return "resolution-too-coarse";
    case ErrorKind::invalid_weight: return "invalid-weight";
    case ErrorKind::invalid_nonlinearity: return "invalid-nonlinearity";
    case ErrorKind::hypothesis_violation: return "hypothesis-violation";
    case ErrorKind::empty_decomposition: return "empty-decomposition";
    case ErrorKind::numerical_failure: return "numerical-failure";
    case ErrorKind::seed_failure: return "seed-failure";
    case ErrorKind::missing_bump: return "missing-bump";
    case ErrorKind::enumeration_overflow: return "enumeration-overflow";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io-failure";
    case ErrorKind::parse: return "parse";
    }
    return "unknown";
}

inline std::string_view to_string(Hypothesis h) {
    switch (h) {
    case Hypothesis::none: return "none";
    case Hypothesis::a1: return "a1";
    case Hypothesis::a2: return "a2";
    case Hypothesis::f1: return "f1";
    case Hypothesis::f2: return "f2";
    }
    return "none";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, Hypothesis hypothesis = Hypothesis::none)
        : std::runtime_error(what), kind_(kind), hypothesis_(hypothesis) {}

    ErrorKind kind() const noexcept { return kind_; }
    Hypothesis hypothesis() const noexcept { return hypothesis_; }

private:
    ErrorKind kind_;
    Hypothesis hypothesis_;
};

inline Error hypothesis_error(Hypothesis h, const std::string& what) {
    return Error(ErrorKind::hypothesis_violation,
                 "hypothesis (" + std::string(to_string(h)) + ") violated: " + what, h);
}

} // namespace degen
