#pragma once

#include <stdexcept>
#include <string>

namespace hydroloop {

// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input violates a type invariant or an operation precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A transfer function denominator vanished at an evaluation frequency.
class SingularFrequencyError : public Error {
public:
    SingularFrequencyError(const std::string& what, double omega) : Error(what), omega_(omega) {}
    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

// Square-root argument of the orifice law left the physical domain.
class CavitationError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public FitError {
public:
    using FitError::FitError;
};

class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, double best_violation)
        : Error(what), best_violation_(best_violation) {}
    double best_violation() const noexcept { return best_violation_; }

private:
    double best_violation_;
};

// Closed loop fails the Nyquist test (or sits on the stability boundary).
class InstabilityError : public Error {
public:
    InstabilityError(const std::string& what, double omega) : Error(what), omega_(omega) {}
    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class NetworkError : public Error {
public:
    using Error::Error;
};

}  // namespace hydroloop
