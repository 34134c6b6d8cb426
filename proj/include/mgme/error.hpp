#pragma once

#include <stdexcept>
#include <string>

namespace mgme {

// Base of every error raised by the library. Each subclass maps onto one of
// the failure kinds callers are expected to branch on.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user-supplied parameters (distribution shapes, horizons, configs).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Caller broke a documented precondition (dimension mismatch, zero counts).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// Not enough observations for the requested statistic.
class InsufficientData : public Error {
public:
    using Error::Error;
};

// Linear system is numerically singular.
class SingularSystem : public Error {
public:
    using Error::Error;
};

// s^- >= 1: the multiplicative interval is undefined and Phase 1 must continue.
class PhasePrecondition : public Error {
public:
    using Error::Error;
};

// All-zero weights or similar inputs with no meaningful normalization.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

// Instance too large for exhaustive enumeration.
class SizeError : public Error {
public:
    using Error::Error;
};

// Regression fit impossible (too few usable points, too narrow a grid).
class EstimationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mgme
