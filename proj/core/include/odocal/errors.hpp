#pragma once

#include <stdexcept>
#include <string>

namespace odocal {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter or configuration value is outside its admissible domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Encoder data and vehicle parameters disagree on the drive type.
class DriveTypeMismatchError : public Error {
public:
    using Error::Error;
};

/// A steering angle is outside (-pi/2, pi/2).
class SteeringDomainError : public Error {
public:
    using Error::Error;
};

/// Inner and outer Ackermann angles describe impossible geometry.
class InconsistentSteeringError : public Error {
public:
    using Error::Error;
};

/// A simulation scenario is physically invalid (e.g. landmark collision).
class ScenarioError : public Error {
public:
    using Error::Error;
};

/// Input files or datasets failed to parse or violate their schema.
class DataError : public Error {
public:
    using Error::Error;
};

/// A calibration stage has no data to work with (empty split partition).
class StageImpossibleError : public Error {
public:
    using Error::Error;
};

}  // namespace odocal
