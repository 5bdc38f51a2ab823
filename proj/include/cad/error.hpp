// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cad {

/// Violated precondition on an operation's inputs (shapes, ranges, flags).
class ContractError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Camera pose whose up vector degenerates (polar angle at or beyond a pole).
class DegenerateUpError : public ContractError {
  public:
    using ContractError::ContractError;
};

/// Malformed or inconsistent configuration document.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Failure while running a long operation (cache build, training).
class RuntimeFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define CAD_EXPECT(cond, msg)                                                                      \
    do {                                                                                           \
        if (!(cond)) {                                                                             \
            throw ::cad::ContractError(std::string(__func__) + ": " + (msg));                      \
        }                                                                                          \
    } while (0)

} // namespace cad
