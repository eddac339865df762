// Copyright 2026 The posmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// errors.hpp: exception types shared by every posmap module.

#pragma once

#include <stdexcept>
#include <string>

namespace posmap {

/// Operand shapes or subsystem dimensions do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed user input: bad flags, asymmetric masks, out-of-range parameters.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine (eigensolver, conic solver) failed to converge.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested problem exceeds the configured size limit.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace posmap
