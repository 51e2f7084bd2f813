// Copyright 2026 The mtlb Authors
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

#ifndef MTLB__CORE__ERRORS_HPP_
#define MTLB__CORE__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mtlb
{

/// Root of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not line up.
class DimensionError : public Error
{
public:
  using Error::Error;
};

/// Invalid configuration value (bad head count, odd PE width, unknown method...).
class ConfigError : public Error
{
public:
  using Error::Error;
};

/// Input exists but cannot produce a meaningful result (fully masked row, invalid focal agent).
class DegenerateInputError : public Error
{
public:
  using Error::Error;
};

/// Malformed or out-of-contract input data.
class InputError : public Error
{
public:
  using Error::Error;
};

/// An object was used in the wrong lifecycle state.
class StateError : public Error
{
public:
  using Error::Error;
};

/// On-disk container could not be decoded.
class FormatError : public Error
{
public:
  using Error::Error;
};

/// NaN/Inf encountered.
class NumericError : public Error
{
public:
  using Error::Error;
};

}  // namespace mtlb

#endif  // MTLB__CORE__ERRORS_HPP_
