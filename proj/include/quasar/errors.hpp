// Copyright 2026 The Quasar Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace quasar {

// Base of the library's exception hierarchy. The CLI maps the two branches
// below onto distinct exit codes (data -> 2, numeric -> 3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

// -- algebra / tensors -------------------------------------------------------
struct ZeroNormError : NumericError {
  ZeroNormError() : NumericError("cannot normalize a quaternion of (near-)zero norm") {}
};
struct ShapeMismatch : DataError {
  using DataError::DataError;
};
struct NonScalarLoss : DataError {
  NonScalarLoss() : DataError("backward requires a scalar (single-element) loss node") {}
};

// -- layers ------------------------------------------------------------------
struct KernelLargerThanInput : DataError {
  using DataError::DataError;
};
struct InvalidFan : DataError {
  InvalidFan() : DataError("fan_in and fan_out must both be positive") {}
};
struct InvalidRate : DataError {
  InvalidRate() : DataError("dropout rate must lie in [0, 1)") {}
};

// -- ctc ---------------------------------------------------------------------
struct ImpossibleTarget : DataError {
  using DataError::DataError;
};
struct TooLarge : DataError {
  using DataError::DataError;
};

// -- files -------------------------------------------------------------------
struct BadMagic : DataError {
  using DataError::DataError;
};
struct DimensionMismatch : DataError {
  using DataError::DataError;
};
struct TruncatedFile : DataError {
  using DataError::DataError;
};
struct AudioTooShort : DataError {
  using DataError::DataError;
};
struct BadCheckpoint : DataError {
  using DataError::DataError;
};

// -- configuration / training ------------------------------------------------
struct InvalidConfig : DataError {
  using DataError::DataError;
};
struct EmptyDataset : DataError {
  EmptyDataset() : DataError("dataset contains no utterances") {}
};
struct NonFiniteLoss : NumericError {
  using NumericError::NumericError;
};

}  // namespace quasar
