// Copyright 2026 The wsmom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WSMOM_ERRORS_HPP
#define WSMOM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wsmom {

// Every domain failure carries a stable name; the CLI prints it and exits 1.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define WSMOM_DEFINE_ERROR(Type, Name)                                \
  class Type : public Error {                                          \
   public:                                                             \
    explicit Type(const std::string& what) : Error(Name, what) {}      \
  };

WSMOM_DEFINE_ERROR(CapacityError, "capacity_error")
WSMOM_DEFINE_ERROR(ContractError, "contract_error")
WSMOM_DEFINE_ERROR(DegenerateTripletError, "degenerate_triplet")
WSMOM_DEFINE_ERROR(EstimationError, "estimation_error")
WSMOM_DEFINE_ERROR(NumericalError, "numerical_error")
WSMOM_DEFINE_ERROR(UnseenConfigurationError, "unseen_configuration")
WSMOM_DEFINE_ERROR(IdentityUndefinedError, "identity_undefined")
WSMOM_DEFINE_ERROR(DegenerateConstantError, "degenerate_constant")
WSMOM_DEFINE_ERROR(FormatError, "format_error")
WSMOM_DEFINE_ERROR(CorpusMissingError, "corpus_missing")

#undef WSMOM_DEFINE_ERROR

/// Calibration failure; the message lists the residuals that did not converge.
class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, double max_residual)
      : Error("calibration_error", what), max_residual_(max_residual) {}
  double max_residual() const noexcept { return max_residual_; }

 private:
  double max_residual_;
};

}  // namespace wsmom

#endif  // WSMOM_ERRORS_HPP
