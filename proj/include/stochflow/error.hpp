/*
   Copyright 2026 The stochflow Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#pragma once

#include <stdexcept>
#include <string>

namespace stochflow {

enum class ErrorCode {
  MaximizerNotBracketed,
  NegativeDensity,
  ResolutionTooLow,
  GridMismatch,
  LengthMismatch,
  NotPositiveDefinite,
  PositivityLost,
  CflViolated,
  IncompleteLedger,
  WrongBasisFamily,
  EmptyCell,
  DominationViolated,
  LadderMismatch,
  MissingArtifact,
  ParseError,
  ConfigInvalid,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }
  // message without the code prefix
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace stochflow
