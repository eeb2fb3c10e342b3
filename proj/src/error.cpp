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
#include "stochflow/error.hpp"

namespace stochflow {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MaximizerNotBracketed: return "MaximizerNotBracketed";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::PositivityLost: return "PositivityLost";
    case ErrorCode::CflViolated: return "CflViolated";
    case ErrorCode::IncompleteLedger: return "IncompleteLedger";
    case ErrorCode::WrongBasisFamily: return "WrongBasisFamily";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::DominationViolated: return "DominationViolated";
    case ErrorCode::LadderMismatch: return "LadderMismatch";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code), detail_(what) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace stochflow
