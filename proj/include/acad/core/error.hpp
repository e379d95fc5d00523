// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace acad {

enum class ErrorCode {
  // audio-core
  MalformedContainer,
  UnsupportedEncoding,
  IoFailure,
  SilentSignal,
  InvalidArgument,
  // dsp-frontend
  ClipTooShort,
  InvalidBandRange,
  DimensionMismatch,
  // ontology-events
  CyclicOntology,
  DanglingChild,
  UnknownId,
  UnknownScene,
  EmptyScene,
  InvalidJudgmentTarget,
  // scene-synthesizer
  EmptyCatalog,
  EmptyOcSet,
  SilentSource,
  SourceTooShort,
  InsufficientSources,
  // neural
  ShapeMismatch,
  EmbeddingDimMismatch,
  NonFiniteValue,
  FingerprintMismatch,
  // training
  LabelOutOfRange,
  SilentReference,
  VariantInputMissing,
  EmptyDataset,
  // evaluation
  VariantMismatch,
  InsufficientRuns,
  // config / cli
  ConfigInvalid,
  ConfigHashMismatch,
};

/// Broad class of an error, used to map failures to CLI exit codes.
enum class ErrorClass { Config, Data, Runtime };

std::string_view to_string(ErrorCode code) noexcept;
ErrorClass classify(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace acad
