// SPDX-License-Identifier: Apache-2.0
#include "acad/core/error.hpp"

namespace acad {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedContainer: return "MalformedContainer";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::SilentSignal: return "SilentSignal";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ClipTooShort: return "ClipTooShort";
    case ErrorCode::InvalidBandRange: return "InvalidBandRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CyclicOntology: return "CyclicOntology";
    case ErrorCode::DanglingChild: return "DanglingChild";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::UnknownScene: return "UnknownScene";
    case ErrorCode::EmptyScene: return "EmptyScene";
    case ErrorCode::InvalidJudgmentTarget: return "InvalidJudgmentTarget";
    case ErrorCode::EmptyCatalog: return "EmptyCatalog";
    case ErrorCode::EmptyOcSet: return "EmptyOcSet";
    case ErrorCode::SilentSource: return "SilentSource";
    case ErrorCode::SourceTooShort: return "SourceTooShort";
    case ErrorCode::InsufficientSources: return "InsufficientSources";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmbeddingDimMismatch: return "EmbeddingDimMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::SilentReference: return "SilentReference";
    case ErrorCode::VariantInputMissing: return "VariantInputMissing";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::VariantMismatch: return "VariantMismatch";
    case ErrorCode::InsufficientRuns: return "InsufficientRuns";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ConfigHashMismatch: return "ConfigHashMismatch";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::ConfigHashMismatch:
    case ErrorCode::VariantInputMissing:
    case ErrorCode::VariantMismatch:
    case ErrorCode::FingerprintMismatch:
    case ErrorCode::InvalidArgument:
      return ErrorClass::Config;
    case ErrorCode::ShapeMismatch:
    case ErrorCode::EmbeddingDimMismatch:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::IoFailure:
      return ErrorClass::Runtime;
    default:
      return ErrorClass::Data;
  }
}

}  // namespace acad
