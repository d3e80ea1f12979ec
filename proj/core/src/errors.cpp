#include "layerpatch/errors.hpp"

namespace layerpatch {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::MissingManifest: return "MissingManifest";
    case Errc::MalformedJson: return "MalformedJson";
    case Errc::DanglingLayerPointer: return "DanglingLayerPointer";
    case Errc::BadVersionMarker: return "BadVersionMarker";
    case Errc::IoFailure: return "IoFailure";
    case Errc::NotADirectory: return "NotADirectory";
    case Errc::CorruptPayload: return "CorruptPayload";
    case Errc::UnparsableLine: return "UnparsableLine";
    case Errc::MultiStageBuild: return "MultiStageBuild";
    case Errc::AlignmentMismatch: return "AlignmentMismatch";
    case Errc::MissingContext: return "MissingContext";
    case Errc::MultiContentChange: return "MultiContentChange";
    case Errc::UnsupportedCopySpec: return "UnsupportedCopySpec";
    case Errc::NotInvalidated: return "NotInvalidated";
    case Errc::PathNotFound: return "PathNotFound";
    case Errc::PathExists: return "PathExists";
    case Errc::UnknownLayer: return "UnknownLayer";
    case Errc::InvalidPlan: return "InvalidPlan";
    case Errc::RewriteMiss: return "RewriteMiss";
    case Errc::InvalidDigest: return "InvalidDigest";
    case Errc::MethodCountMismatch: return "MethodCountMismatch";
    case Errc::DegenerateSample: return "DegenerateSample";
    case Errc::EmptyReport: return "EmptyReport";
    case Errc::UnknownScenario: return "UnknownScenario";
    }
    return "UnknownError";
}

Error::Error(Errc code, std::string detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
      code_(code),
      detail_(std::move(detail)) {}

void raise(Errc code, std::string detail) {
    throw Error(code, std::move(detail));
}

} // namespace layerpatch
