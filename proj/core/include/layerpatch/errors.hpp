#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace layerpatch {

enum class Errc {
    // bundle
    MissingManifest,
    MalformedJson,
    DanglingLayerPointer,
    BadVersionMarker,
    IoFailure,
    NotADirectory,
    CorruptPayload,
    // dockerfile
    UnparsableLine,
    MultiStageBuild,
    AlignmentMismatch,
    // planner
    MissingContext,
    MultiContentChange,
    UnsupportedCopySpec,
    NotInvalidated,
    // injector
    PathNotFound,
    PathExists,
    UnknownLayer,
    InvalidPlan,
    // digest
    RewriteMiss,
    InvalidDigest,
    // bench
    MethodCountMismatch,
    DegenerateSample,
    EmptyReport,
    UnknownScenario,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
  public:
    Error(Errc code, std::string detail);

    Errc code() const noexcept {
        return code_;
    }
    const std::string& detail() const noexcept {
        return detail_;
    }

  private:
    Errc code_;
    std::string detail_;
};

[[noreturn]] void raise(Errc code, std::string detail);

} // namespace layerpatch
