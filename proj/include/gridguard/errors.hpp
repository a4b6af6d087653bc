#pragma once

#include <stdexcept>

namespace gridguard {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input: bad magic, bad header field, unsupported version.
struct FormatError : Error {
    using Error::Error;
};

// Stream ended before the declared payload.
struct TruncationError : Error {
    using Error::Error;
};

// Store/grid or store/variant disagreement.
struct MismatchError : Error {
    using Error::Error;
};

// Precondition violation on an API call.
struct InvalidArgument : Error {
    using Error::Error;
};

// Quadrant digests fail but every boundary median line verifies clean:
// the corrupted region is not the single hv-convex shape the improved
// search relies on. Reported instead of returning a possibly-clean cell.
struct ConvexityError : Error {
    using Error::Error;
};

}  // namespace gridguard
