#pragma once

namespace npca {

// "1.0.0+<git rev>"; stamped on every emitted result row.
const char* artifact_version();

}  // namespace npca
