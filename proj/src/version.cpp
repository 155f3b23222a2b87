#include "npca/version.hpp"

#ifndef NPCA_GIT_REV
#define NPCA_GIT_REV "unknown"
#endif

namespace npca {

const char* artifact_version() { return "1.0.0+" NPCA_GIT_REV; }

}  // namespace npca
