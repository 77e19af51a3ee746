#pragma once

#ifndef OPNKIT_VERSION
#define OPNKIT_VERSION "0.0.0-dev"
#endif

namespace opnkit {

inline constexpr const char* kToolkitVersion = OPNKIT_VERSION;

}  // namespace opnkit
