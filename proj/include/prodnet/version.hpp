#pragma once

namespace prodnet {

inline constexpr const char* kVersion = "0.1.0";

}
