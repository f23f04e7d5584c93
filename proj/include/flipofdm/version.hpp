#pragma once

namespace flipofdm {

inline constexpr const char* version = "0.1.0";

}  // namespace flipofdm
