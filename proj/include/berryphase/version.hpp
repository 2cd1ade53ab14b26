#pragma once

namespace berryphase {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace berryphase
