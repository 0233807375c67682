#pragma once

namespace stabkit {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchema = "stabkit-report/1";

} // namespace stabkit
