#pragma once

namespace kge {

inline constexpr const char* kToolkitVersion = "0.1.0";
// Version of the JSONL/CSV file formats written by the toolkit.
inline constexpr int kFormatVersion = 1;

}  // namespace kge
