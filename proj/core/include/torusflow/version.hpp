#pragma once

namespace torusflow {

inline constexpr const char* kVersionString = "torusflow 0.1.0";

}  // namespace torusflow
