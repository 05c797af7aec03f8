#pragma once

#include "generators.hpp"

#include <gtest/gtest.h>

namespace regcoc::testing {

inline constexpr int kCases = 120;

} // namespace regcoc::testing
