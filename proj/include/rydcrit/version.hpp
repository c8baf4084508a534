// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

namespace rydcrit {

inline constexpr std::string_view kVersion = "0.1.0";

} // namespace rydcrit
