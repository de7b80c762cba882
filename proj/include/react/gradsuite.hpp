// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "react/gradcheck.hpp"

namespace react {

struct SuiteEntry {
  std::string name;
  GradCheckReport report;
};

/// Finite-difference checks of every differentiable op and of each block
/// (stubs, encoder, actor fusion, decoder, losses) at toy sizes:
/// d = 8, T = 2, HW = 4, L = 3, N = 2. Parameters are jittered first so no
/// zero-initialised layer hides a gradient path.
std::vector<SuiteEntry> run_gradient_suite(std::uint64_t seed = 0);

}  // namespace react
