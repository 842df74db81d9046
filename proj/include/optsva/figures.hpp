// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// The seven illustrative scenarios shipped in scripts/figures, each with the
// happens-before facts its replay must exhibit on the OptSVA engine.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "optsva/replay.hpp"

namespace optsva {

struct FigureCheck {
  std::string name;  // script file stem
  std::string claim;
  // Returns a failure description, or nullopt if the trace matches.
  std::function<std::optional<std::string>(const ReplayResult&)> check;
};

const std::vector<FigureCheck>& figure_checks();

}  // namespace optsva
