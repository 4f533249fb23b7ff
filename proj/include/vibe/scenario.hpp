// SPDX-License-Identifier: Apache-2.0
//
// Copyright (C) 2026 The vibe-beam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "vibe/simulation.hpp"

#include <string>
#include <vector>

namespace vibe {

/// Reads a YAML scenario file. `overrides` are `dotted.key=value`
/// assignments applied on top of the file before validation. Unknown keys and
/// malformed values raise ConfigError with file and line context. Relative
/// file references resolve against the scenario file's directory.
ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

/// Same, from text. `source` names the input in error messages.
ScenarioConfig parse_scenario(const std::string& yaml_text, const std::string& source = "<string>",
                              const std::string& base_dir = ".", const std::vector<std::string>& overrides = {});

}  // namespace vibe
