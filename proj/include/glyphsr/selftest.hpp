// Copyright 2026 The glyphsr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

namespace glyphsr {

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Fast invariant suite: schedule anchors, flow algebra, fidelity mapping,
// relativistic identities, a gradient spot check, the edit-distance oracle
// and a checkpoint round trip. Runs in a few seconds.
std::vector<SelfCheck> run_selftest();

}  // namespace glyphsr
