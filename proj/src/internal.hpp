/*
   Copyright 2026 The cim-model Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include "cimmodel/mapping.hpp"

namespace cim::detail {

// check_valid without message formatting; stops at the first problem.
bool mapping_is_valid(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer, bool allow_padding,
                      const std::map<std::string, Constraints>* overrides);

}  // namespace cim::detail
