/*
   Copyright 2026 The atomchip Authors

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

#include <json.hpp>

#include "atomchip/analysis.hpp"
#include "atomchip/trapanalysis.hpp"

namespace atomchip {

/// Version of the JSON documents below; bumped on any incompatible change.
inline constexpr int kJsonSchemaVersion = 1;

/// Flat object, SI values plus convenience fields in um, G, Hz and uK.
nlohmann::json to_json(const TrapReport& report);
nlohmann::json to_json(const QuadrupoleReport& report);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const PressureQuery& query, const PressureResult& result);

}  // namespace atomchip
