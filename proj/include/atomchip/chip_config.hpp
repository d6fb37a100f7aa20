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

#include <filesystem>
#include <iosfwd>

#include "atomchip/geometry.hpp"

namespace atomchip {

/// Reads a chip configuration file. Sections map onto parameter prefixes:
/// [Z] current -> Z_current, [U] -> U_, [Q] -> Q_, [bias] and [environment] add no
/// prefix. Values carry optional unit suffixes ("1.5 A", "2.8 mm", "6.26 G").
/// Keys outside any section must use the full parameter name.
ChipParameters parse_chip_config(std::istream& in, ChipParameters base = {});
ChipParameters load_chip_config(const std::filesystem::path& path);
void write_chip_config(std::ostream& out, const ChipParameters& params);

/// Text of the documented schema (name, unit, default, description per parameter).
std::string chip_schema_text();

}  // namespace atomchip
