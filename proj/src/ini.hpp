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

#include <istream>
#include <string>
#include <vector>

namespace atomchip::detail {

struct IniLine {
    std::string section;  // text inside [...], empty before the first header
    std::string key;
    std::string value;
    int line = 0;
    bool is_section_header = false;
};

/// Splits `key = value` lines grouped under `[section]` headers. '#' and ';' start comments.
/// Throws ConfigError (with the line number) on anything else.
std::vector<IniLine> parse_ini(std::istream& in);

std::string trim(std::string_view s);

}  // namespace atomchip::detail
