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

#include "atomchip/chip_config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "atomchip/errors.hpp"
#include "ini.hpp"

namespace atomchip {

namespace detail {

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<IniLine> parse_ini(std::istream& in)
{
    std::vector<IniLine> out;
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find_first_of("#;");
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("empty section name", line_no);
            out.push_back({section, {}, {}, line_no, true});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        IniLine entry;
        entry.section = section;
        entry.key = trim(std::string_view(line).substr(0, eq));
        entry.value = trim(std::string_view(line).substr(eq + 1));
        entry.line = line_no;
        if (entry.key.empty()) throw ConfigError("missing key", line_no);
        if (entry.value.empty()) throw ConfigError("missing value for '" + entry.key + "'", line_no);
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace detail

namespace {

std::string prefix_for(const std::string& section, int line)
{
    if (section.empty() || section == "bias" || section == "environment") return "";
    if (section == "Z" || section == "U" || section == "Q") return section + "_";
    throw ConfigError("unknown section [" + section + "]", line);
}

const ParameterInfo* find_param(std::string_view name)
{
    for (const auto& p : chip_parameter_table()) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

std::string format_value(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

ChipParameters parse_chip_config(std::istream& in, ChipParameters base)
{
    std::set<std::string> seen;
    for (const auto& entry : detail::parse_ini(in)) {
        const std::string prefix = prefix_for(entry.section, entry.line);
        if (entry.is_section_header) continue;
        const std::string name = prefix + entry.key;
        const ParameterInfo* info = find_param(name);
        if (info == nullptr) throw ConfigError("unknown chip parameter '" + name + "'", entry.line);
        if (!seen.insert(name).second) throw ConfigError("duplicate parameter '" + name + "'", entry.line);
        try {
            base.*(info->member) = parse_quantity_as(entry.value, info->dimension);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), entry.line);
        }
    }
    build_chip(base);  // surfaces geometric errors at load time
    return base;
}

ChipParameters load_chip_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open chip file '" + path.string() + "'");
    return parse_chip_config(in);
}

void write_chip_config(std::ostream& out, const ChipParameters& params)
{
    std::string current_section = "?";
    for (const auto& p : chip_parameter_table()) {
        std::string name(p.name);
        std::string section;
        std::string key = name;
        if (name.size() > 2 && name[1] == '_' && (name[0] == 'Z' || name[0] == 'U' || name[0] == 'Q')) {
            section = name.substr(0, 1);
            key = name.substr(2);
        } else if (name == "gravity") {
            section = "environment";
        } else {
            section = "bias";
        }
        if (section != current_section) {
            if (current_section != "?") out << '\n';
            out << '[' << section << "]\n";
            current_section = section;
        }
        const double shown = convert_from_si(params.*(p.member), p.display_unit);
        out << key << " = " << format_value(shown);
        if (!unit_symbol(p.display_unit).empty()) out << ' ' << unit_symbol(p.display_unit);
        out << '\n';
    }
}

std::string chip_schema_text()
{
    std::ostringstream os;
    const ChipParameters defaults;
    os << "# chip.schema version 1\n";
    os << "# name | unit | default | description\n";
    for (const auto& p : chip_parameter_table()) {
        std::string unit(unit_symbol(p.display_unit));
        if (unit.empty()) unit = "-";
        os << p.name << " | " << unit << " | " << format_value(convert_from_si(defaults.*(p.member), p.display_unit))
           << " | " << p.description << '\n';
    }
    return os.str();
}

}  // namespace atomchip
