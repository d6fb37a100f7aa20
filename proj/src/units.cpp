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

#include "atomchip/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "atomchip/constants.hpp"
#include "atomchip/errors.hpp"

namespace atomchip {

namespace {

struct UnitInfo {
    Unit unit;
    std::string_view symbol;
    Dimension dimension;
    double to_si;
};

constexpr std::array<UnitInfo, 23> kUnits{{
    {Unit::meter, "m", Dimension::length, 1.0},
    {Unit::second, "s", Dimension::time, 1.0},
    {Unit::ampere, "A", Dimension::current, 1.0},
    {Unit::tesla, "T", Dimension::magnetic_field, 1.0},
    {Unit::tesla_per_meter, "T/m", Dimension::field_gradient, 1.0},
    {Unit::kelvin, "K", Dimension::temperature, 1.0},
    {Unit::watt, "W", Dimension::power, 1.0},
    {Unit::pascal, "Pa", Dimension::pressure, 1.0},
    {Unit::square_meter, "m2", Dimension::area, 1.0},
    {Unit::kilogram, "kg", Dimension::mass, 1.0},
    {Unit::meter_per_second2, "m/s2", Dimension::acceleration, 1.0},
    {Unit::one, "", Dimension::dimensionless, 1.0},
    {Unit::gauss, "G", Dimension::magnetic_field, 1e-4},
    {Unit::gauss_per_cm, "G/cm", Dimension::field_gradient, 1e-2},
    {Unit::millimeter, "mm", Dimension::length, 1e-3},
    {Unit::micrometer, "um", Dimension::length, 1e-6},
    {Unit::microkelvin, "uK", Dimension::temperature, 1e-6},
    {Unit::milliwatt, "mW", Dimension::power, 1e-3},
    {Unit::millisecond, "ms", Dimension::time, 1e-3},
    {Unit::microsecond, "us", Dimension::time, 1e-6},
    {Unit::millibar, "mbar", Dimension::pressure, 100.0},
    {Unit::square_angstrom, "A2", Dimension::area, 1e-20},
    // Detuning is carried in multiples of the linewidth, so Gamma is the unit of a
    // dimensionless number rather than a frequency.
    {Unit::gamma_rb, "Gamma", Dimension::dimensionless, 1.0},
}};

const UnitInfo& info(Unit u)
{
    for (const auto& i : kUnits) {
        if (i.unit == u) return i;
    }
    throw ConfigError("unit table is missing an entry");
}

std::string normalize_tag(std::string_view tag)
{
    std::string out;
    out.reserve(tag.size());
    for (std::size_t i = 0; i < tag.size(); ++i) {
        const auto c = static_cast<unsigned char>(tag[i]);
        // U+00B5 micro sign and U+03BC greek mu both map to 'u'.
        if (c == 0xC2 && i + 1 < tag.size() && static_cast<unsigned char>(tag[i + 1]) == 0xB5) {
            out.push_back('u');
            ++i;
        } else if (c == 0xCE && i + 1 < tag.size() && static_cast<unsigned char>(tag[i + 1]) == 0xBC) {
            out.push_back('u');
            ++i;
        } else if (c == 0xC3 && i + 1 < tag.size() && static_cast<unsigned char>(tag[i + 1]) == 0x85) {
            out.push_back('A');  // Å
            ++i;
        } else if (c == 0xC2 && i + 1 < tag.size() && static_cast<unsigned char>(tag[i + 1]) == 0xB2) {
            out.push_back('2');  // ²
            ++i;
        } else if (c == '^') {
            continue;
        } else if (!std::isspace(c)) {
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(Dimension d)
{
    switch (d) {
    case Dimension::dimensionless: return "dimensionless";
    case Dimension::length: return "length";
    case Dimension::time: return "time";
    case Dimension::current: return "current";
    case Dimension::magnetic_field: return "magnetic field";
    case Dimension::field_gradient: return "field gradient";
    case Dimension::temperature: return "temperature";
    case Dimension::power: return "power";
    case Dimension::pressure: return "pressure";
    case Dimension::area: return "area";
    case Dimension::mass: return "mass";
    case Dimension::acceleration: return "acceleration";
    }
    return "?";
}

Unit parse_unit(std::string_view raw)
{
    const std::string tag = normalize_tag(raw);
    if (tag == "Gauss" || tag == "gauss") return Unit::gauss;
    if (tag == "Gauss/cm" || tag == "gauss/cm") return Unit::gauss_per_cm;
    if (tag == "Ang2" || tag == "AA2" || tag == "angstrom2") return Unit::square_angstrom;
    if (tag == "Γ" || tag == "gamma") return Unit::gamma_rb;
    if (tag == "m/s^2" || tag == "ms-2") return Unit::meter_per_second2;
    for (const auto& i : kUnits) {
        if (i.symbol == tag) return i.unit;
    }
    throw ConfigError("unknown unit '" + std::string(raw) + "'");
}

Dimension dimension_of(Unit u) { return info(u).dimension; }

std::string_view unit_symbol(Unit u) { return info(u).symbol; }

double convert_units(double value, Unit unit) { return value * info(unit).to_si; }

double convert_units(double value, std::string_view unit_tag)
{
    return convert_units(value, parse_unit(unit_tag));
}

double convert_from_si(double si_value, Unit unit) { return si_value / info(unit).to_si; }

Quantity parse_quantity(std::string_view text)
{
    std::size_t b = 0;
    while (b < text.size() && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    text.remove_prefix(b);
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) {
        throw ConfigError("expected a number, got '" + std::string(text) + "'");
    }
    if (!std::isfinite(value)) {
        throw ConfigError("non-finite value '" + std::string(text) + "'");
    }
    const std::string_view rest(ptr, static_cast<std::size_t>(last - ptr));
    const std::string tag = normalize_tag(rest);
    if (tag.empty()) return {value, Dimension::dimensionless};
    const Unit u = parse_unit(tag);
    return {convert_units(value, u), dimension_of(u)};
}

double parse_quantity_as(std::string_view text, Dimension expected)
{
    const Quantity q = parse_quantity(text);
    if (q.dimension != Dimension::dimensionless && q.dimension != expected) {
        throw ConfigError("'" + std::string(text) + "' has dimension " + std::string(to_string(q.dimension)) +
                          ", expected " + std::string(to_string(expected)));
    }
    return q.si_value;
}

}  // namespace atomchip
