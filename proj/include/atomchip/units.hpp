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

#include <string>
#include <string_view>

namespace atomchip {

enum class Dimension {
    dimensionless,
    length,
    time,
    current,
    magnetic_field,
    field_gradient,
    temperature,
    power,
    pressure,
    area,
    mass,
    acceleration,
};

std::string_view to_string(Dimension d);

enum class Unit {
    // SI
    meter, second, ampere, tesla, tesla_per_meter, kelvin, watt, pascal, square_meter, kilogram,
    meter_per_second2, one,
    // laboratory units
    gauss, gauss_per_cm, millimeter, micrometer, microkelvin, milliwatt, millisecond, microsecond,
    millibar, square_angstrom, gamma_rb,
};

/// Parses a unit tag such as "G", "Gauss", "G/cm", "um", "µK", "mW", "A2" (square angstrom).
Unit parse_unit(std::string_view tag);
Dimension dimension_of(Unit u);
std::string_view unit_symbol(Unit u);

/// Converts `value` expressed in `unit` to SI. Exact multiplication by a constant.
double convert_units(double value, Unit unit);
double convert_units(double value, std::string_view unit_tag);
/// Inverse of convert_units.
double convert_from_si(double si_value, Unit unit);

struct Quantity {
    double si_value;
    Dimension dimension;
};

/// Parses "6.26 G", "6.26G", "100A2", "1.5" (a bare number is dimensionless).
Quantity parse_quantity(std::string_view text);

/// Parses `text` and checks it against `expected`. A bare number is taken as SI.
double parse_quantity_as(std::string_view text, Dimension expected);

}  // namespace atomchip
