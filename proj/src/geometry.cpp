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

#include "atomchip/geometry.hpp"

#include <cmath>
#include <string>

#include "atomchip/errors.hpp"

namespace atomchip {

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

std::vector<WireSegment> PolylineConductor::segments() const
{
    std::vector<WireSegment> out;
    if (vertices.size() < 2) return out;
    out.reserve(vertices.size() - 1);
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
        out.push_back({vertices[i], vertices[i + 1], current});
    }
    return out;
}

double PolylineConductor::length() const
{
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i) total += (vertices[i + 1] - vertices[i]).norm();
    return total;
}

PolylineConductor PolylineConductor::reversed() const
{
    PolylineConductor r = *this;
    r.vertices.assign(vertices.rbegin(), vertices.rend());
    r.current = -current;
    return r;
}

void ChipAssembly::validate() const
{
    for (const auto& c : conductors) {
        if (c.vertices.size() < 2) throw ConfigError("conductor '" + c.label + "' needs at least two vertices");
        if (!std::isfinite(c.current)) throw ConfigError("conductor '" + c.label + "' has a non-finite current");
        for (std::size_t i = 0; i < c.vertices.size(); ++i) {
            if (!finite(c.vertices[i])) throw ConfigError("conductor '" + c.label + "' has a non-finite vertex");
            if (c.vertices[i].y() > 0.0) {
                throw ConfigError("conductor '" + c.label + "' lies on the vacuum side of the chip (y > 0)");
            }
            if (i > 0 && c.vertices[i] == c.vertices[i - 1]) {
                throw ConfigError("conductor '" + c.label + "' has repeated consecutive vertices");
            }
        }
    }
    for (const auto& coil : coils) {
        const double tol = 1e-9;
        if (std::abs(coil.axis_u.norm() - 1.0) > tol || std::abs(coil.axis_v.norm() - 1.0) > tol ||
            std::abs(coil.axis_u.dot(coil.axis_v)) > tol) {
            throw ConfigError("coil '" + coil.label + "' axes are not orthonormal");
        }
        if (coil.turns < 1) throw ConfigError("coil '" + coil.label + "' needs at least one turn");
        if (!(coil.length_u > 0.0) || !(coil.length_v > 0.0)) {
            throw ConfigError("coil '" + coil.label + "' side lengths must be positive");
        }
        if (!std::isfinite(coil.current) || !finite(coil.center) || !std::isfinite(coil.turn_spacing)) {
            throw ConfigError("coil '" + coil.label + "' has non-finite parameters");
        }
        for (const auto& seg : discretize_coil(coil)) {
            if (seg.start.y() > 0.0) {
                throw ConfigError("coil '" + coil.label + "' lies on the vacuum side of the chip (y > 0)");
            }
        }
    }
    for (const auto& b : biases) {
        if (!finite(b.field)) throw ConfigError("bias '" + b.label + "' is not finite");
    }
    if (!finite(gravity)) throw ConfigError("gravity is not finite");
}

std::vector<WireSegment> discretize_coil(const RectangularCoil& coil)
{
    const Vec3 hu = 0.5 * coil.length_u * coil.axis_u;
    const Vec3 hv = 0.5 * coil.length_v * coil.axis_v;
    const Vec3 n = coil.normal();
    std::vector<WireSegment> out;
    out.reserve(4 * static_cast<std::size_t>(coil.turns));
    for (int k = 0; k < coil.turns; ++k) {
        const Vec3 c = coil.center - static_cast<double>(k) * coil.turn_spacing * n;
        const Vec3 p0 = c - hu - hv;
        const Vec3 p1 = c + hu - hv;
        const Vec3 p2 = c + hu + hv;
        const Vec3 p3 = c - hu + hv;
        out.push_back({p0, p1, coil.current});
        out.push_back({p1, p2, coil.current});
        out.push_back({p2, p3, coil.current});
        out.push_back({p3, p0, coil.current});
    }
    return out;
}

const std::vector<ParameterInfo>& chip_parameter_table()
{
    using P = ChipParameters;
    static const std::vector<ParameterInfo> table{
        {"Z_current", Dimension::current, Unit::ampere, "current in the Z wire", &P::Z_current},
        {"Z_bar_length", Dimension::length, Unit::millimeter, "Z wire central bar length along x", &P::Z_bar_length},
        {"Z_arm_length", Dimension::length, Unit::millimeter, "Z wire arm length along +-z", &P::Z_arm_length},
        {"Z_width", Dimension::length, Unit::micrometer, "Z wire trace width (metadata)", &P::Z_width},
        {"U_current", Dimension::current, Unit::ampere, "current in the U wire", &P::U_current},
        {"U_bar_length", Dimension::length, Unit::millimeter, "U wire central bar length along x", &P::U_bar_length},
        {"U_arm_length", Dimension::length, Unit::millimeter, "U wire arm length along -z", &P::U_arm_length},
        {"U_width", Dimension::length, Unit::micrometer, "U wire trace width (metadata)", &P::U_width},
        {"Q_current", Dimension::current, Unit::ampere, "current per turn in the quadrupole coil", &P::Q_current},
        {"Q_turns", Dimension::dimensionless, Unit::one, "number of coil turns", &P::Q_turns},
        {"Q_short_side", Dimension::length, Unit::millimeter, "coil side along x", &P::Q_short_side},
        {"Q_long_side", Dimension::length, Unit::millimeter, "coil side along z", &P::Q_long_side},
        {"Q_distance", Dimension::length, Unit::millimeter, "distance of the first turn behind the chip surface",
         &P::Q_distance},
        {"Q_turn_spacing", Dimension::length, Unit::millimeter, "spacing between turns, stacked away from the chip",
         &P::Q_turn_spacing},
        {"Q_bottom_z", Dimension::length, Unit::millimeter, "z of the coil's bottom edge", &P::Q_bottom_z},
        {"Bx", Dimension::magnetic_field, Unit::gauss, "uniform bias along +x", &P::Bx},
        {"By", Dimension::magnetic_field, Unit::gauss, "uniform bias along +y", &P::By},
        {"Bz", Dimension::magnetic_field, Unit::gauss, "uniform bias along +z", &P::Bz},
        {"gravity", Dimension::acceleration, Unit::meter_per_second2, "gravitational acceleration along -z",
         &P::gravity},
    };
    return table;
}

void ChipParameters::set(std::string_view name, double si_value)
{
    for (const auto& p : chip_parameter_table()) {
        if (p.name == name) {
            if (!std::isfinite(si_value)) throw ConfigError("parameter '" + std::string(name) + "' is not finite");
            this->*(p.member) = si_value;
            return;
        }
    }
    throw ConfigError("unknown chip parameter '" + std::string(name) + "'");
}

double ChipParameters::get(std::string_view name) const
{
    for (const auto& p : chip_parameter_table()) {
        if (p.name == name) return this->*(p.member);
    }
    throw ConfigError("unknown chip parameter '" + std::string(name) + "'");
}

ChipAssembly build_chip(const ChipParameters& p)
{
    if (!(p.Z_bar_length > 0.0) || !(p.Z_arm_length > 0.0) || !(p.U_bar_length > 0.0) || !(p.U_arm_length > 0.0)) {
        throw ConfigError("wire bar and arm lengths must be positive");
    }
    const double turns = std::round(p.Q_turns);
    if (turns < 1.0 || std::abs(turns - p.Q_turns) > 1e-9) throw ConfigError("Q_turns must be a positive integer");
    if (p.Q_distance < 0.0) throw ConfigError("Q_distance must be non-negative");
    if (p.Q_turn_spacing < 0.0) throw ConfigError("Q_turn_spacing must be non-negative");

    ChipAssembly chip;

    // Bar current runs along -x so that, for positive current, its field in front of the
    // chip points along -z and is cancelled by a positive Bz.
    const double a = 0.5 * p.Z_bar_length;
    PolylineConductor z_wire;
    z_wire.label = "Z";
    z_wire.current = p.Z_current;
    z_wire.width = p.Z_width;
    z_wire.vertices = {{a, 0.0, p.Z_arm_length}, {a, 0.0, 0.0}, {-a, 0.0, 0.0}, {-a, 0.0, -p.Z_arm_length}};
    chip.conductors.push_back(z_wire);

    const double b = 0.5 * p.U_bar_length;
    PolylineConductor u_wire;
    u_wire.label = "U";
    u_wire.current = p.U_current;
    u_wire.width = p.U_width;
    u_wire.vertices = {{b, 0.0, -p.U_arm_length}, {b, 0.0, 0.0}, {-b, 0.0, 0.0}, {-b, 0.0, -p.U_arm_length}};
    chip.conductors.push_back(u_wire);

    RectangularCoil coil;
    coil.label = "Q";
    coil.axis_u = -Vec3::UnitX();
    coil.axis_v = Vec3::UnitZ();
    coil.length_u = p.Q_short_side;
    coil.length_v = p.Q_long_side;
    coil.center = Vec3(0.0, -p.Q_distance, p.Q_bottom_z + 0.5 * p.Q_long_side);
    coil.turns = static_cast<int>(turns);
    coil.current = p.Q_current;
    coil.turn_spacing = p.Q_turn_spacing;
    chip.coils.push_back(coil);

    chip.biases.push_back({Vec3(p.Bx, 0.0, 0.0), "B_x"});
    chip.biases.push_back({Vec3(0.0, p.By, 0.0), "B_y"});
    chip.biases.push_back({Vec3(0.0, 0.0, p.Bz), "B_z"});
    chip.gravity = Vec3(0.0, 0.0, -p.gravity);

    chip.validate();
    return chip;
}

ChipAssembly build_default_chip(const ParameterOverrides& overrides)
{
    ChipParameters p;
    for (const auto& [name, value] : overrides) p.set(name, value);
    return build_chip(p);
}

}  // namespace atomchip
