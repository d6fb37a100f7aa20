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

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "atomchip/units.hpp"

namespace atomchip {

/// Position in meters or field in tesla, depending on context.
/// Axes: x along the Z-wire central bar, y normal to the chip (vacuum side y > 0),
/// z vertical with gravity along -z.
using Vec3 = Eigen::Vector3d;

/// Straight filament carrying `current` from `start` to `end`.
struct WireSegment {
    Vec3 start;
    Vec3 end;
    double current = 0.0;
};

struct PolylineConductor {
    std::vector<Vec3> vertices;
    double current = 0.0;
    std::string label;
    /// Physical trace width. Metadata only; conductors are filaments.
    double width = 0.0;

    std::vector<WireSegment> segments() const;
    double length() const;
    /// Same path traversed backwards with negated current; produces the same field.
    PolylineConductor reversed() const;
};

/// Rectangular multi-turn coil. Each turn runs
/// c - u/2 - v/2 -> c + u/2 - v/2 -> c + u/2 + v/2 -> c - u/2 + v/2 -> back,
/// where u and v are the in-plane axes scaled by the side lengths. Positive current
/// circulates counter-clockwise about n = u x v. Turn k sits at center - k * turn_spacing * n.
struct RectangularCoil {
    Vec3 center = Vec3::Zero();
    Vec3 axis_u = Vec3::UnitX();
    Vec3 axis_v = Vec3::UnitZ();
    double length_u = 0.0;
    double length_v = 0.0;
    int turns = 1;
    double current = 0.0;
    double turn_spacing = 0.0;
    std::string label;

    Vec3 normal() const { return axis_u.cross(axis_v); }
};

struct UniformBias {
    Vec3 field = Vec3::Zero();
    std::string label;
};

/// Full field-source model. The chip surface is the plane y = 0; every conductor
/// must lie at y <= 0.
struct ChipAssembly {
    std::vector<PolylineConductor> conductors;
    std::vector<RectangularCoil> coils;
    std::vector<UniformBias> biases;
    Vec3 gravity{0.0, 0.0, -9.81};

    /// Throws ConfigError when an invariant is broken.
    void validate() const;
};

std::vector<WireSegment> discretize_coil(const RectangularCoil& coil);

/// Flat parameter set of the experiment's chip, SI units. Names match `chip.schema`.
struct ChipParameters {
    double Z_current = 1.5;
    double Z_bar_length = 2.8e-3;
    double Z_arm_length = 10e-3;
    double Z_width = 40e-6;
    double U_current = 0.0;
    double U_bar_length = 5.0e-3;
    double U_arm_length = 10e-3;
    double U_width = 280e-6;
    double Q_current = 0.0;
    double Q_turns = 19;
    double Q_short_side = 10e-3;
    double Q_long_side = 28e-3;
    double Q_distance = 1.5e-3;
    double Q_turn_spacing = 0.1e-3;
    double Q_bottom_z = 0.0;
    double Bx = 2.75e-4;
    double By = 0.0;
    double Bz = 6.26e-4;
    double gravity = 9.81;

    /// Sets a parameter by name (SI value). Unknown names throw ConfigError naming the key.
    void set(std::string_view name, double si_value);
    double get(std::string_view name) const;
};

struct ParameterInfo {
    std::string_view name;
    Dimension dimension;
    Unit display_unit;
    std::string_view description;
    double ChipParameters::*member;
};

/// Every documented chip parameter, in schema order.
const std::vector<ParameterInfo>& chip_parameter_table();

using ParameterOverrides = std::map<std::string, double, std::less<>>;

ChipAssembly build_chip(const ChipParameters& params);
ChipAssembly build_default_chip(const ParameterOverrides& overrides = {});

}  // namespace atomchip
