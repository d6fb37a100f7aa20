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

#include <numbers>

namespace atomchip::constants {

inline constexpr double pi = std::numbers::pi;

/// Vacuum permeability, T m / A.
inline constexpr double mu0 = 4.0e-7 * pi;
/// Bohr magneton, J / T.
inline constexpr double bohr_magneton = 9.274009994e-24;
/// Boltzmann constant, J / K.
inline constexpr double boltzmann = 1.380649e-23;
/// Reduced Planck constant, J s.
inline constexpr double hbar = 1.0545718e-34;
/// Mass of 87Rb, kg.
inline constexpr double rb87_mass = 1.443160e-25;
/// Natural linewidth of the Rb D2 line, rad/s. Only used as the detuning unit.
inline constexpr double rb87_gamma = 2.0 * pi * 6.0666e6;
/// Mass of 4He, kg.
inline constexpr double helium4_mass = 6.646e-27;

inline constexpr double standard_gravity = 9.81;

}  // namespace atomchip::constants
