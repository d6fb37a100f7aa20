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

#include <functional>

#include "atomchip/geometry.hpp"

namespace atomchip::detail {

struct SimplexResult {
    Vec3 x = Vec3::Zero();
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
    /// A vertex left the ball of radius `max_excursion` around the start point.
    bool escaped = false;
};

/// Derivative-free Nelder-Mead descent in three dimensions. `f` may return +inf to mark
/// forbidden points. Converges when every vertex is within `x_tol` of the best one.
SimplexResult nelder_mead(const std::function<double(const Vec3&)>& f, const Vec3& start, double initial_step,
                          double x_tol, int max_evaluations, double max_excursion);

}  // namespace atomchip::detail
