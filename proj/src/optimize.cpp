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

#include "optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace atomchip::detail {

SimplexResult nelder_mead(const std::function<double(const Vec3&)>& f, const Vec3& start, double initial_step,
                          double x_tol, int max_evaluations, double max_excursion)
{
    SimplexResult result;
    std::array<Vec3, 4> x;
    std::array<double, 4> fx;

    auto eval = [&](const Vec3& p) {
        ++result.evaluations;
        if ((p - start).norm() > max_excursion) result.escaped = true;
        return f(p);
    };

    x[0] = start;
    for (int i = 1; i < 4; ++i) {
        x[i] = start;
        x[i][i - 1] += initial_step;
    }
    for (int i = 0; i < 4; ++i) fx[i] = eval(x[i]);

    std::array<int, 4> order{0, 1, 2, 3};
    while (result.evaluations < max_evaluations && !result.escaped) {
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        const int best = order[0];
        const int worst = order[3];
        const int second_worst = order[2];

        double spread = 0.0;
        for (int i = 0; i < 4; ++i) spread = std::max(spread, (x[i] - x[best]).norm());
        if (spread < x_tol) {
            result.converged = true;
            break;
        }

        Vec3 centroid = Vec3::Zero();
        for (int i = 0; i < 3; ++i) centroid += x[order[i]];
        centroid /= 3.0;

        const Vec3 xr = centroid + (centroid - x[worst]);
        const double fr = eval(xr);
        if (fr < fx[best]) {
            const Vec3 xe = centroid + 2.0 * (centroid - x[worst]);
            const double fe = eval(xe);
            if (fe < fr) {
                x[worst] = xe;
                fx[worst] = fe;
            } else {
                x[worst] = xr;
                fx[worst] = fr;
            }
            continue;
        }
        if (fr < fx[second_worst]) {
            x[worst] = xr;
            fx[worst] = fr;
            continue;
        }
        const bool outside = fr < fx[worst];
        const Vec3 xc = outside ? Vec3(centroid + 0.5 * (xr - centroid)) : Vec3(centroid + 0.5 * (x[worst] - centroid));
        const double fc = eval(xc);
        if (fc <= (outside ? fr : fx[worst])) {
            x[worst] = xc;
            fx[worst] = fc;
            continue;
        }
        for (int i = 1; i < 4; ++i) {
            const int k = order[i];
            x[k] = x[best] + 0.5 * (x[k] - x[best]);
            fx[k] = eval(x[k]);
        }
    }

    const auto it = std::min_element(fx.begin(), fx.end());
    const auto idx = static_cast<std::size_t>(std::distance(fx.begin(), it));
    result.x = x[idx];
    result.value = fx[idx];
    return result;
}

}  // namespace atomchip::detail
