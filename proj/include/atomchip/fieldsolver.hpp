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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "atomchip/geometry.hpp"

namespace atomchip {

/// Points closer than this to a filament are rejected.
inline constexpr double kExclusionRadius = 1e-6;

/// Default central-difference step for field derivatives.
inline constexpr double kDerivativeStep = 1e-6;

/// Closed-form Biot-Savart field of a straight filament at `p`, tesla.
/// Throws SingularityError (tagged with `label`) within kExclusionRadius of the segment.
Vec3 segment_field(const WireSegment& seg, const Vec3& p, const std::string& label = "segment");

/// Flattened, immutable view of a ChipAssembly for repeated evaluation. Segments are
/// summed in declaration order (conductors, then coils), followed by the biases, so every
/// point gets the same summation order regardless of the caller's threading.
/// Zero-current segments are dropped; they contribute exactly nothing.
class FieldSource {
public:
    FieldSource() = default;
    explicit FieldSource(const ChipAssembly& chip);

    Vec3 field(const Vec3& p) const;
    double magnitude(const Vec3& p) const { return field(p).norm(); }
    const Vec3& bias() const noexcept { return bias_; }
    const Vec3& gravity() const noexcept { return gravity_; }
    std::size_t segment_count() const noexcept { return k_.size(); }
    /// Smallest distance from `p` to any current-carrying filament.
    double distance_to_conductors(const Vec3& p) const;

private:
    // Struct-of-arrays: start, direction vector, |L|^2 and mu0 I / 4 pi per segment.
    std::vector<double> ax_, ay_, az_, lx_, ly_, lz_, l2_, k_;
    std::vector<std::uint32_t> label_index_;
    std::vector<std::string> labels_;
    Vec3 bias_ = Vec3::Zero();
    Vec3 gravity_ = Vec3::Zero();
};

Vec3 total_field(const ChipAssembly& chip, const Vec3& p);

/// J(j, k) = dB_j / dx_k by central differences, T/m.
Eigen::Matrix3d field_jacobian(const FieldSource& source, const Vec3& p, double h = kDerivativeStep);
Eigen::Matrix3d field_jacobian(const ChipAssembly& chip, const Vec3& p, double h = kDerivativeStep);

/// Hessian of |B| by central differences, T/m^2.
Eigen::Matrix3d field_hessian_of_magnitude(const FieldSource& source, const Vec3& p, double h = kDerivativeStep);
Eigen::Matrix3d field_hessian_of_magnitude(const ChipAssembly& chip, const Vec3& p, double h = kDerivativeStep);

struct FieldSample {
    Vec3 point;
    Vec3 B;
    double magnitude = 0.0;
};

struct GridSpec {
    Vec3 origin = Vec3::Zero();
    Vec3 spacing = Vec3::Zero();
    std::array<int, 3> dims{1, 1, 1};

    std::size_t size() const;
    /// Row-major: x varies slowest, z fastest.
    Vec3 point(std::size_t index) const;
};

struct FieldGrid {
    GridSpec spec;
    std::vector<FieldSample> samples;
};

/// Evaluates the field on a grid. Output is identical for any `workers` count.
/// A singular grid point throws SingularityError whose message names the point index.
FieldGrid field_map(const ChipAssembly& chip, const GridSpec& spec, unsigned workers = 1);

/// CSV header x_m,y_m,z_m,Bx_T,By_T,Bz_T,Bnorm_T; 9 significant digits.
void write_field_grid_csv(std::ostream& out, const FieldGrid& grid);

}  // namespace atomchip
