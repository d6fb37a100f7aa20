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

#include "atomchip/fieldsolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "atomchip/constants.hpp"
#include "atomchip/errors.hpp"
#include "parallel.hpp"

namespace atomchip {

SingularityError::SingularityError(const std::string& conductor, const Eigen::Vector3d& point,
                                   const std::string& context)
    : Error([&] {
          std::ostringstream os;
          os.precision(9);
          os << "field evaluated within " << kExclusionRadius << " m of conductor '" << conductor << "' at ("
             << point.x() << ", " << point.y() << ", " << point.z() << ")";
          if (!context.empty()) os << " (" << context << ")";
          return os.str();
      }()),
      conductor_(conductor),
      point_(point)
{
}

namespace {

constexpr double kEps2 = kExclusionRadius * kExclusionRadius;
constexpr double kMu0Over4Pi = constants::mu0 / (4.0 * constants::pi);

/// Adds the field of one filament to (bx, by, bz). Returns false if p is inside the
/// exclusion radius.
///
/// With r1 = p - a, r2 = p - b, t_i = L.r_i and c = L x r1, the filament field is
///   B = k (t1/|r1| - t2/|r2|) c / |c|^2.
/// When p projects outside the segment the bracket cancels catastrophically, so it is
/// rewritten as k (t1 + t2) c / (|r1||r2| (t1|r2| + t2|r1|)), which has no cancellation
/// there and vanishes smoothly on the axis extension.
inline bool add_filament(double ax, double ay, double az, double lx, double ly, double lz, double l2, double k,
                         double px, double py, double pz, double& bx, double& by, double& bz)
{
    const double r1x = px - ax;
    const double r1y = py - ay;
    const double r1z = pz - az;
    const double t1 = lx * r1x + ly * r1y + lz * r1z;
    const double t2 = t1 - l2;
    const double cx = ly * r1z - lz * r1y;
    const double cy = lz * r1x - lx * r1z;
    const double cz = lx * r1y - ly * r1x;
    const double c2 = cx * cx + cy * cy + cz * cz;
    const double n1sq = r1x * r1x + r1y * r1y + r1z * r1z;
    const double r2x = r1x - lx;
    const double r2y = r1y - ly;
    const double r2z = r1z - lz;
    const double n2sq = r2x * r2x + r2y * r2y + r2z * r2z;

    const double d2 = t1 <= 0.0 ? n1sq : (t2 >= 0.0 ? n2sq : c2 / l2);
    if (d2 < kEps2) return false;

    const double n1 = std::sqrt(n1sq);
    const double n2 = std::sqrt(n2sq);
    double f;
    if (t1 * t2 > 0.0) {
        f = (t1 + t2) / (n1 * n2 * (t1 * n2 + t2 * n1));
    } else {
        f = (t1 / n1 - t2 / n2) / c2;
    }
    f *= k;
    bx += f * cx;
    by += f * cy;
    bz += f * cz;
    return true;
}

}  // namespace

Vec3 segment_field(const WireSegment& seg, const Vec3& p, const std::string& label)
{
    if (seg.current == 0.0) return Vec3::Zero();
    const Vec3 L = seg.end - seg.start;
    double bx = 0.0;
    double by = 0.0;
    double bz = 0.0;
    if (!add_filament(seg.start.x(), seg.start.y(), seg.start.z(), L.x(), L.y(), L.z(), L.squaredNorm(),
                      kMu0Over4Pi * seg.current, p.x(), p.y(), p.z(), bx, by, bz)) {
        throw SingularityError(label, p);
    }
    return {bx, by, bz};
}

FieldSource::FieldSource(const ChipAssembly& chip) : gravity_(chip.gravity)
{
    auto add = [this](const WireSegment& s, std::uint32_t label) {
        if (s.current == 0.0) return;
        const Vec3 L = s.end - s.start;
        ax_.push_back(s.start.x());
        ay_.push_back(s.start.y());
        az_.push_back(s.start.z());
        lx_.push_back(L.x());
        ly_.push_back(L.y());
        lz_.push_back(L.z());
        l2_.push_back(L.squaredNorm());
        k_.push_back(kMu0Over4Pi * s.current);
        label_index_.push_back(label);
    };
    for (const auto& c : chip.conductors) {
        const auto label = static_cast<std::uint32_t>(labels_.size());
        labels_.push_back(c.label);
        for (const auto& s : c.segments()) add(s, label);
    }
    for (const auto& coil : chip.coils) {
        const auto label = static_cast<std::uint32_t>(labels_.size());
        labels_.push_back(coil.label);
        for (const auto& s : discretize_coil(coil)) add(s, label);
    }
    for (const auto& b : chip.biases) bias_ += b.field;
}

Vec3 FieldSource::field(const Vec3& p) const
{
    const double px = p.x();
    const double py = p.y();
    const double pz = p.z();
    double bx = 0.0;
    double by = 0.0;
    double bz = 0.0;
    const std::size_t n = k_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!add_filament(ax_[i], ay_[i], az_[i], lx_[i], ly_[i], lz_[i], l2_[i], k_[i], px, py, pz, bx, by, bz)) {
            throw SingularityError(labels_[label_index_[i]], p);
        }
    }
    return {bx + bias_.x(), by + bias_.y(), bz + bias_.z()};
}

double FieldSource::distance_to_conductors(const Vec3& p) const
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k_.size(); ++i) {
        const Vec3 a(ax_[i], ay_[i], az_[i]);
        const Vec3 L(lx_[i], ly_[i], lz_[i]);
        const double t = std::clamp((p - a).dot(L) / l2_[i], 0.0, 1.0);
        best = std::min(best, (p - (a + t * L)).norm());
    }
    return best;
}

Vec3 total_field(const ChipAssembly& chip, const Vec3& p) { return FieldSource(chip).field(p); }

Eigen::Matrix3d field_jacobian(const FieldSource& source, const Vec3& p, double h)
{
    Eigen::Matrix3d J;
    for (int k = 0; k < 3; ++k) {
        Vec3 dp = Vec3::Zero();
        dp[k] = h;
        // Fourth-order stencil; the plain two-point rule leaves ~h^2/d^2 residuals 100 um from a wire.
        J.col(k) = (8.0 * (source.field(p + dp) - source.field(p - dp)) -
                    (source.field(p + 2.0 * dp) - source.field(p - 2.0 * dp))) /
                   (12.0 * h);
    }
    return J;
}

Eigen::Matrix3d field_jacobian(const ChipAssembly& chip, const Vec3& p, double h)
{
    return field_jacobian(FieldSource(chip), p, h);
}

Eigen::Matrix3d field_hessian_of_magnitude(const FieldSource& source, const Vec3& p, double h)
{
    Eigen::Matrix3d H;
    const double f0 = source.magnitude(p);
    for (int i = 0; i < 3; ++i) {
        Vec3 di = Vec3::Zero();
        di[i] = h;
        H(i, i) = (source.magnitude(p + di) - 2.0 * f0 + source.magnitude(p - di)) / (h * h);
        for (int j = i + 1; j < 3; ++j) {
            Vec3 dj = Vec3::Zero();
            dj[j] = h;
            const double v = (source.magnitude(p + di + dj) - source.magnitude(p + di - dj) -
                              source.magnitude(p - di + dj) + source.magnitude(p - di - dj)) /
                             (4.0 * h * h);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

Eigen::Matrix3d field_hessian_of_magnitude(const ChipAssembly& chip, const Vec3& p, double h)
{
    return field_hessian_of_magnitude(FieldSource(chip), p, h);
}

std::size_t GridSpec::size() const
{
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
}

Vec3 GridSpec::point(std::size_t index) const
{
    const auto nz = static_cast<std::size_t>(dims[2]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    const std::size_t iz = index % nz;
    const std::size_t iy = (index / nz) % ny;
    const std::size_t ix = index / (nz * ny);
    return origin + Vec3(static_cast<double>(ix) * spacing.x(), static_cast<double>(iy) * spacing.y(),
                         static_cast<double>(iz) * spacing.z());
}

FieldGrid field_map(const ChipAssembly& chip, const GridSpec& spec, unsigned workers)
{
    if (spec.dims[0] < 1 || spec.dims[1] < 1 || spec.dims[2] < 1) {
        throw ConfigError("grid dimensions must be at least 1");
    }
    if (!spec.origin.allFinite() || !spec.spacing.allFinite()) throw ConfigError("grid origin/spacing not finite");
    const FieldSource source(chip);
    FieldGrid grid;
    grid.spec = spec;
    grid.samples.resize(spec.size());
    detail::parallel_for(grid.samples.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Vec3 p = spec.point(i);
            Vec3 B;
            try {
                B = source.field(p);
            } catch (const SingularityError& e) {
                throw SingularityError(e.conductor(), p, "grid point " + std::to_string(i));
            }
            grid.samples[i] = {p, B, B.norm()};
        }
    });
    return grid;
}

void write_field_grid_csv(std::ostream& out, const FieldGrid& grid)
{
    out << "x_m,y_m,z_m,Bx_T,By_T,Bz_T,Bnorm_T\n";
    char buf[256];
    for (const auto& s : grid.samples) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", s.point.x(), s.point.y(), s.point.z(),
                      s.B.x(), s.B.y(), s.B.z(), s.magnitude);
        out << buf;
    }
}

}  // namespace atomchip
