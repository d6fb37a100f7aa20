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
#include <functional>
#include <string>

#include <Eigen/Core>

#include "atomchip/constants.hpp"
#include "atomchip/fieldsolver.hpp"
#include "atomchip/geometry.hpp"

namespace atomchip {

/// Hyperfine sublevel of the trapped atom.
struct SpinState {
    int F = 2;
    int mF = 2;
    double gF = 0.5;

    /// mu = gF mF mu_B, in J/T.
    double moment() const { return gF * mF * constants::bohr_magneton; }
    bool weak_field_seeker() const { return gF * mF > 0.0; }
    /// Throws ConfigError when |mF| > F.
    void validate() const;

    /// 87Rb sublevel with Lande factor +1/2 (F = 2) or -1/2 (F = 1).
    static SpinState rubidium87(int F, int mF);
};

/// Adiabatic potential U = mu |B| + m g z evaluated on a prepared source.
/// Gravity comes from the source; pass include_gravity = false to drop it.
class TrapPotential {
public:
    TrapPotential(const ChipAssembly& chip, const SpinState& spin, double mass = constants::rb87_mass,
                  bool include_gravity = true);
    TrapPotential(FieldSource source, const SpinState& spin, double mass = constants::rb87_mass,
                  bool include_gravity = true);

    double operator()(const Vec3& p) const;
    /// Central-difference gradient with step h.
    Vec3 gradient(const Vec3& p, double h = kDerivativeStep) const;
    Eigen::Matrix3d hessian(const Vec3& p, double h = 2e-6) const;

    const FieldSource& source() const noexcept { return source_; }
    const SpinState& spin() const noexcept { return spin_; }
    double mass() const noexcept { return mass_; }

private:
    FieldSource source_;
    SpinState spin_;
    double mass_;
    double moment_;
    Vec3 gravity_;
};

double potential(const ChipAssembly& chip, const SpinState& spin, const Vec3& p,
                 double mass = constants::rb87_mass);

/// Hessian of an arbitrary scalar function by central differences.
Eigen::Matrix3d scalar_hessian(const std::function<double(const Vec3&)>& f, const Vec3& p, double h);

struct MinimizerOptions {
    double simplex_step = 100e-6;
    double position_tolerance = 1e-8;
    int max_evaluations = 10000;
    /// The search is abandoned once it wanders this far from the seed.
    double search_radius = 20e-3;
    double gradient_step = 1e-6;
    double hessian_step = 2e-6;
};

struct MinimumResult {
    Vec3 position = Vec3::Zero();
    double energy = 0.0;
    double gradient_norm = 0.0;
    int evaluations = 0;
};

/// Simplex descent followed by damped Newton refinement.
/// Throws NoTrapError or UnphysicalTrapError.
MinimumResult locate_minimum(const TrapPotential& U, const Vec3& seed, const MinimizerOptions& options = {});
Vec3 find_minimum(const ChipAssembly& chip, const SpinState& spin, const Vec3& seed,
                  const MinimizerOptions& options = {});

struct TrapReport {
    Vec3 position = Vec3::Zero();
    double B0 = 0.0;
    /// Columns are the principal axes, ordered by ascending trap frequency.
    Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();
    /// |dB/ds| along each principal axis, T/m.
    Vec3 gradient = Vec3::Zero();
    /// d2|B|/ds2 along each principal axis, T/m^2.
    Vec3 curvature = Vec3::Zero();
    /// Ascending; entry 0 is the axial frequency. Hz.
    Vec3 frequencies = Vec3::Zero();
    double depth = 0.0;
    /// Name of the escape path that sets the depth.
    std::string depth_channel;
    double distance_to_chip = 0.0;
    SpinState spin;
    double mass = constants::rb87_mass;

    double depth_microkelvin() const { return depth / constants::boltzmann * 1e6; }
    /// Smallest transverse frequency over the axial one.
    double anisotropy() const { return frequencies[0] > 0.0 ? frequencies[1] / frequencies[0] : 0.0; }
};

struct CharacterizeOptions {
    MinimizerOptions minimizer;
    double probe_length = 5e-3;
    int probe_samples = 500;
};

/// Frequencies in Hz from the eigenvalues of a potential Hessian, ascending.
/// Throws SaddlePointError on a negative eigenvalue.
Vec3 frequencies_from_hessian(const Eigen::Matrix3d& hessian, double mass, Eigen::Matrix3d* axes = nullptr);

TrapReport characterize(const TrapPotential& U, const Vec3& seed, const CharacterizeOptions& options = {});
TrapReport characterize(const ChipAssembly& chip, const SpinState& spin, const Vec3& seed,
                        const CharacterizeOptions& options = {});

struct QuadrupoleReport {
    Vec3 zero = Vec3::Zero();
    /// J(i, j) = dB_i / dx_j at the zero.
    Eigen::Matrix3d gradient_tensor = Eigen::Matrix3d::Zero();
    /// Frobenius norm of the gradient tensor.
    double gradient_norm = 0.0;
    /// Largest singular value of the gradient tensor.
    double strongest_gradient = 0.0;
};

/// Locates a zero of |B| near `seed`, ignoring gravity. Throws NoTrapError when
/// the field has no zero there.
QuadrupoleReport quadrupole_report(const ChipAssembly& chip, const Vec3& seed);
QuadrupoleReport quadrupole_report(const FieldSource& source, const Vec3& seed);

struct MajoranaFigure {
    double adiabaticity = 0.0;
    bool loss_prone = true;
};

inline constexpr double kMajoranaThreshold = 10.0;

/// A = mu B0 / (hbar omega_max).
MajoranaFigure majorana_figure(double B0, double omega_max, const SpinState& spin,
                               double threshold = kMajoranaThreshold);
MajoranaFigure majorana_figure(const TrapReport& report, double threshold = kMajoranaThreshold);

}  // namespace atomchip
