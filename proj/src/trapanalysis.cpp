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

#include "atomchip/trapanalysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "atomchip/errors.hpp"
#include "optimize.hpp"

namespace atomchip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_point(const Vec3& p)
{
    std::ostringstream os;
    os.precision(6);
    os << "(" << p.x() << ", " << p.y() << ", " << p.z() << ") m";
    return os.str();
}

// Curvature below this corresponds to a trap frequency under 1 mHz.
double flat_curvature(double mass)
{
    const double w = 2.0 * constants::pi * 1e-3;
    return mass * w * w;
}

}  // namespace

void SpinState::validate() const
{
    if (F < 0) throw ConfigError("spin F must be non-negative");
    if (std::abs(mF) > F) {
        throw ConfigError("spin state |mF| = " + std::to_string(std::abs(mF)) + " exceeds F = " + std::to_string(F));
    }
}

SpinState SpinState::rubidium87(int F, int mF)
{
    if (F != 1 && F != 2) throw ConfigError("87Rb ground state has F = 1 or F = 2");
    SpinState s{F, mF, F == 2 ? 0.5 : -0.5};
    s.validate();
    return s;
}

TrapPotential::TrapPotential(const ChipAssembly& chip, const SpinState& spin, double mass, bool include_gravity)
    : TrapPotential(FieldSource(chip), spin, mass, include_gravity)
{
}

TrapPotential::TrapPotential(FieldSource source, const SpinState& spin, double mass, bool include_gravity)
    : source_(std::move(source)),
      spin_(spin),
      mass_(mass),
      moment_(spin.moment()),
      gravity_(include_gravity ? source_.gravity() : Vec3::Zero())
{
    spin_.validate();
    if (!(mass > 0.0)) throw ConfigError("atomic mass must be positive");
}

double TrapPotential::operator()(const Vec3& p) const
{
    return moment_ * source_.magnitude(p) - mass_ * gravity_.dot(p);
}

Vec3 TrapPotential::gradient(const Vec3& p, double h) const
{
    Vec3 g;
    for (int k = 0; k < 3; ++k) {
        Vec3 d = Vec3::Zero();
        d[k] = h;
        g[k] = ((*this)(p + d) - (*this)(p - d)) / (2.0 * h);
    }
    return g;
}

Eigen::Matrix3d TrapPotential::hessian(const Vec3& p, double h) const
{
    return scalar_hessian([this](const Vec3& q) { return (*this)(q); }, p, h);
}

double potential(const ChipAssembly& chip, const SpinState& spin, const Vec3& p, double mass)
{
    return TrapPotential(chip, spin, mass)(p);
}

Eigen::Matrix3d scalar_hessian(const std::function<double(const Vec3&)>& f, const Vec3& p, double h)
{
    Eigen::Matrix3d H;
    const double f0 = f(p);
    for (int i = 0; i < 3; ++i) {
        Vec3 di = Vec3::Zero();
        di[i] = h;
        H(i, i) = (f(p + di) - 2.0 * f0 + f(p - di)) / (h * h);
        for (int j = i + 1; j < 3; ++j) {
            Vec3 dj = Vec3::Zero();
            dj[j] = h;
            const double v = (f(p + di + dj) - f(p + di - dj) - f(p - di + dj) + f(p - di - dj)) / (4.0 * h * h);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

MinimumResult locate_minimum(const TrapPotential& U, const Vec3& seed, const MinimizerOptions& options)
{
    if (!seed.allFinite()) throw ConfigError("seed point is not finite");
    int evaluations = 0;
    auto safe = [&](const Vec3& p) {
        ++evaluations;
        try {
            return U(p);
        } catch (const SingularityError&) {
            return kInf;
        }
    };

    const auto simplex = detail::nelder_mead(safe, seed, options.simplex_step, 10.0 * options.position_tolerance,
                                             options.max_evaluations, options.search_radius);
    if (simplex.escaped) {
        throw NoTrapError("potential has no minimum within " + std::to_string(options.search_radius * 1e3) +
                          " mm of the seed " + format_point(seed));
    }
    if (!simplex.converged || !std::isfinite(simplex.value)) {
        throw NoTrapError("minimum search did not converge in " + std::to_string(options.max_evaluations) +
                          " evaluations");
    }

    Vec3 x = simplex.x;
    double fx = simplex.value;
    bool flat = false;
    try {
        for (int iter = 0; iter < 50 && evaluations < options.max_evaluations; ++iter) {
            const Vec3 g = U.gradient(x, options.gradient_step);
            const Eigen::Matrix3d H = U.hessian(x, options.hessian_step);
            evaluations += 25;
            const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
            const Vec3 lambda = es.eigenvalues();
            if (lambda.cwiseAbs().maxCoeff() < flat_curvature(U.mass())) {
                flat = true;
                break;
            }
            if (lambda.minCoeff() <= 0.0) break;
            const Vec3 step = -es.eigenvectors() * (es.eigenvectors().transpose() * g).cwiseQuotient(lambda);
            double alpha = 1.0;
            Vec3 trial = x + step;
            double ft = safe(trial);
            // Tiny steps are below the resolution of U itself; trust the quadratic model there.
            while (ft > fx && step.norm() * alpha > 10.0 * options.position_tolerance && alpha > 1.0 / 1024.0) {
                alpha *= 0.5;
                trial = x + alpha * step;
                ft = safe(trial);
            }
            if (!std::isfinite(ft)) break;
            x = trial;
            fx = ft;
            if (alpha * step.norm() < options.position_tolerance) break;
        }
    } catch (const SingularityError&) {
        // Finite-difference stencil touched a conductor; keep the simplex point.
    }
    if (flat) throw NoTrapError("potential is flat around " + format_point(x) + "; no confinement");
    if ((x - seed).norm() > options.search_radius) {
        throw NoTrapError("refined minimum left the search region around " + format_point(seed));
    }

    if (x.y() <= 0.0) {
        throw UnphysicalTrapError("minimum at " + format_point(x) + " is not on the vacuum side of the chip");
    }
    if (U.source().distance_to_conductors(x) < kExclusionRadius) {
        throw UnphysicalTrapError("minimum at " + format_point(x) + " lies on a conductor");
    }

    MinimumResult r;
    r.position = x;
    r.energy = fx;
    try {
        r.gradient_norm = U.gradient(x, options.gradient_step).norm();
    } catch (const SingularityError&) {
        r.gradient_norm = kInf;
    }
    r.evaluations = evaluations;
    return r;
}

Vec3 find_minimum(const ChipAssembly& chip, const SpinState& spin, const Vec3& seed, const MinimizerOptions& options)
{
    return locate_minimum(TrapPotential(chip, spin), seed, options).position;
}

Vec3 frequencies_from_hessian(const Eigen::Matrix3d& hessian, double mass, Eigen::Matrix3d* axes)
{
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(hessian);
    const Vec3 lambda = es.eigenvalues();
    const double scale = lambda.cwiseAbs().maxCoeff();
    if (lambda.minCoeff() < -1e-9 * scale) {
        std::ostringstream os;
        os << "potential Hessian has a negative eigenvalue " << lambda.minCoeff() << " J/m^2";
        throw SaddlePointError(os.str());
    }
    Vec3 f;
    for (int i = 0; i < 3; ++i) f[i] = std::sqrt(std::max(lambda[i], 0.0) / mass) / (2.0 * constants::pi);
    if (axes) {
        *axes = es.eigenvectors();
        for (int i = 0; i < 3; ++i) {
            Eigen::Index k;
            axes->col(i).cwiseAbs().maxCoeff(&k);
            if ((*axes)(k, i) < 0.0) axes->col(i) *= -1.0;
        }
    }
    return f;
}

TrapReport characterize(const TrapPotential& U, const Vec3& seed, const CharacterizeOptions& options)
{
    const MinimumResult m = locate_minimum(U, seed, options.minimizer);
    const Vec3 x = m.position;
    const FieldSource& src = U.source();

    TrapReport r;
    r.position = x;
    r.spin = U.spin();
    r.mass = U.mass();
    r.distance_to_chip = x.y();
    r.B0 = src.magnitude(x);
    r.frequencies = frequencies_from_hessian(U.hessian(x, options.minimizer.hessian_step), U.mass(), &r.axes);

    const Eigen::Matrix3d HB = field_hessian_of_magnitude(src, x, options.minimizer.hessian_step);
    const Eigen::Matrix3d J = field_jacobian(src, x);
    for (int i = 0; i < 3; ++i) {
        const Vec3 e = r.axes.col(i);
        r.curvature[i] = e.dot(HB * e);
        r.gradient[i] = (J * e).norm();
    }

    const double u0 = m.energy;
    auto barrier = [&](const Vec3& end) {
        double top = u0;
        const int n = std::max(options.probe_samples, 2);
        for (int k = 1; k <= n; ++k) {
            const Vec3 p = x + (end - x) * (static_cast<double>(k) / n);
            try {
                top = std::max(top, U(p));
            } catch (const SingularityError&) {
                return kInf;
            }
        }
        return top - u0;
    };

    static const char* const names[3] = {"axial", "transverse1", "transverse2"};
    r.depth = barrier(Vec3(x.x(), 0.0, x.z()));
    r.depth_channel = "surface";
    for (int i = 0; i < 3; ++i) {
        for (int s : {+1, -1}) {
            const double d = barrier(x + s * options.probe_length * r.axes.col(i));
            if (d < r.depth) {
                r.depth = d;
                r.depth_channel = std::string(names[i]) + (s > 0 ? "+" : "-");
            }
        }
    }
    r.depth = std::max(r.depth, 0.0);
    return r;
}

TrapReport characterize(const ChipAssembly& chip, const SpinState& spin, const Vec3& seed,
                        const CharacterizeOptions& options)
{
    return characterize(TrapPotential(chip, spin), seed, options);
}

QuadrupoleReport quadrupole_report(const FieldSource& source, const Vec3& seed)
{
    if (!seed.allFinite()) throw ConfigError("seed point is not finite");
    constexpr double radius = 20e-3;
    auto safe = [&](const Vec3& p) {
        try {
            return source.magnitude(p);
        } catch (const SingularityError&) {
            return kInf;
        }
    };
    const auto simplex = detail::nelder_mead(safe, seed, 100e-6, 1e-8, 10000, radius);
    if (simplex.escaped || !simplex.converged || !std::isfinite(simplex.value)) {
        throw NoTrapError("no field zero near " + format_point(seed));
    }

    Vec3 x = simplex.x;
    Eigen::Matrix3d J;
    try {
        for (int iter = 0; iter < 50; ++iter) {
            const Vec3 B = source.field(x);
            J = field_jacobian(source, x);
            const Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix3d> cod(J);
            const Vec3 step = -cod.solve(B);
            x += step;
            if ((x - seed).norm() > radius) throw NoTrapError("no field zero near " + format_point(seed));
            if (step.norm() < 1e-12) break;
        }
        J = field_jacobian(source, x);
        const double residual = source.magnitude(x);
        if (!(residual <= std::max(1e-12, J.norm() * 1e-9))) {
            std::ostringstream os;
            os << "no field zero near " << format_point(seed) << "; |B| minimum is " << simplex.value << " T";
            throw NoTrapError(os.str());
        }
    } catch (const SingularityError&) {
        throw NoTrapError("field-zero search ran into a conductor near " + format_point(seed));
    }

    QuadrupoleReport q;
    q.zero = x;
    q.gradient_tensor = J;
    q.gradient_norm = J.norm();
    q.strongest_gradient = Eigen::JacobiSVD<Eigen::Matrix3d>(J).singularValues()[0];
    return q;
}

QuadrupoleReport quadrupole_report(const ChipAssembly& chip, const Vec3& seed)
{
    return quadrupole_report(FieldSource(chip), seed);
}

MajoranaFigure majorana_figure(double B0, double omega_max, const SpinState& spin, double threshold)
{
    MajoranaFigure m;
    if (omega_max <= 0.0) {
        m.adiabaticity = B0 > 0.0 ? kInf : 0.0;
    } else {
        m.adiabaticity = std::abs(spin.moment()) * B0 / (constants::hbar * omega_max);
    }
    m.loss_prone = m.adiabaticity < threshold;
    return m;
}

MajoranaFigure majorana_figure(const TrapReport& report, double threshold)
{
    return majorana_figure(report.B0, 2.0 * constants::pi * report.frequencies.maxCoeff(), report.spin, threshold);
}

}  // namespace atomchip
