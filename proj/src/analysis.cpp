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

#include "atomchip/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace atomchip {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kLogTauMin = -20.7;  // ~1e-9 s
constexpr double kLogTauMax = 27.6;   // ~1e12 s

using ModelFn = std::function<void(const VectorXd& p, VectorXd& f, MatrixXd& J)>;

struct LmOutcome {
    VectorXd p;
    double sse = 0.0;
    MatrixXd jtwj;
    bool converged = false;
    int iterations = 0;
};

LmOutcome levenberg_marquardt(const ModelFn& model, VectorXd p, const VectorXd& y, const VectorXd& w,
                              const FitOptions& options, const std::function<void(VectorXd&)>& clamp)
{
    const auto n = y.size();
    const auto np = p.size();
    VectorXd f(n);
    MatrixXd J(n, np);
    model(p, f, J);
    VectorXd r = y - f;
    double sse = r.cwiseProduct(w).dot(r);
    const double scale = y.cwiseProduct(w).dot(y);

    LmOutcome out;
    double lambda = 1e-3;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        out.iterations = iter;
        if (sse <= 1e-28 * scale) {
            out.converged = true;
            break;
        }
        const MatrixXd Jw = w.asDiagonal() * J;
        const MatrixXd A = J.transpose() * Jw;
        const VectorXd g = Jw.transpose() * r;
        VectorXd d = A.diagonal();
        const double dmax = d.maxCoeff();
        for (Eigen::Index i = 0; i < np; ++i) d[i] = std::max(d[i], 1e-15 * dmax + std::numeric_limits<double>::min());

        bool accepted = false;
        while (!accepted) {
            MatrixXd M = A;
            M.diagonal() += lambda * d;
            VectorXd trial = p + M.ldlt().solve(g);
            clamp(trial);
            VectorXd ft(n);
            MatrixXd Jt(n, np);
            model(trial, ft, Jt);
            const VectorXd rt = y - ft;
            const double sse_t = rt.cwiseProduct(w).dot(rt);
            if (std::isfinite(sse_t) && sse_t < sse) {
                const double change = (sse - sse_t) / sse;
                p = trial;
                f = ft;
                J = Jt;
                r = rt;
                sse = sse_t;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (change < options.relative_tolerance) out.converged = true;
            } else {
                lambda *= 10.0;
                if (lambda > 1e16) {
                    // No direction lowers the SSE any further.
                    out.converged = true;
                    break;
                }
            }
        }
        if (out.converged) {
            out.iterations = iter + 1;
            break;
        }
    }
    out.p = p;
    out.sse = sse;
    out.jtwj = J.transpose() * w.asDiagonal() * J;
    return out;
}

/// Pseudo-inverse of J^T W J scaled by the reduced chi-square.
MatrixXd covariance(const LmOutcome& o, Eigen::Index n)
{
    const Eigen::Index dof = std::max<Eigen::Index>(n - o.p.size(), 1);
    const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(o.jtwj);
    MatrixXd C = cod.pseudoInverse() * (o.sse / static_cast<double>(dof));
    return 0.5 * (C + C.transpose());
}

VectorXd make_weights(const std::vector<double>& y, FitWeighting weighting)
{
    VectorXd w(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double v = std::abs(y[i]);
        switch (weighting) {
        case FitWeighting::none: w[static_cast<Eigen::Index>(i)] = 1.0; break;
        case FitWeighting::poisson: w[static_cast<Eigen::Index>(i)] = 1.0 / v; break;
        case FitWeighting::relative: w[static_cast<Eigen::Index>(i)] = 1.0 / (v * v); break;
        }
    }
    return w;
}

/// Ordinary least squares y = a + b x; returns {a, b}.
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b = sxx > 0.0 ? sxy / sxx : 0.0;
    return {my - b * mx, b};
}

/// log-linear fit of y = A exp(-t/tau); tau is capped when the data do not decay.
std::pair<double, double> log_linear(const std::vector<double>& t, const std::vector<double>& y)
{
    std::vector<double> ly(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
    const auto [a, b] = line_fit(t, ly);
    const double tau = b < 0.0 ? std::min(-1.0 / b, std::exp(kLogTauMax)) : std::exp(kLogTauMax);
    return {std::exp(a), tau};
}

void check_series(const std::vector<double>& t, const std::vector<double>& y, std::size_t min_points,
                  const char* what)
{
    if (t.size() != y.size()) throw ConfigError(std::string(what) + ": time and value columns differ in length");
    if (t.size() < min_points) {
        throw ConfigError(std::string(what) + " needs at least " + std::to_string(min_points) + " points, got " +
                          std::to_string(t.size()));
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(y[i])) throw ConfigError(std::string(what) + ": non-finite input");
        if (i > 0 && !(t[i] > t[i - 1])) throw ConfigError(std::string(what) + ": times must be strictly increasing");
    }
}

}  // namespace

const FitParameter& FitResult::parameter(std::string_view name) const
{
    for (const auto& p : parameters) {
        if (p.name == name) return p;
    }
    throw ConfigError("fit result has no parameter '" + std::string(name) + "'");
}

FitWeighting parse_weighting(std::string_view name)
{
    if (name == "none") return FitWeighting::none;
    if (name == "poisson") return FitWeighting::poisson;
    if (name == "relative") return FitWeighting::relative;
    throw ConfigError("unknown weighting '" + std::string(name) + "'; expected none, poisson or relative");
}

FitResult fit_biexponential(const std::vector<double>& t, const std::vector<double>& N, const FitOptions& options)
{
    check_series(t, N, 6, "bi-exponential fit");
    for (double v : N) {
        if (!(v > 0.0)) throw ConfigError("bi-exponential fit needs N > 0");
    }
    const std::size_t n = t.size();

    // Slow component from the last third, fast one from what remains early on.
    const std::size_t tail = n - n / 3;
    const auto [A2, tau2] = log_linear({t.begin() + static_cast<long>(tail), t.end()},
                                       {N.begin() + static_cast<long>(tail), N.end()});
    std::vector<double> te;
    std::vector<double> re;
    for (std::size_t i = 0; i < tail; ++i) {
        // Only the leading run of positive remainders carries the fast component.
        const double rem = N[i] - A2 * std::exp(-t[i] / tau2);
        if (!(rem > 0.0)) break;
        te.push_back(t[i]);
        re.push_back(rem);
    }
    double A1 = 1e-6 * A2;
    double tau1 = tau2 / 10.0;
    if (te.size() >= 2) {
        std::tie(A1, tau1) = log_linear(te, re);
        if (!(tau1 < tau2)) tau1 = tau2 / 10.0;
    }

    const Eigen::Index m = static_cast<Eigen::Index>(n);
    VectorXd y(m);
    VectorXd tt(m);
    for (std::size_t i = 0; i < n; ++i) {
        y[static_cast<Eigen::Index>(i)] = N[i];
        tt[static_cast<Eigen::Index>(i)] = t[i];
    }
    const ModelFn model = [&](const VectorXd& p, VectorXd& f, MatrixXd& J) {
        const double r1 = std::exp(-p[1]);
        const double r2 = std::exp(-p[3]);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double e1 = std::exp(-tt[i] * r1);
            const double e2 = std::exp(-tt[i] * r2);
            f[i] = p[0] * e1 + p[2] * e2;
            J(i, 0) = e1;
            J(i, 1) = p[0] * e1 * tt[i] * r1;
            J(i, 2) = e2;
            J(i, 3) = p[2] * e2 * tt[i] * r2;
        }
    };
    const auto clamp = [](VectorXd& p) {
        p[1] = std::clamp(p[1], kLogTauMin, kLogTauMax);
        p[3] = std::clamp(p[3], kLogTauMin, kLogTauMax);
    };
    VectorXd p0(4);
    p0 << A1, std::log(tau1), A2, std::log(tau2);
    clamp(p0);
    const LmOutcome o = levenberg_marquardt(model, p0, y, make_weights(N, options.weighting), options, clamp);

    MatrixXd C = covariance(o, m);
    VectorXd p = o.p;
    if (p[1] > p[3]) {
        std::swap(p[0], p[2]);
        std::swap(p[1], p[3]);
        Eigen::PermutationMatrix<4> perm;
        perm.indices() << 2, 3, 0, 1;
        C = perm * C * perm.transpose();
    }
    // Back from log(tau) to tau.
    VectorXd D(4);
    D << 1.0, std::exp(p[1]), 1.0, std::exp(p[3]);
    C = D.asDiagonal() * C * D.asDiagonal();

    FitResult r;
    r.model = "biexponential";
    const char* names[4] = {"A1", "tau1", "A2", "tau2"};
    const double values[4] = {p[0], std::exp(p[1]), p[2], std::exp(p[3])};
    for (int i = 0; i < 4; ++i) r.parameters.push_back({names[i], values[i], std::sqrt(std::max(C(i, i), 0.0))});
    r.sse = o.sse;
    r.covariance = C;
    r.converged = o.converged;
    r.iterations = o.iterations;
    if (values[3] / values[1] < 1.5 || values[3] >= 1e6) {
        r.warnings.push_back("time constants are degenerate (tau2/tau1 < 1.5 or tau2 >= 1e6 s)");
    }
    if (!r.converged) {
        throw FitError("bi-exponential fit did not converge in " + std::to_string(options.max_iterations) +
                           " iterations",
                       r);
    }
    return r;
}

FitResult fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y, const FitOptions& options)
{
    check_series(t, y, 4, "exponential-decay fit");
    const std::size_t n = t.size();
    const double span = t.back() - t.front();

    // Scan tau on a log grid; for each, y_inf and a follow by linear least squares.
    double best_sse = std::numeric_limits<double>::infinity();
    double best[3] = {0.0, 0.0, span};
    for (int k = 0; k <= 200; ++k) {
        const double tau = span * std::pow(10.0, -3.0 + 5.0 * k / 200.0);
        double s1 = 0.0, se = 0.0, see = 0.0, sy = 0.0, sey = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(-(t[i] - t.front()) / tau);
            s1 += 1.0;
            se += e;
            see += e * e;
            sy += y[i];
            sey += e * y[i];
        }
        const double det = s1 * see - se * se;
        if (!(std::abs(det) > 1e-14 * s1 * see)) continue;
        const double yinf = (see * sy - se * sey) / det;
        const double a0 = (s1 * sey - se * sy) / det;
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double res = y[i] - yinf - a0 * std::exp(-(t[i] - t.front()) / tau);
            sse += res * res;
        }
        if (sse < best_sse) {
            best_sse = sse;
            best[0] = yinf;
            best[1] = a0 * std::exp(t.front() / tau);
            best[2] = tau;
        }
    }

    const Eigen::Index m = static_cast<Eigen::Index>(n);
    VectorXd yy(m);
    VectorXd tt(m);
    for (std::size_t i = 0; i < n; ++i) {
        yy[static_cast<Eigen::Index>(i)] = y[i];
        tt[static_cast<Eigen::Index>(i)] = t[i];
    }
    const ModelFn model = [&](const VectorXd& p, VectorXd& f, MatrixXd& J) {
        const double rate = std::exp(-p[2]);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double e = std::exp(-tt[i] * rate);
            f[i] = p[0] + p[1] * e;
            J(i, 0) = 1.0;
            J(i, 1) = e;
            J(i, 2) = p[1] * e * tt[i] * rate;
        }
    };
    const auto clamp = [](VectorXd& p) { p[2] = std::clamp(p[2], kLogTauMin, kLogTauMax); };
    VectorXd p0(3);
    p0 << best[0], best[1], std::log(best[2]);
    clamp(p0);
    const LmOutcome o = levenberg_marquardt(model, p0, yy, make_weights(y, options.weighting), options, clamp);

    MatrixXd C = covariance(o, m);
    VectorXd D(3);
    D << 1.0, 1.0, std::exp(o.p[2]);
    C = D.asDiagonal() * C * D.asDiagonal();

    FitResult r;
    r.model = "exponential_decay";
    const char* names[3] = {"y_inf", "a", "tau"};
    const double values[3] = {o.p[0], o.p[1], std::exp(o.p[2])};
    for (int i = 0; i < 3; ++i) r.parameters.push_back({names[i], values[i], std::sqrt(std::max(C(i, i), 0.0))});
    r.sse = o.sse;
    r.covariance = C;
    r.converged = o.converged;
    r.iterations = o.iterations;
    if (!r.converged) {
        throw FitError("exponential-decay fit did not converge in " + std::to_string(options.max_iterations) +
                           " iterations",
                       r);
    }
    return r;
}

FitResult fit_tof(const std::vector<double>& t, const std::vector<double>& widths, double mass)
{
    if (t.size() != widths.size()) throw ConfigError("TOF fit: time and width columns differ in length");
    if (t.size() < 3) throw ConfigError("TOF fit needs at least 3 points, got " + std::to_string(t.size()));
    if (!(mass > 0.0)) throw ConfigError("TOF fit needs a positive mass");
    std::vector<double> x(t.size());
    std::vector<double> y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] >= 0.0) || !(widths[i] >= 0.0) || !std::isfinite(t[i]) || !std::isfinite(widths[i])) {
            throw ConfigError("TOF fit needs finite, non-negative times and widths");
        }
        x[i] = t[i] * t[i];
        y[i] = widths[i] * widths[i];
    }
    const auto [a, b] = line_fit(x, y);

    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    for (double v : x) mx += v;
    mx /= n;
    double sxx = 0.0;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        const double res = y[i] - a - b * x[i];
        sse += res * res;
    }
    if (!(sxx > 0.0)) throw ConfigError("TOF fit needs at least two distinct flight times");
    const double s2 = x.size() > 2 ? sse / (n - 2.0) : 0.0;
    const double var_b = s2 / sxx;
    const double var_a = s2 * (1.0 / n + mx * mx / sxx);
    const double cov_ab = -s2 * mx / sxx;

    FitResult r;
    r.model = "tof";
    r.sse = sse;
    r.converged = true;
    r.iterations = 1;
    const double k = mass / constants::boltzmann;
    double T = b * k;
    if (T < 0.0) {
        T = 0.0;
        r.warnings.push_back("negative expansion slope; temperature clamped to 0");
    }
    double sigma0 = 0.0;
    if (a > 0.0) {
        sigma0 = std::sqrt(a);
    } else {
        r.warnings.push_back("non-positive intercept; initial width clamped to 0");
    }
    // d sigma0 / d a = 1 / (2 sigma0), dT/db = m / kB.
    const double ja = sigma0 > 0.0 ? 0.5 / sigma0 : 0.0;
    r.covariance = MatrixXd(2, 2);
    r.covariance << ja * ja * var_a, ja * k * cov_ab, ja * k * cov_ab, k * k * var_b;
    r.parameters.push_back({"sigma0", sigma0, std::sqrt(std::max(r.covariance(0, 0), 0.0))});
    r.parameters.push_back({"temperature", T, std::sqrt(std::max(r.covariance(1, 1), 0.0))});
    return r;
}

double gas_mass(std::string_view name)
{
    constexpr double amu = 1.66053906660e-27;
    if (name == "He" || name == "He4" || name == "helium") return constants::helium4_mass;
    if (name == "H2") return 2.016 * amu;
    if (name == "Ne") return 20.180 * amu;
    if (name == "N2") return 28.014 * amu;
    if (name == "Ar") return 39.948 * amu;
    throw ConfigError("unknown gas '" + std::string(name) + "'; expected He, H2, Ne, N2 or Ar");
}

double mean_speed(double temperature, double mass)
{
    return std::sqrt(8.0 * constants::boltzmann * temperature / (constants::pi * mass));
}

PressureResult infer_pressure(const PressureQuery& q)
{
    if (!(q.lifetime > 0.0) || !(q.cross_section > 0.0) || !(q.gas_temperature > 0.0) || !(q.gas_mass > 0.0)) {
        throw ConfigError("pressure query needs positive lifetime, cross-section, temperature and mass");
    }
    PressureResult r;
    r.mean_speed = mean_speed(q.gas_temperature, q.gas_mass);
    r.pascal = constants::boltzmann * q.gas_temperature / (q.lifetime * q.cross_section * r.mean_speed);
    r.mbar = r.pascal / 100.0;
    return r;
}

double infer_lifetime(double pressure, double cross_section, double gas_temperature, double gas_mass)
{
    if (!(pressure > 0.0) || !(cross_section > 0.0) || !(gas_temperature > 0.0) || !(gas_mass > 0.0)) {
        throw ConfigError("lifetime query needs positive pressure, cross-section, temperature and mass");
    }
    return constants::boltzmann * gas_temperature /
           (pressure * cross_section * mean_speed(gas_temperature, gas_mass));
}

double default_background_lifetime() { return infer_lifetime(3e-11 * 100.0); }

}  // namespace atomchip
