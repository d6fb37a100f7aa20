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

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "atomchip/constants.hpp"
#include "atomchip/errors.hpp"

namespace atomchip {

struct FitParameter {
    std::string name;
    double value = 0.0;
    double uncertainty = 0.0;
};

struct FitResult {
    std::string model;
    std::vector<FitParameter> parameters;
    double sse = 0.0;
    Eigen::MatrixXd covariance;
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> warnings;

    /// Throws ConfigError for an unknown name.
    const FitParameter& parameter(std::string_view name) const;
    double value(std::string_view name) const { return parameter(name).value; }
    double uncertainty(std::string_view name) const { return parameter(name).uncertainty; }
};

/// Thrown when a fit does not converge; carries the best parameters reached.
class FitError : public Error {
public:
    FitError(const std::string& what, FitResult best) : Error(what), best_(std::move(best)) {}
    const FitResult& best() const noexcept { return best_; }

private:
    FitResult best_;
};

enum class FitWeighting {
    none,
    /// w = 1/N, counting statistics.
    poisson,
    /// w = 1/N^2, multiplicative noise.
    relative,
};

FitWeighting parse_weighting(std::string_view name);

struct FitOptions {
    FitWeighting weighting = FitWeighting::none;
    int max_iterations = 500;
    double relative_tolerance = 1e-10;
};

/// N(t) = A1 exp(-t/tau1) + A2 exp(-t/tau2), tau1 < tau2. Parameters A1, tau1, A2, tau2.
FitResult fit_biexponential(const std::vector<double>& t, const std::vector<double>& N, const FitOptions& options = {});

/// y(t) = y_inf + a exp(-t/tau). Parameters y_inf, a, tau.
FitResult fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y,
                                const FitOptions& options = {});

/// sigma(t)^2 = sigma0^2 + (kB T / m) t^2 by linear least squares on (t^2, sigma^2).
/// Parameters sigma0 (m) and temperature (K).
FitResult fit_tof(const std::vector<double>& t, const std::vector<double>& widths,
                  double mass = constants::rb87_mass);

/// Mass of a background gas species by name ("He", "H2", "Ne", "N2", "Ar").
double gas_mass(std::string_view name);

struct PressureQuery {
    double lifetime = 0.0;
    double cross_section = 1e-18;
    double gas_temperature = 4.2;
    double gas_mass = constants::helium4_mass;
};

struct PressureResult {
    double pascal = 0.0;
    double mbar = 0.0;
    double mean_speed = 0.0;
};

/// sqrt(8 kB T / (pi m)).
double mean_speed(double temperature, double mass);
/// P = kB T / (tau sigma vbar).
PressureResult infer_pressure(const PressureQuery& q);
/// Exact inverse of infer_pressure. Pressure in Pa.
double infer_lifetime(double pressure, double cross_section = 1e-18, double gas_temperature = 4.2,
                      double gas_mass = constants::helium4_mass);

/// Background-gas lifetime at 3e-11 mbar of 4.2 K helium, 100 square angstrom.
double default_background_lifetime();

}  // namespace atomchip
