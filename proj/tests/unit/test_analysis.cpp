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

#include <doctest.h>

#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "atomchip/analysis.hpp"
#include "oracles.hpp"

using namespace atomchip;

namespace {

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
    return out;
}

}  // namespace

TEST_CASE("bi-exponential fit on noiseless data")
{
    const oracle::Biexp model;
    const auto t = linspace(0.0, 60.0, 40);
    std::vector<double> y;
    for (double ti : t) y.push_back(model(ti));
    const FitResult r = fit_biexponential(t, y);
    CHECK(r.converged);
    CHECK(r.value("tau1") == doctest::Approx(5.7).epsilon(1e-6));
    CHECK(r.value("tau2") == doctest::Approx(115.0).epsilon(1e-6));
    CHECK(r.value("A1") == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(r.value("A2") == doctest::Approx(0.25).epsilon(1e-6));
    const double sst = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
    CHECK(r.sse / sst < 1e-8);
    CHECK(r.warnings.empty());
}

TEST_CASE("bi-exponential fit with 2% multiplicative noise")
{
    const auto t = linspace(0.0, 60.0, 40);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::vector<double> tt, y;
        oracle::synthesize(oracle::Biexp{}, 40, 60.0, 0.02, seed, tt, y);
        FitOptions o;
        o.weighting = FitWeighting::relative;
        const FitResult r = fit_biexponential(tt, y, o);
        CHECK(r.value("tau1") == doctest::Approx(5.7).epsilon(0.1));
        CHECK(r.value("tau1") < r.value("tau2"));
        for (const auto& p : r.parameters) CHECK(p.uncertainty >= 0.0);
        const Eigen::MatrixXd C = r.covariance;
        CHECK((C - C.transpose()).norm() <= 1e-12 * C.norm());
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C).eigenvalues().minCoeff() >= -1e-12 * C.norm());
    }
}

TEST_CASE("bi-exponential degenerate limits")
{
    const auto t = linspace(0.0, 60.0, 40);
    SUBCASE("single exponential")
    {
        std::vector<double> y;
        for (double ti : t) y.push_back(2.0 * std::exp(-ti / 20.0));
        const FitResult r = fit_biexponential(t, y);
        const double a1 = r.value("A1");
        const double a2 = r.value("A2");
        const double small = std::min(std::abs(a1), std::abs(a2));
        CHECK(small < 1e-3 * 2.0);
        const double tau = std::abs(a1) > std::abs(a2) ? r.value("tau1") : r.value("tau2");
        CHECK(tau == doctest::Approx(20.0).epsilon(0.01));
    }
    SUBCASE("constant data")
    {
        const std::vector<double> y(t.size(), 1000.0);
        const FitResult r = fit_biexponential(t, y);
        CHECK(r.value("tau2") >= 1e6);
        CHECK_FALSE(r.warnings.empty());
    }
}

TEST_CASE("fitted time constants are invariant under rescaling of y")
{
    std::vector<double> t, y;
    oracle::synthesize(oracle::Biexp{}, 40, 60.0, 0.02, 3, t, y);
    const FitResult a = fit_biexponential(t, y);
    std::vector<double> y2 = y;
    for (double& v : y2) v *= 8.2e5;
    const FitResult b = fit_biexponential(t, y2);
    CHECK(b.value("tau1") == doctest::Approx(a.value("tau1")).epsilon(1e-9));
    CHECK(b.value("tau2") == doctest::Approx(a.value("tau2")).epsilon(1e-9));
    CHECK(b.value("A1") == doctest::Approx(8.2e5 * a.value("A1")).epsilon(1e-9));

    std::vector<double> ty, yy;
    oracle::synthesize([](double s) { return 20e-6 + 20e-6 * std::exp(-s / 3.2); }, 40, 20.0, 0.02, 4, ty, yy);
    const FitResult c = fit_exponential_decay(ty, yy);
    for (double& v : yy) v *= 1e6;
    const FitResult d = fit_exponential_decay(ty, yy);
    CHECK(d.value("tau") == doctest::Approx(c.value("tau")).epsilon(1e-9));
}

TEST_CASE("bi-exponential input checks")
{
    CHECK_THROWS_AS(fit_biexponential({0, 1, 2, 3, 4}, {5, 4, 3, 2, 1}), ConfigError);
    CHECK_THROWS_AS(fit_biexponential({0, 1, 2, 2, 4, 5}, {6, 5, 4, 3, 2, 1}), ConfigError);
    CHECK_THROWS_AS(fit_biexponential({0, 1, 2, 3, 4, 5}, {6, 5, 4, 0, 2, 1}), ConfigError);
    const auto t = linspace(0.0, 60.0, 40);
    std::vector<double> y;
    for (double ti : t) y.push_back(oracle::Biexp{}(ti));
    FitOptions o;
    o.max_iterations = 1;
    try {
        fit_biexponential(t, y, o);
        FAIL("expected FitError");
    } catch (const FitError& e) {
        CHECK(e.best().parameters.size() == 4);
        CHECK_FALSE(e.best().converged);
    }
}

TEST_CASE("TOF thermometry")
{
    const double sigma0 = 100e-6;
    const double T = 40e-6;
    const auto t = linspace(0.0, 10e-3, 6);
    std::vector<double> w;
    for (double ti : t) w.push_back(oracle::tof_width(sigma0, T, oracle::m_rb, ti));
    const FitResult r = fit_tof(t, w);
    CHECK(r.value("temperature") == doctest::Approx(T).epsilon(1e-9));
    CHECK(r.value("sigma0") == doctest::Approx(sigma0).epsilon(1e-9));
    CHECK(oracle::tof_width(sigma0, T, oracle::m_rb, 10e-3) == doctest::Approx(627e-6).epsilon(2e-3));

    const FitResult flat = fit_tof(t, std::vector<double>(t.size(), 200e-6));
    CHECK(flat.value("temperature") == doctest::Approx(0.0).epsilon(1e-12));

    std::vector<double> shrinking;
    for (double ti : t) shrinking.push_back(300e-6 - 0.01 * ti);
    const FitResult neg = fit_tof(t, shrinking);
    CHECK(neg.value("temperature") == 0.0);
    CHECK_FALSE(neg.warnings.empty());
    CHECK_THROWS_AS(fit_tof({0.0, 1e-3}, {1e-4, 1e-4}), ConfigError);
}

TEST_CASE("temperature decay fit")
{
    const auto model = [](double s) { return 20e-6 + 20e-6 * std::exp(-s / 3.2); };
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::vector<double> t, y;
        oracle::synthesize(model, 40, 20.0, 0.02, seed, t, y);
        const FitResult r = fit_exponential_decay(t, y);
        within += std::abs(r.value("tau") / 3.2 - 1.0) < 0.15;
    }
    CHECK(within == 20);

    const auto t = linspace(0.0, 10.0, 20);
    const FitResult c = fit_exponential_decay(t, std::vector<double>(t.size(), 3.5e-5));
    CHECK(std::abs(c.value("a")) < 1e-12);
    CHECK(c.value("y_inf") == doctest::Approx(3.5e-5).epsilon(1e-9));
}

TEST_CASE("reported uncertainties match the scatter over noise realizations")
{
    const auto model = [](double s) { return 20e-6 + 20e-6 * std::exp(-s / 3.2); };
    std::vector<double> taus;
    double sigma_sum = 0.0;
    for (std::uint64_t seed = 100; seed < 200; ++seed) {
        std::vector<double> t, y;
        oracle::synthesize(model, 40, 20.0, 0.02, seed, t, y);
        const FitResult r = fit_exponential_decay(t, y);
        taus.push_back(r.value("tau"));
        sigma_sum += r.uncertainty("tau");
    }
    const double mean = std::accumulate(taus.begin(), taus.end(), 0.0) / taus.size();
    double var = 0.0;
    for (double v : taus) var += (v - mean) * (v - mean);
    const double scatter = std::sqrt(var / (taus.size() - 1));
    const double reported = sigma_sum / taus.size();
    CHECK(reported / scatter > 0.5);
    CHECK(reported / scatter < 2.0);
}

TEST_CASE("background pressure")
{
    const PressureQuery q{115.0, 1e-18, 4.2, gas_mass("He")};
    const PressureResult p = infer_pressure(q);
    const double vbar = std::sqrt(8 * oracle::kB * 4.2 / (oracle::pi * 6.646e-27));
    CHECK(p.mean_speed == doctest::Approx(vbar).epsilon(1e-12));
    CHECK(p.mean_speed == doctest::Approx(149.0).epsilon(0.005));
    CHECK(p.pascal == doctest::Approx(oracle::kB * 4.2 / (115.0 * 1e-18 * vbar)).epsilon(1e-12));
    CHECK(p.mbar == doctest::Approx(3.4e-11).epsilon(0.01));
    CHECK(p.mbar == doctest::Approx(p.pascal / 100.0).epsilon(1e-15));

    PressureQuery doubled = q;
    doubled.cross_section *= 2;
    CHECK(infer_pressure(doubled).pascal == doctest::Approx(0.5 * p.pascal).epsilon(1e-15));

    PressureQuery forever = q;
    forever.lifetime = 1e300;
    CHECK(infer_pressure(forever).pascal < 1e-300);

    CHECK(infer_lifetime(p.pascal) == doctest::Approx(115.0).epsilon(1e-12));
    CHECK(infer_lifetime(8e-8 * 100.0) == doctest::Approx(49e-3).epsilon(0.02));

    double prev_p = 1e300, prev_tau = 1e300;
    for (double tau = 1.0; tau < 1e4; tau *= 1.7) {
        PressureQuery s = q;
        s.lifetime = tau;
        const double P = infer_pressure(s).pascal;
        CHECK(P < prev_p);
        CHECK(std::abs(infer_lifetime(P) / tau - 1.0) < 1e-12);
        prev_p = P;
    }
    for (double P = 1e-12; P < 1e-3; P *= 3.1) {
        const double tau = infer_lifetime(P);
        CHECK(tau < prev_tau);
        prev_tau = tau;
    }
    CHECK_THROWS_AS(gas_mass("Xe2"), ConfigError);
    CHECK_THROWS_AS(infer_pressure(PressureQuery{}), ConfigError);
    CHECK_THROWS_AS(infer_lifetime(0.0), ConfigError);
}

TEST_CASE("weighting names")
{
    CHECK(parse_weighting("none") == FitWeighting::none);
    CHECK(parse_weighting("poisson") == FitWeighting::poisson);
    CHECK(parse_weighting("relative") == FitWeighting::relative);
    CHECK_THROWS_AS(parse_weighting("magic"), ConfigError);
}
