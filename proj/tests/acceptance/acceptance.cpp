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

// Acceptance checks. Prints one PASS/FAIL line per criterion and a summary.
// Exit status is 0 once every criterion has been evaluated; `--strict` makes any
// FAIL an error as well. Criterion numbers on the command line select a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "atomchip/analysis.hpp"
#include "atomchip/cli.hpp"
#include "atomchip/ensemble.hpp"
#include "atomchip/fieldsolver.hpp"
#include "atomchip/sequence.hpp"
#include "atomchip/trapanalysis.hpp"

using namespace atomchip;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMu0 = 4e-7 * kPi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double max_abs(const Eigen::Matrix3d& m) { return m.cwiseAbs().maxCoeff(); }

ChipAssembly straight_wire(double length, double current)
{
    ChipAssembly chip;
    chip.conductors.push_back({{Vec3(-0.5 * length, 0, 0), Vec3(0.5 * length, 0, 0)}, current, "wire", 0.0});
    return chip;
}

Outcome field_solver()
{
    // Infinite-wire limit at d/L = 5e-4.
    const double L = 1.0;
    const double d = 5e-4 * L;
    const double B_wire = total_field(straight_wire(L, 1.0), Vec3(0, d, 0)).norm();
    const double wire_err = std::abs(B_wire - kMu0 / (2 * kPi * d)) / (kMu0 / (2 * kPi * d));

    ChipAssembly loop;
    RectangularCoil c;
    c.length_u = 0.01;
    c.length_v = 0.01;
    c.current = 1.0;
    c.center = Vec3(0, -1e-3, 0);
    loop.coils.push_back(c);
    const double B_loop = total_field(loop, c.center).norm();
    const double loop_exact = 2.0 * std::sqrt(2.0) * kMu0 / (kPi * 0.01);
    const double loop_err = std::abs(B_loop - loop_exact) / loop_exact;

    // Divergence on the full chip. Curl only vanishes for closed circuits; the Z and U
    // wires end in open leads, so the curl check uses the coil.
    ChipParameters all;
    all.U_current = 1.8;
    all.Q_current = 1.0;
    ChipParameters closed;
    closed.Z_current = 0.0;
    closed.Q_current = 1.0;
    const FieldSource full(build_chip(all));
    const FieldSource coil(build_chip(closed));
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(-3e-3, 3e-3), uy(100e-6, 3e-3);
    double div_worst = 0.0, curl_worst = 0.0, open_curl_worst = 0.0;
    for (int n = 0; n < 100;) {
        const Vec3 p(ux(rng), uy(rng), ux(rng));
        if (full.magnitude(p) < 1e-5) continue;
        const Eigen::Matrix3d J = field_jacobian(full, p);
        const Eigen::Matrix3d K = field_jacobian(coil, p);
        div_worst = std::max(div_worst, std::abs(J.trace()) / max_abs(J));
        div_worst = std::max(div_worst, std::abs(K.trace()) / max_abs(K));
        const Eigen::Matrix3d A = K - K.transpose();
        curl_worst = std::max(curl_worst, max_abs(A) / max_abs(K));
        open_curl_worst = std::max(open_curl_worst, max_abs(J - J.transpose()) / max_abs(J));
        ++n;
    }
    Outcome o;
    o.pass = wire_err < 1e-6 && loop_err < 1e-9 && div_worst < 1e-6 && curl_worst < 1e-6;
    o.detail = fmt("wire %.2e, loop %.2e, div %.2e, curl(closed) %.2e", wire_err, loop_err, div_worst, curl_worst) +
               fmt("; open-lead curl %.1e (expected nonzero)", open_curl_worst);
    return o;
}

Outcome trap_distance()
{
    const ChipParameters p;
    const TrapReport r = characterize(build_chip(p), SpinState{}, kDefaultSeed);
    const double um = r.distance_to_chip * 1e6;
    bool monotone = true;
    double previous = 1.0;
    std::string sweep;
    for (double s : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        ChipParameters q = p;
        q.Bz *= s;
        const double y = characterize(build_chip(q), SpinState{}, kDefaultSeed).distance_to_chip;
        monotone = monotone && y < previous;
        previous = y;
        sweep += fmt(" %.0f", y * 1e6);
    }
    Outcome o;
    o.pass = std::abs(um - 440.0) <= 0.15 * 440.0 && monotone;
    o.detail = fmt("distance %.1f um; Bz x0.8..1.2:", um) + sweep + " um";
    return o;
}

Outcome compression()
{
    const SequenceSpec seq = default_sequence();
    std::size_t ci = 0;
    while (seq.stages[ci].name != "compression") ++ci;
    const double t0 = seq.stage_start(ci);
    const double t1 = t0 + seq.stages[ci].duration;
    std::vector<double> times;
    for (int k = 0; k <= 10; ++k) times.push_back(t0 + (t1 - t0) * k / 10.0);
    // The last sample sits a hair inside the stage so the next stage's steps do not apply.
    times.back() = t1 - 1e-9;
    const auto snaps = snapshots(seq, ChipParameters{}, times);
    bool monotone = true;
    for (std::size_t k = 1; k < snaps.size(); ++k) {
        monotone = monotone && snaps[k].distance_to_chip() < snaps[k - 1].distance_to_chip();
    }
    const double g0 = snaps.front().quadrupole->gradient_norm;
    const double g1 = snaps.back().quadrupole->gradient_norm;
    Outcome o;
    o.pass = g1 / g0 >= 20.0 && monotone;
    o.detail = fmt("gradient %.2f -> %.1f G/cm, ratio %.1f; distance %.0f", g0 * 100, g1 * 100, g1 / g0,
                   snaps.front().distance_to_chip() * 1e6) +
               fmt(" -> %.0f um, monotone ", snaps.back().distance_to_chip() * 1e6) + (monotone ? "yes" : "no");
    return o;
}

Outcome anisotropy()
{
    const TrapReport r = characterize(build_chip(ChipParameters{}), SpinState{}, kDefaultSeed);
    Outcome o;
    o.pass = r.anisotropy() >= 5.0;
    o.detail = fmt("f = %.2f / %.1f / %.1f Hz, ratio %.2f", r.frequencies[0], r.frequencies[1], r.frequencies[2],
                   r.anisotropy());
    return o;
}

SimResult hold_run(double Bx, std::size_t N, const std::vector<double>& holds, double tau_bg,
                   std::uint64_t seed)
{
    ChipParameters p;
    p.Bx = Bx;
    const ChipAssembly chip = build_chip(p);
    const TrapReport trap = characterize(chip, SpinState{}, kDefaultSeed);
    CloudSpec cloud = CloudSpec::magnetic_trap(trap.position);
    cloud.N = N;
    cloud.temperature = 40e-6;
    LossConfig losses;
    losses.background_lifetime = tau_bg;
    const FieldSchedule schedule = FieldSchedule::constant(chip);
    const double dt = suggested_dt(schedule, 0.0, trap.position);
    return decay_curve(schedule, cloud, holds, losses, seed, dt);
}

Outcome majorana()
{
    const std::vector<double> holds{10.0};
    const SimResult off = hold_run(0.0, 5000, holds, 115.0, 7);
    const SimResult on = hold_run(2.75e-4, 5000, holds, 115.0, 7);
    const double f0 = static_cast<double>(off.records.back().spin_flip);
    const double f1 = static_cast<double>(on.records.back().spin_flip);
    bool b0_increasing = true;
    double previous = -1.0;
    for (double g : {0.0, 0.5, 1.0, 2.0, 2.75, 4.0, 5.0}) {
        ChipParameters p;
        p.Bx = g * 1e-4;
        const double b0 = characterize(build_chip(p), SpinState{}, kDefaultSeed).B0;
        b0_increasing = b0_increasing && b0 > previous;
        previous = b0;
    }
    Outcome o;
    o.pass = f0 >= 5.0 * std::max(f1, 1.0) && f0 > 0.0 && b0_increasing;
    o.detail = fmt("spin flips Bx=0: %.0f, Bx=2.75G: %.0f; B0 increasing ", f0, f1) + (b0_increasing ? "yes" : "no");
    return o;
}

Outcome pressure()
{
    PressureQuery q;
    q.lifetime = 115.0;
    q.cross_section = 100e-20;
    q.gas_temperature = 4.2;
    q.gas_mass = gas_mass("He");
    const PressureResult r = infer_pressure(q);
    const double back = infer_lifetime(r.pascal, q.cross_section, q.gas_temperature, q.gas_mass);
    const double rt = std::abs(back - q.lifetime) / q.lifetime;
    Outcome o;
    o.pass = r.mbar >= 2e-11 && r.mbar <= 4.5e-11 && rt <= 1e-12;
    o.detail = fmt("P = %.3e mbar, round trip %.1e", r.mbar, rt);
    return o;
}

Outcome fit_recovery()
{
    int within = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 0.02);
        std::vector<double> t, y;
        for (int i = 0; i < 40; ++i) {
            const double s = 60.0 * i / 39.0;
            t.push_back(s);
            y.push_back((0.75 * std::exp(-s / 5.7) + 0.25 * std::exp(-s / 115.0)) * (1.0 + noise(rng)));
        }
        FitOptions fo;
        fo.weighting = FitWeighting::relative;
        try {
            const FitResult r = fit_biexponential(t, y, fo);
            const double e = std::max(std::abs(r.value("tau1") / 5.7 - 1), std::abs(r.value("tau2") / 115.0 - 1));
            worst = std::max(worst, e);
            within += e < 0.10;
        } catch (const FitError&) {
            worst = 1.0;
        }
    }

    // TOF thermometry on a sampled 40 uK cloud.
    CloudSpec cloud = CloudSpec::magnetic_trap(Vec3(0, 440e-6, 0));
    cloud.N = 5000;
    cloud.temperature = 40e-6;
    const auto atoms = sample_cloud(cloud, 11);
    std::vector<double> times, widths;
    for (int k = 0; k <= 5; ++k) {
        const double t = 2e-3 * k;
        times.push_back(t);
        widths.push_back(time_of_flight(atoms, t).widths.y());
    }
    const double T = fit_tof(times, widths).value("temperature");
    Outcome o;
    o.pass = within == 20 && std::abs(T / 40e-6 - 1.0) < 0.05;
    o.detail = fmt("biexp %.0f/20 within 10%% (worst %.1f%%); TOF T = %.2f uK", within, worst * 100, T * 1e6);
    return o;
}

Outcome decay_morphology()
{
    std::vector<double> holds;
    for (double t : {0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.5, 15.0, 17.5,
                     20.0}) {
        holds.push_back(t);
    }
    const SimResult r = hold_run(2.75e-4, 5000, holds, 115.0, 3);
    std::vector<double> t, n;
    for (const auto& rec : r.records) {
        t.push_back(rec.t);
        n.push_back(static_cast<double>(rec.alive));
    }
    // Hold times are rounded to whole steps, so look records up by nearest time.
    auto nearest = [&](double when) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (std::abs(t[i] - when) < std::abs(t[best] - when)) best = i;
        }
        return best;
    };
    for (const auto& rec : r.records) {
        std::fprintf(stderr, "  t=%.3f alive=%zu surface=%zu spinflip=%zu background=%zu untrapped=%zu T=%.2fuK\n", rec.t,
                     rec.alive, rec.surface, rec.spin_flip, rec.background, rec.untrapped, rec.temperature * 1e6);
    }
    const double T0 = r.records[nearest(0.0)].temperature;
    const double T10 = r.records[nearest(10.0)].temperature;
    // Fast-then-slow: the log-slope over the first second exceeds the one over the last ten.
    auto log_slope = [&](double a, double b) {
        const std::size_t ia = nearest(a);
        const std::size_t ib = nearest(b);
        return -(std::log(n[ib]) - std::log(n[ia])) / (t[ib] - t[ia]);
    };
    const double early = log_slope(0.0, 1.0);
    const double late = log_slope(10.0, 20.0);
    FitOptions fo;
    fo.weighting = FitWeighting::poisson;
    double tau2 = 0.0;
    std::string fit_note;
    try {
        tau2 = fit_biexponential(t, n, fo).value("tau2");
    } catch (const FitError& e) {
        tau2 = e.best().value("tau2");
        fit_note = " (fit did not converge)";
    }
    Outcome o;
    o.pass = early > late && std::abs(tau2 / 115.0 - 1.0) <= 0.20 && T10 < T0;
    o.detail = fmt("N %.0f -> %.0f; rate 0-1 s %.3f/s, 10-20 s %.4f/s", n.front(), n.back(), early, late) +
               fmt("; slow tau %.1f s (10-20 s e-fold %.0f s); T %.1f -> %.1f uK", tau2, 1.0 / late, T0 * 1e6, T10 * 1e6) +
               fit_note;
    return o;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism()
{
    const fs::path base = fs::temp_directory_path() / "atomchip_acceptance_determinism";
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path seq = base / "default.seq";
    {
        std::ofstream os(seq);
        write_sequence(os, default_sequence());
    }
    bool same = true;
    int files = 0;
    const std::vector<std::vector<std::string>> commands{
        {"simulate", "decay", "--N", "300", "--t-end", "0.5", "--points", "5", "--plots"},
        {"simulate", "tof", "--N", "300", "--hold", "0.2", "--times", "0,2ms,4ms", "--plots"},
        {"simulate", "decay", "--N", "200", "--cloud", "mot", "--t-end", "0.1", "--points", "3", "--sequence-default"},
    };
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::vector<fs::path> dirs;
        for (const char* workers : {"1", "3"}) {
            const fs::path dir = base / (std::to_string(c) + "_" + workers);
            fs::create_directories(dir);
            std::vector<std::string> args{"atomchip", "--seed", "42", "--workers", workers, "--out", dir.string()};
            for (const auto& a : commands[c]) {
                if (a == "--sequence-default") {
                    args.insert(args.begin() + 1, {"--sequence", seq.string()});
                } else {
                    args.push_back(a);
                }
            }
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            if (run_cli(static_cast<int>(argv.size()), argv.data(), out, err) != 0) {
                same = false;
                std::fprintf(stderr, "command %zu failed: %s\n", c, err.str().c_str());
            }
            std::ofstream(dir / "stdout.txt") << out.str();
            dirs.push_back(dir);
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const fs::path other = dirs[1] / entry.path().filename();
            ++files;
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
                same = false;
                std::fprintf(stderr, "differs: %s\n", entry.path().filename().string().c_str());
            }
        }
    }
    Outcome o;
    o.pass = same && files > 0;
    o.detail = fmt("%.0f output files compared across 1 and 3 workers", files);
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    bool strict = false;
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--strict") == 0) {
            strict = true;
        } else {
            only.push_back(std::atoi(argv[i]));
        }
    }
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "field solver exactness", field_solver},
        {2, "trap distance", trap_distance},
        {3, "compression", compression},
        {4, "Ioffe anisotropy", anisotropy},
        {5, "Majorana proxy", majorana},
        {6, "pressure inference", pressure},
        {7, "fit recovery", fit_recovery},
        {8, "decay morphology", decay_morphology},
        {9, "determinism", determinism},
    };
    int failed = 0;
    int evaluated = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        ++evaluated;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("[%s] %2d %s: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("[N/A ] 10 absolute atom numbers and measured fast lifetime: excluded, not reproducible here\n");
    std::printf("%d of %d criteria passed\n", evaluated - failed, evaluated);
    return strict && failed > 0 ? 1 : 0;
}
