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

#include "atomchip/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "atomchip/errors.hpp"

namespace atomchip {

namespace {

constexpr std::array<std::string_view, kChannelCount> kNames{"I_Q", "I_U", "I_Z", "B_z", "B_x", "delta", "P"};

std::size_t idx(Channel c) { return static_cast<std::size_t>(c); }

std::string describe_time(double t)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "t=%.9g s", t);
    return buf;
}

double ramp_value(const Ramp& r, double fraction)
{
    if (r.shape == RampShape::step) return r.end;
    return r.start + (r.end - r.start) * fraction;
}

}  // namespace

std::string_view channel_name(Channel c) { return kNames[idx(c)]; }

Channel parse_channel(std::string_view name)
{
    if (name == "δ") return Channel::delta;
    for (Channel c : kAllChannels) {
        if (kNames[idx(c)] == name) return c;
    }
    throw ConfigError("unknown channel '" + std::string(name) + "'");
}

Dimension channel_dimension(Channel c)
{
    switch (c) {
    case Channel::I_Q:
    case Channel::I_U:
    case Channel::I_Z: return Dimension::current;
    case Channel::B_z:
    case Channel::B_x: return Dimension::magnetic_field;
    case Channel::delta: return Dimension::dimensionless;
    case Channel::P: return Dimension::power;
    }
    return Dimension::dimensionless;
}

double SequenceSpec::total_duration() const
{
    double total = 0.0;
    for (const auto& s : stages) total += s.duration;
    return total;
}

double SequenceSpec::stage_start(std::size_t i) const
{
    double t = 0.0;
    for (std::size_t k = 0; k < i && k < stages.size(); ++k) t += stages[k].duration;
    return t;
}

std::size_t SequenceSpec::stage_index(double t) const
{
    if (stages.empty()) throw RangeError("sequence has no stages");
    const double total = total_duration();
    if (!(t >= 0.0 && t <= total)) {
        throw RangeError(describe_time(t) + " is outside the sequence [0, " + std::to_string(total) + "] s");
    }
    double t0 = 0.0;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const double t1 = t0 + stages[i].duration;
        if (t < t1) return i;
        t0 = t1;
    }
    return stages.size() - 1;
}

void SequenceSpec::check() const
{
    if (stages.empty()) throw ConfigError("sequence has no stages");
    auto current = initial;
    for (const auto& s : stages) {
        if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
            throw ConfigError("stage '" + s.name + "' must have a positive duration");
        }
        for (Channel c : kAllChannels) {
            const auto& r = s.ramp(c);
            if (!r) continue;
            if (!std::isfinite(r->start) || !std::isfinite(r->end)) {
                throw ConfigError("stage '" + s.name + "' channel " + std::string(channel_name(c)) +
                                  " has a non-finite value");
            }
            if (r->shape == RampShape::step) {
                if (s.duration > kMaxStepStageDuration) {
                    throw ConfigError("stage '" + s.name + "' channel " + std::string(channel_name(c)) +
                                      ": step ramps need a stage of at most 1 ms");
                }
            } else {
                const double prev = current[idx(c)];
                const double tol = 1e-9 * std::max(std::abs(prev), std::abs(r->start)) + 1e-15;
                if (std::abs(r->start - prev) > tol) {
                    std::ostringstream os;
                    os << "stage '" << s.name << "' channel " << channel_name(c) << " starts at " << r->start
                       << " but the previous value is " << prev;
                    throw ConfigError(os.str());
                }
            }
            current[idx(c)] = r->end;
        }
    }
}

SequenceSpec default_sequence(double Bx, double hold)
{
    constexpr double G = 1e-4;
    constexpr double mW = 1e-3;
    SequenceSpec seq;
    seq.initial[idx(Channel::I_Q)] = 1.77;
    seq.initial[idx(Channel::I_U)] = 0.0;
    seq.initial[idx(Channel::I_Z)] = 0.0;
    seq.initial[idx(Channel::B_z)] = 3.1 * G;
    seq.initial[idx(Channel::B_x)] = 0.0;
    seq.initial[idx(Channel::delta)] = -2.7;
    seq.initial[idx(Channel::P)] = 8.5 * mW;

    Stage loading{"mot_loading", 5.0, {}};

    Stage transfer{"transfer", 20e-3, {}};
    transfer.ramp(Channel::I_Q) = Ramp{1.77, 0.0};
    transfer.ramp(Channel::I_U) = Ramp{0.0, 3.0};
    transfer.ramp(Channel::B_z) = Ramp{3.1 * G, 0.52 * G};

    Stage compression{"compression", 20e-3, {}};
    compression.ramp(Channel::I_U) = Ramp{3.0, 1.8};
    compression.ramp(Channel::B_z) = Ramp{0.52 * G, 6.26 * G};
    compression.ramp(Channel::delta) = Ramp{-2.7, -10.2};
    compression.ramp(Channel::P) = Ramp{8.5 * mW, 6.0 * mW};

    Stage load{"trap_load", 100e-6, {}};
    load.ramp(Channel::P) = Ramp{6.0 * mW, 0.0, RampShape::step};
    load.ramp(Channel::I_U) = Ramp{1.8, 0.0};
    load.ramp(Channel::I_Z) = Ramp{0.0, 1.5};
    load.ramp(Channel::B_x) = Ramp{0.0, Bx, RampShape::step};

    Stage holding{"hold", hold, {}};

    seq.stages = {loading, transfer, compression, load, holding};
    seq.check();
    return seq;
}

double value_at(const SequenceSpec& seq, Channel channel, double t)
{
    const std::size_t k = seq.stage_index(t);
    double v = seq.initial_value(channel);
    double t0 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (const auto& r = seq.stages[i].ramp(channel)) v = r->end;
        t0 += seq.stages[i].duration;
    }
    const Stage& s = seq.stages[k];
    if (const auto& r = s.ramp(channel)) {
        const double fraction = std::clamp((t - t0) / s.duration, 0.0, 1.0);
        return ramp_value(*r, fraction);
    }
    return v;
}

std::array<double, kChannelCount> values_at(const SequenceSpec& seq, double t)
{
    std::array<double, kChannelCount> out{};
    for (Channel c : kAllChannels) out[idx(c)] = value_at(seq, c, t);
    return out;
}

bool lasers_on(const SequenceSpec& seq, double t) { return value_at(seq, Channel::P, t) > 0.0; }

std::vector<Violation> validate(const SequenceSpec& seq, const HardwareLimits& limits)
{
    std::vector<Violation> out;
    auto current = seq.initial;
    double t0 = 0.0;
    for (const Stage& s : seq.stages) {
        // Channel value at a fraction of the stage.
        auto at = [&](Channel c, double fraction) {
            const auto& r = s.ramp(c);
            return r ? ramp_value(*r, fraction) : current[idx(c)];
        };

        std::vector<double> fractions{0.0, 1.0};
        const double p0 = at(Channel::P, 0.0);
        const double p1 = at(Channel::P, 1.0);
        if ((p0 > 0.0) != (p1 > 0.0) && p0 != p1) fractions.push_back(std::clamp(p0 / (p0 - p1), 0.0, 1.0));
        std::sort(fractions.begin(), fractions.end());

        std::vector<std::pair<Channel, double>> reported;
        auto flag = [&](Channel c, double limit, double fraction, double value) {
            for (const auto& [rc, rl] : reported) {
                if (rc == c && rl == limit) return;
            }
            reported.emplace_back(c, limit);
            out.push_back({t0 + fraction * s.duration, c, limit, value, s.name});
        };
        auto check_point = [&](double f, bool lasers) {
            const double iu = at(Channel::I_U, f);
            if (std::abs(iu) > limits.U_max) flag(Channel::I_U, limits.U_max, f, iu);
            const double iz = at(Channel::I_Z, f);
            const double zmax = lasers ? limits.Z_max_lasers_on : limits.Z_max_lasers_off;
            if (std::abs(iz) > zmax) flag(Channel::I_Z, zmax, f, iz);
            const double p = at(Channel::P, f);
            if (p < limits.P_min) flag(Channel::P, limits.P_min, f, p);
            const double d = at(Channel::delta, f);
            if (std::abs(d) > limits.detuning_max) flag(Channel::delta, limits.detuning_max, f, d);
        };
        // Each sub-interval has a fixed laser state; channels are linear inside it,
        // so the extremes sit at its ends.
        for (std::size_t i = 0; i + 1 < fractions.size(); ++i) {
            const double a = fractions[i];
            const double b = fractions[i + 1];
            const bool lasers = at(Channel::P, 0.5 * (a + b)) > 0.0;
            check_point(a, lasers);
            check_point(b, lasers);
        }

        for (Channel c : kAllChannels) {
            if (const auto& r = s.ramp(c)) current[idx(c)] = r->end;
        }
        t0 += s.duration;
    }
    std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) { return a.t < b.t; });
    return out;
}

std::string format_violation(const Violation& v)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, "t=%.9g channel=%s limit=%g", v.t, std::string(channel_name(v.channel)).c_str(),
                  v.limit);
    return buf;
}

ChipParameters instantiate(const SequenceSpec& seq, const ChipParameters& chip_template, double t)
{
    ChipParameters p = chip_template;
    p.Q_current = value_at(seq, Channel::I_Q, t);
    p.U_current = value_at(seq, Channel::I_U, t);
    p.Z_current = value_at(seq, Channel::I_Z, t);
    p.Bz = value_at(seq, Channel::B_z, t);
    p.Bx = value_at(seq, Channel::B_x, t);
    return p;
}

double Snapshot::distance_to_chip() const
{
    if (trap) return trap->distance_to_chip;
    if (quadrupole) return quadrupole->zero.y();
    return 0.0;
}

std::vector<Snapshot> snapshots(const SequenceSpec& seq, const ChipParameters& chip_template,
                                const std::vector<double>& times, const SpinState& spin, const Vec3& seed)
{
    std::vector<Snapshot> out;
    out.reserve(times.size());
    Vec3 quad_seed = seed;
    Vec3 trap_seed = seed;
    for (double t : times) {
        Snapshot snap;
        snap.t = t;
        snap.stage = seq.stages[seq.stage_index(t)].name;
        const ChipAssembly chip = build_chip(instantiate(seq, chip_template, t));
        try {
            if (lasers_on(seq, t)) {
                snap.quadrupole = quadrupole_report(chip, quad_seed);
                quad_seed = snap.quadrupole->zero;
            } else {
                snap.trap = characterize(chip, spin, trap_seed);
                trap_seed = snap.trap->position;
            }
        } catch (const NoTrapError& e) {
            throw NoTrapError(describe_time(t) + ": " + e.what());
        } catch (const UnphysicalTrapError& e) {
            throw UnphysicalTrapError(describe_time(t) + ": " + e.what());
        } catch (const SaddlePointError& e) {
            throw SaddlePointError(describe_time(t) + ": " + e.what());
        }
        out.push_back(std::move(snap));
    }
    return out;
}

double adiabaticity_metric(const SequenceSpec& seq, const ChipParameters& chip_template, const SpinState& spin,
                           double t, const Vec3& seed)
{
    const double dt = seq.stages[seq.stage_index(t)].duration / 100.0;
    auto omega = [&](double when) -> Vec3 {
        const ChipAssembly chip = build_chip(instantiate(seq, chip_template, when));
        try {
            return 2.0 * constants::pi * characterize(chip, spin, seed).frequencies;
        } catch (const NoTrapError& e) {
            throw NoTrapError(describe_time(when) + ": " + e.what());
        }
    };
    const Vec3 w_minus = omega(t - dt);
    const Vec3 w0 = omega(t);
    const Vec3 w_plus = omega(t + dt);
    double metric = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (!(w0[i] > 0.0)) throw NoTrapError(describe_time(t) + ": trap has a zero frequency");
        metric = std::max(metric, std::abs(w_plus[i] - w_minus[i]) / (2.0 * dt * w0[i] * w0[i]));
    }
    return metric;
}

SequenceSpec time_reversed(const SequenceSpec& seq)
{
    SequenceSpec r;
    auto current = seq.initial;
    for (const Stage& s : seq.stages) {
        for (Channel c : kAllChannels) {
            if (const auto& ramp = s.ramp(c)) {
                if (ramp->shape == RampShape::step) {
                    throw ConfigError("stage '" + s.name + "' has a step ramp and cannot be time-reversed");
                }
                current[idx(c)] = ramp->end;
            }
        }
    }
    r.initial = current;
    for (auto it = seq.stages.rbegin(); it != seq.stages.rend(); ++it) {
        Stage s = *it;
        for (auto& ramp : s.ramps) {
            if (ramp) std::swap(ramp->start, ramp->end);
        }
        r.stages.push_back(std::move(s));
    }
    return r;
}

}  // namespace atomchip
