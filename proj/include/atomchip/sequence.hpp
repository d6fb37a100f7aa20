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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atomchip/geometry.hpp"
#include "atomchip/trapanalysis.hpp"
#include "atomchip/units.hpp"

namespace atomchip {

/// Control channels of the experiment. Currents in A, fields in T, detuning in
/// multiples of the natural linewidth, beam power in W.
enum class Channel { I_Q, I_U, I_Z, B_z, B_x, delta, P };

inline constexpr std::size_t kChannelCount = 7;
inline constexpr std::array<Channel, kChannelCount> kAllChannels{Channel::I_Q, Channel::I_U, Channel::I_Z,
                                                                 Channel::B_z, Channel::B_x, Channel::delta,
                                                                 Channel::P};

std::string_view channel_name(Channel c);
/// Accepts the names above plus "δ" for the detuning.
Channel parse_channel(std::string_view name);
Dimension channel_dimension(Channel c);

enum class RampShape { linear, step };

/// Linear ramps run from `start` to `end` over the stage. Step ramps jump to `end`
/// at the stage start; `start` is informational.
struct Ramp {
    double start = 0.0;
    double end = 0.0;
    RampShape shape = RampShape::linear;
};

/// Steps are only allowed in stages this short.
inline constexpr double kMaxStepStageDuration = 1e-3;

struct Stage {
    std::string name;
    double duration = 0.0;
    /// Channels without a ramp hold their previous value.
    std::array<std::optional<Ramp>, kChannelCount> ramps;

    std::optional<Ramp>& ramp(Channel c) { return ramps[static_cast<std::size_t>(c)]; }
    const std::optional<Ramp>& ramp(Channel c) const { return ramps[static_cast<std::size_t>(c)]; }
};

struct SequenceSpec {
    std::array<double, kChannelCount> initial{};
    std::vector<Stage> stages;

    double initial_value(Channel c) const { return initial[static_cast<std::size_t>(c)]; }
    double total_duration() const;
    /// Start time of stage i.
    double stage_start(std::size_t i) const;
    /// Index of the stage containing t; stages are half-open except the last.
    std::size_t stage_index(double t) const;
    /// Throws ConfigError on a non-positive duration, a step in a long stage, or a
    /// linear ramp that does not start where the channel left off.
    void check() const;
};

/// The five-stage experimental timeline: MOT loading, transfer, compression,
/// magnetic-trap load, hold.
SequenceSpec default_sequence(double Bx = 2.75e-4, double hold = 50e-3);

/// Throws RangeError outside [0, total duration].
double value_at(const SequenceSpec& seq, Channel channel, double t);
std::array<double, kChannelCount> values_at(const SequenceSpec& seq, double t);
bool lasers_on(const SequenceSpec& seq, double t);

struct HardwareLimits {
    double U_max = 5.0;
    /// Reduced critical current of the Z wire under laser heating.
    double Z_max_lasers_on = 1.71;
    double Z_max_lasers_off = 1.94;
    double P_min = 0.0;
    double detuning_max = 50.0;
};

struct Violation {
    double t = 0.0;
    Channel channel = Channel::I_Z;
    double limit = 0.0;
    double value = 0.0;
    std::string stage;
};

/// Checks every stage at its endpoints and at laser switching instants. Reports
/// at most one violation per stage, channel and limit.
std::vector<Violation> validate(const SequenceSpec& seq, const HardwareLimits& limits = {});
/// `t=<s> channel=<name> limit=<value>`
std::string format_violation(const Violation& v);

/// Chip parameters with currents and biases taken from the sequence at t.
ChipParameters instantiate(const SequenceSpec& seq, const ChipParameters& chip_template, double t);

struct Snapshot {
    double t = 0.0;
    std::string stage;
    std::optional<TrapReport> trap;
    std::optional<QuadrupoleReport> quadrupole;

    /// Distance of the trap minimum or field zero from the chip.
    double distance_to_chip() const;
};

inline const Vec3 kDefaultSeed{0.0, 1e-3, 0.0};

/// Quadrupole report while the lasers are on, full trap characterization afterwards.
/// Each search starts from the previous result of the same kind. Errors carry the
/// timestamp.
std::vector<Snapshot> snapshots(const SequenceSpec& seq, const ChipParameters& chip_template,
                                const std::vector<double>& times, const SpinState& spin = {},
                                const Vec3& seed = kDefaultSeed);

/// max_i |w_i(t + dt) - w_i(t - dt)| / (2 dt w_i(t)^2), dt = stage duration / 100.
double adiabaticity_metric(const SequenceSpec& seq, const ChipParameters& chip_template, const SpinState& spin,
                           double t, const Vec3& seed = kDefaultSeed);

/// Same stages traversed backwards in time.
SequenceSpec time_reversed(const SequenceSpec& seq);

SequenceSpec parse_sequence(std::istream& in);
SequenceSpec load_sequence(const std::filesystem::path& path);
void write_sequence(std::ostream& out, const SequenceSpec& seq);

}  // namespace atomchip
