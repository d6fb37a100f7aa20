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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "atomchip/constants.hpp"
#include "atomchip/fieldsolver.hpp"
#include "atomchip/geometry.hpp"
#include "atomchip/sequence.hpp"
#include "atomchip/trapanalysis.hpp"

namespace atomchip {

enum class LossCause { none, surface, spin_flip, background, untrapped };

std::string_view loss_cause_name(LossCause c);

struct Atom {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    SpinState spin;
    bool alive = true;
    LossCause loss = LossCause::none;
    /// Simulation time of the loss event, s.
    double loss_time = 0.0;
    /// Index of the atom's random stream; unique within an ensemble.
    std::uint32_t id = 0;
};

struct CloudSpec {
    std::size_t N = 5000;
    double temperature = 80e-6;
    Vec3 center{0.0, 460e-6, 0.0};
    Vec3 sigmas{600e-6, 190e-6, 190e-6};
    int F = 2;
    /// mF -> fraction; fractions sum to 1.
    std::map<int, double> population{{2, 1.0}};

    /// Throws ConfigError.
    void validate() const;

    /// Compressed mirror-MOT: 80 uK, 1200 x 380 x 380 um full size.
    static CloudSpec compressed_mot();
    /// Thermal cloud in the Z trap: 40 uK, 1500 x 156 x 156 um full size.
    static CloudSpec magnetic_trap(const Vec3& center);
};

/// Gaussian positions, Maxwell-Boltzmann velocities, spins drawn from the population
/// map. Deterministic in `seed`.
std::vector<Atom> sample_cloud(const CloudSpec& spec, std::uint64_t seed, double mass = constants::rb87_mass);

inline constexpr double kSpinFlipRatio = 10.0;

/// True when the Larmor rate mu |B| / hbar (smaller of the two samples) falls below
/// chi times the rotation rate of the field direction over dt, or when |B| = 0.
bool spin_flip_test(const SpinState& spin, const Vec3& B_before, const Vec3& B_after, double dt,
                    double chi = kSpinFlipRatio);

struct LossConfig {
    bool surface = true;
    bool spin_flip = true;
    bool background = true;
    bool untrapped = true;
    double background_lifetime = 0.0;  ///< 0 selects default_background_lifetime()
    double chi = kSpinFlipRatio;
    double probe_radius = 5e-3;

    static LossConfig none();
    static LossConfig background_only(double lifetime);
};

/// Fields seen by the atoms as a function of simulation time.
class FieldSchedule {
public:
    /// Time-independent chip.
    static FieldSchedule constant(const ChipAssembly& chip);
    /// Sequence-driven chip; simulation time 0 maps to sequence time `t_start`. Past the
    /// end of the sequence the final values hold.
    static FieldSchedule sequence(SequenceSpec seq, ChipParameters chip_template, double t_start);

    bool is_static() const noexcept { return !seq_; }
    std::shared_ptr<const FieldSource> source_at(double t) const;
    /// Simulation time at which trap depth and position are taken for the untrapped
    /// test: 0 for a static chip, the run end for a sequence.
    double reference_time(double t_end) const { return is_static() ? 0.0 : t_end; }

private:
    std::shared_ptr<const FieldSource> static_source_;
    std::shared_ptr<const SequenceSpec> seq_;
    ChipParameters template_;
    double t_start_ = 0.0;
};

struct EvolveOptions {
    double dt = 1e-6;
    /// Times to record, ascending, > 0. The last one ends the run. t = 0 is always recorded.
    std::vector<double> record_times;
    LossConfig losses;
    std::uint64_t seed = 0;
    /// 0 uses the hardware concurrency. Results do not depend on it.
    unsigned workers = 0;
    double mass = constants::rb87_mass;
};

struct SimRecord {
    double t = 0.0;
    std::size_t alive = 0;
    std::size_t surface = 0;
    std::size_t spin_flip = 0;
    std::size_t background = 0;
    std::size_t untrapped = 0;
    double temperature = 0.0;
};

struct SimResult {
    std::vector<SimRecord> records;
    std::vector<Atom> atoms;
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::uint64_t steps = 0;
    /// Trap used for the untrapped test and the step-size guard, if one was found.
    std::optional<TrapReport> reference;
};

/// Largest step allowed for a trap whose highest frequency is f_max.
double max_stable_dt(double f_max);
/// 1/(50 f_max) for the trap of the schedule at `t`, rounded down to whole
/// microseconds. Falls back to 1 us when no trap is found.
double suggested_dt(const FieldSchedule& schedule, double t, const Vec3& seed, const SpinState& spin = {});

/// Velocity-Verlet propagation with surface, spin-flip, background and untrapped losses.
/// Throws ConfigError when dt exceeds max_stable_dt for the reference trap, and
/// SingularityError naming the atom when one is driven into a conductor off the surface.
SimResult evolve(const FieldSchedule& schedule, std::vector<Atom> atoms, const EvolveOptions& options);

/// m <|v - <v>|^2> / (3 kB) over the living atoms.
double kinetic_temperature(const std::vector<Atom>& atoms, double mass = constants::rb87_mass);

/// Loss-free single-atom trajectory; returns the position after each step, starting
/// with the initial one.
std::vector<Vec3> trajectory(const FieldSource& source, const Atom& atom, double dt, std::size_t steps,
                             double mass = constants::rb87_mass);

struct TofResult {
    std::vector<Atom> atoms;
    Vec3 center = Vec3::Zero();
    /// Sample standard deviation per axis.
    Vec3 widths = Vec3::Zero();
};

/// Ballistic flight r + v t + g t^2 / 2 of the living atoms.
TofResult time_of_flight(const std::vector<Atom>& atoms, double t_flight, const Vec3& gravity = Vec3(0.0, 0.0, -9.81));

/// One evolve run of a freshly sampled cloud recording the hold times (sorted, >= 50 ms).
SimResult decay_curve(const FieldSchedule& schedule, const CloudSpec& cloud, const std::vector<double>& hold_times,
                      const LossConfig& losses, std::uint64_t seed, double dt, unsigned workers = 0);

/// `t_s,N_alive,N_surface,N_spinflip,N_background,N_untrapped,T_kinetic_K`
void write_decay_csv(std::ostream& out, const SimResult& result);
void write_atoms_csv(std::ostream& out, const std::vector<Atom>& atoms);

}  // namespace atomchip
