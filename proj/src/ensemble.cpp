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

#include "atomchip/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "atomchip/analysis.hpp"
#include "atomchip/errors.hpp"
#include "atomchip/rng.hpp"
#include "parallel.hpp"

namespace atomchip {

namespace {

// Atoms this close to the chip plane that hit a conductor's exclusion zone have
// touched the chip; they count as surface losses rather than aborting the run.
constexpr double kSurfaceContact = 2.0 * (kExclusionRadius + kDerivativeStep);

struct StepContext {
    const FieldSource* source;
    double moment;
    double mass;
    Vec3 gravity;
};

/// Acceleration from -grad(mu |B|) / m + g with a central-difference stencil.
Vec3 acceleration(const StepContext& c, const Vec3& p)
{
    if (c.moment == 0.0) return c.gravity;
    Vec3 grad;
    for (int k = 0; k < 3; ++k) {
        Vec3 d = Vec3::Zero();
        d[k] = kDerivativeStep;
        grad[k] = (8.0 * (c.source->magnitude(p + d) - c.source->magnitude(p - d)) -
                   (c.source->magnitude(p + 2.0 * d) - c.source->magnitude(p - 2.0 * d))) /
                  (12.0 * kDerivativeStep);
    }
    return -(c.moment / c.mass) * grad + c.gravity;
}

struct Reference {
    bool valid = false;
    Vec3 position = Vec3::Zero();
};

}  // namespace

std::string_view loss_cause_name(LossCause c)
{
    switch (c) {
    case LossCause::none: return "none";
    case LossCause::surface: return "surface";
    case LossCause::spin_flip: return "spin_flip";
    case LossCause::background: return "background";
    case LossCause::untrapped: return "untrapped";
    }
    return "none";
}

void CloudSpec::validate() const
{
    if (N < 1) throw ConfigError("cloud needs at least one atom");
    if (N > 0xFFFFFFFFu) throw ConfigError("cloud is too large for 32-bit atom ids");
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw ConfigError("cloud temperature must be >= 0");
    if (!(sigmas.minCoeff() > 0.0) || !sigmas.allFinite()) throw ConfigError("cloud sigmas must be positive");
    if (!center.allFinite()) throw ConfigError("cloud center must be finite");
    if (population.empty()) throw ConfigError("spin population is empty");
    double total = 0.0;
    for (const auto& [mF, fraction] : population) {
        SpinState{F, mF, F == 2 ? 0.5 : -0.5}.validate();
        if (!(fraction >= 0.0)) throw ConfigError("spin population fractions must be >= 0");
        total += fraction;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("spin population fractions must sum to 1");
}

CloudSpec CloudSpec::compressed_mot() { return CloudSpec{}; }

CloudSpec CloudSpec::magnetic_trap(const Vec3& center)
{
    CloudSpec c;
    c.temperature = 40e-6;
    c.center = center;
    c.sigmas = Vec3(750e-6, 78e-6, 78e-6);
    return c;
}

std::vector<Atom> sample_cloud(const CloudSpec& spec, std::uint64_t seed, double mass)
{
    spec.validate();
    const double sv = std::sqrt(constants::boltzmann * spec.temperature / mass);
    std::vector<std::pair<int, double>> cumulative;
    double acc = 0.0;
    for (const auto& [mF, fraction] : spec.population) {
        acc += fraction;
        cumulative.emplace_back(mF, acc);
    }
    std::vector<Atom> atoms(spec.N);
    for (std::size_t i = 0; i < spec.N; ++i) {
        CounterRng rng(seed, static_cast<std::uint32_t>(i), RngPurpose::sampling);
        Atom& a = atoms[i];
        a.id = static_cast<std::uint32_t>(i);
        for (int k = 0; k < 3; ++k) a.position[k] = spec.center[k] + spec.sigmas[k] * rng.normal();
        for (int k = 0; k < 3; ++k) a.velocity[k] = sv * rng.normal();
        const double u = rng.uniform() * acc;
        int mF = cumulative.back().first;
        for (const auto& [m, c] : cumulative) {
            if (u < c) {
                mF = m;
                break;
            }
        }
        a.spin = SpinState{spec.F, mF, spec.F == 2 ? 0.5 : -0.5};
    }
    return atoms;
}

bool spin_flip_test(const SpinState& spin, const Vec3& B_before, const Vec3& B_after, double dt, double chi)
{
    const double b0 = B_before.norm();
    const double b1 = B_after.norm();
    if (b0 == 0.0 || b1 == 0.0) return true;
    const double angle = std::atan2(B_before.cross(B_after).norm(), B_before.dot(B_after));
    const double omega_rot = angle / dt;
    const double omega_larmor = std::abs(spin.moment()) * std::min(b0, b1) / constants::hbar;
    return omega_larmor < chi * omega_rot;
}

LossConfig LossConfig::none()
{
    LossConfig c;
    c.surface = c.spin_flip = c.background = c.untrapped = false;
    return c;
}

LossConfig LossConfig::background_only(double lifetime)
{
    LossConfig c = none();
    c.background = true;
    c.background_lifetime = lifetime;
    return c;
}

FieldSchedule FieldSchedule::constant(const ChipAssembly& chip)
{
    FieldSchedule s;
    s.static_source_ = std::make_shared<const FieldSource>(chip);
    return s;
}

FieldSchedule FieldSchedule::sequence(SequenceSpec seq, ChipParameters chip_template, double t_start)
{
    seq.check();
    if (!(t_start >= 0.0 && t_start <= seq.total_duration())) throw ConfigError("schedule start outside the sequence");
    FieldSchedule s;
    s.seq_ = std::make_shared<const SequenceSpec>(std::move(seq));
    s.template_ = chip_template;
    s.t_start_ = t_start;
    return s;
}

std::shared_ptr<const FieldSource> FieldSchedule::source_at(double t) const
{
    if (static_source_) return static_source_;
    const double ts = std::min(t_start_ + t, seq_->total_duration());
    return std::make_shared<const FieldSource>(build_chip(instantiate(*seq_, template_, ts)));
}

double max_stable_dt(double f_max) { return 1.0 / (50.0 * f_max); }

double suggested_dt(const FieldSchedule& schedule, double t, const Vec3& seed, const SpinState& spin)
{
    try {
        const TrapReport r = characterize(TrapPotential(*schedule.source_at(t), spin), seed);
        const double dt = std::floor(max_stable_dt(r.frequencies.maxCoeff()) * 1e6) * 1e-6;
        return std::max(dt, 1e-6);
    } catch (const Error&) {
        return 1e-6;
    }
}

double kinetic_temperature(const std::vector<Atom>& atoms, double mass)
{
    Vec3 mean = Vec3::Zero();
    std::size_t n = 0;
    for (const auto& a : atoms) {
        if (!a.alive) continue;
        mean += a.velocity;
        ++n;
    }
    if (n == 0) return 0.0;
    mean /= static_cast<double>(n);
    double s = 0.0;
    for (const auto& a : atoms) {
        if (a.alive) s += (a.velocity - mean).squaredNorm();
    }
    return mass * s / (3.0 * constants::boltzmann * static_cast<double>(n));
}

SimResult evolve(const FieldSchedule& schedule, std::vector<Atom> atoms, const EvolveOptions& options)
{
    const double dt = options.dt;
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    if (options.record_times.empty()) throw ConfigError("evolve needs at least one record time");
    std::vector<std::uint64_t> record_steps;
    for (double t : options.record_times) {
        if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("record times must be positive");
        const auto n = static_cast<std::uint64_t>(std::llround(t / dt));
        if (n == 0) throw ConfigError("record time shorter than the time step");
        if (!record_steps.empty() && n < record_steps.back()) throw ConfigError("record times must be ascending");
        record_steps.push_back(n);
    }
    const double t_end = static_cast<double>(record_steps.back()) * dt;

    LossConfig losses = options.losses;
    if (losses.background && losses.background_lifetime <= 0.0) {
        losses.background_lifetime = default_background_lifetime();
    }
    const double p_background = losses.background ? dt / losses.background_lifetime : 0.0;

    SimResult result;
    result.seed = options.seed;
    result.dt = dt;
    result.steps = record_steps.back();

    // Reference traps per weak-field-seeking sublevel, seeded at the cloud's centroid.
    Vec3 centroid = Vec3::Zero();
    std::size_t alive0 = 0;
    for (const auto& a : atoms) {
        if (!a.alive) continue;
        centroid += a.position;
        ++alive0;
    }
    if (alive0 > 0) centroid /= static_cast<double>(alive0);
    const auto ref_source = schedule.source_at(schedule.reference_time(t_end));
    std::map<std::pair<int, int>, Reference> refs;
    double f_max = 0.0;
    for (const auto& a : atoms) {
        const auto key = std::make_pair(a.spin.F, a.spin.mF);
        if (!a.spin.weak_field_seeker() || refs.count(key)) continue;
        Reference ref;
        try {
            const TrapPotential U(*ref_source, a.spin, options.mass);
            const TrapReport r = characterize(U, centroid);
            ref = {true, r.position};
            f_max = std::max(f_max, r.frequencies.maxCoeff());
            if (!result.reference || a.spin.moment() > result.reference->spin.moment()) result.reference = r;
        } catch (const NoTrapError&) {
        } catch (const UnphysicalTrapError&) {
        } catch (const SaddlePointError&) {
        }
        refs[key] = ref;
    }
    if (f_max > 0.0 && dt > max_stable_dt(f_max) * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "time step " << dt << " s exceeds 1/(50 f_max) = " << max_stable_dt(f_max) << " s for f_max = " << f_max
           << " Hz";
        throw ConfigError(os.str());
    }

    const std::size_t n_atoms = atoms.size();
    std::vector<Vec3> acc(n_atoms);
    std::vector<Vec3> field(n_atoms);
    std::vector<char> primed(n_atoms, 0);

    auto record = [&](double t) {
        SimRecord rec;
        rec.t = t;
        for (const auto& a : atoms) {
            switch (a.loss) {
            case LossCause::none: ++rec.alive; break;
            case LossCause::surface: ++rec.surface; break;
            case LossCause::spin_flip: ++rec.spin_flip; break;
            case LossCause::background: ++rec.background; break;
            case LossCause::untrapped: ++rec.untrapped; break;
            }
        }
        rec.temperature = kinetic_temperature(atoms, options.mass);
        result.records.push_back(rec);
    };
    record(0.0);

    std::uint64_t n_prev = 0;
    for (const std::uint64_t n_next : record_steps) {
        // Sources for every step boundary of this interval, shared by all atoms.
        std::vector<std::shared_ptr<const FieldSource>> sources;
        if (schedule.is_static()) {
            sources.push_back(schedule.source_at(0.0));
        } else {
            sources.reserve(n_next - n_prev + 1);
            for (std::uint64_t n = n_prev; n <= n_next; ++n) sources.push_back(schedule.source_at(static_cast<double>(n) * dt));
        }
        auto source_for = [&](std::uint64_t n) -> const FieldSource& {
            return schedule.is_static() ? *sources[0] : *sources[n - n_prev];
        };

        detail::parallel_for(n_atoms, options.workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                Atom& a = atoms[i];
                if (!a.alive) continue;
                const double moment = a.spin.moment();
                const bool wfs = a.spin.weak_field_seeker();
                const auto it = refs.find({a.spin.F, a.spin.mF});
                const Reference* ref_ptr = wfs && it != refs.end() && it->second.valid ? &it->second : nullptr;

                auto lose = [&](LossCause cause, std::uint64_t n) {
                    a.alive = false;
                    a.loss = cause;
                    a.loss_time = static_cast<double>(n) * dt;
                };
                // Field and acceleration at p for step boundary n. Returns false if the
                // atom touched a conductor at the chip surface.
                auto probe = [&](std::uint64_t n, const Vec3& p, Vec3& B, Vec3& accel) {
                    const StepContext ctx{&source_for(n), moment, options.mass, source_for(n).gravity()};
                    try {
                        B = ctx.source->field(p);
                        accel = acceleration(ctx, p);
                        return true;
                    } catch (const SingularityError& e) {
                        if (p.y() < kSurfaceContact) return false;
                        std::ostringstream os;
                        os << "atom " << a.id << " at t = " << static_cast<double>(n) * dt << " s";
                        throw SingularityError(e.conductor(), p, os.str());
                    }
                };

                if (!primed[i]) {
                    if (!probe(n_prev, a.position, field[i], acc[i])) {
                        lose(LossCause::surface, n_prev);
                        continue;
                    }
                    primed[i] = 1;
                }

                for (std::uint64_t n = n_prev; n < n_next; ++n) {
                    const Vec3 v_half = a.velocity + 0.5 * dt * acc[i];
                    a.position += dt * v_half;
                    if (losses.surface && a.position.y() <= 0.0) {
                        a.velocity = v_half;
                        lose(LossCause::surface, n + 1);
                        break;
                    }
                    Vec3 B_new;
                    Vec3 a_new;
                    if (!probe(n + 1, a.position, B_new, a_new)) {
                        a.velocity = v_half;
                        lose(LossCause::surface, n + 1);
                        break;
                    }
                    a.velocity = v_half + 0.5 * dt * a_new;
                    const Vec3 B_old = field[i];
                    field[i] = B_new;
                    acc[i] = a_new;

                    if (losses.spin_flip && wfs && spin_flip_test(a.spin, B_old, B_new, dt, losses.chi)) {
                        lose(LossCause::spin_flip, n + 1);
                        break;
                    }
                    if (p_background > 0.0) {
                        CounterRng rng(options.seed, a.id, RngPurpose::background, n);
                        if (rng.uniform() < p_background) {
                            lose(LossCause::background, n + 1);
                            break;
                        }
                    }
                    if (losses.untrapped) {
                        const Vec3 anchor = ref_ptr ? ref_ptr->position : centroid;
                        if ((a.position - anchor).norm() > losses.probe_radius) {
                            lose(LossCause::untrapped, n + 1);
                            break;
                        }
                    }
                }
            }
        });
        record(static_cast<double>(n_next) * dt);
        n_prev = n_next;
    }
    result.atoms = std::move(atoms);
    return result;
}

std::vector<Vec3> trajectory(const FieldSource& source, const Atom& atom, double dt, std::size_t steps, double mass)
{
    const StepContext ctx{&source, atom.spin.moment(), mass, source.gravity()};
    std::vector<Vec3> out;
    out.reserve(steps + 1);
    Vec3 x = atom.position;
    Vec3 v = atom.velocity;
    Vec3 a = acceleration(ctx, x);
    out.push_back(x);
    for (std::size_t k = 0; k < steps; ++k) {
        const Vec3 v_half = v + 0.5 * dt * a;
        x += dt * v_half;
        a = acceleration(ctx, x);
        v = v_half + 0.5 * dt * a;
        out.push_back(x);
    }
    return out;
}

TofResult time_of_flight(const std::vector<Atom>& atoms, double t_flight, const Vec3& gravity)
{
    if (!(t_flight >= 0.0)) throw ConfigError("flight time must be >= 0");
    TofResult r;
    for (const auto& a : atoms) {
        if (!a.alive) continue;
        Atom b = a;
        b.position = a.position + a.velocity * t_flight + 0.5 * gravity * t_flight * t_flight;
        b.velocity = a.velocity + gravity * t_flight;
        r.atoms.push_back(b);
    }
    const std::size_t n = r.atoms.size();
    if (n == 0) return r;
    for (const auto& a : r.atoms) r.center += a.position;
    r.center /= static_cast<double>(n);
    if (n > 1) {
        Vec3 s = Vec3::Zero();
        for (const auto& a : r.atoms) s += (a.position - r.center).cwiseAbs2();
        r.widths = (s / static_cast<double>(n - 1)).cwiseSqrt();
    }
    return r;
}

SimResult decay_curve(const FieldSchedule& schedule, const CloudSpec& cloud, const std::vector<double>& hold_times,
                      const LossConfig& losses, std::uint64_t seed, double dt, unsigned workers)
{
    if (hold_times.empty()) throw ConfigError("decay curve needs at least one hold time");
    for (std::size_t i = 0; i < hold_times.size(); ++i) {
        if (!(hold_times[i] >= 50e-3)) throw ConfigError("hold times must be at least 50 ms");
        if (i > 0 && !(hold_times[i] > hold_times[i - 1])) throw ConfigError("hold times must be strictly ascending");
    }
    EvolveOptions o;
    o.dt = dt;
    o.record_times = hold_times;
    o.losses = losses;
    o.seed = seed;
    o.workers = workers;
    return evolve(schedule, sample_cloud(cloud, seed), o);
}

void write_decay_csv(std::ostream& out, const SimResult& result)
{
    out << "t_s,N_alive,N_surface,N_spinflip,N_background,N_untrapped,T_kinetic_K\n";
    char buf[256];
    for (const auto& r : result.records) {
        std::snprintf(buf, sizeof buf, "%.9g,%zu,%zu,%zu,%zu,%zu,%.9g\n", r.t, r.alive, r.surface, r.spin_flip,
                      r.background, r.untrapped, r.temperature);
        out << buf;
    }
}

void write_atoms_csv(std::ostream& out, const std::vector<Atom>& atoms)
{
    out << "id,x_m,y_m,z_m,vx_m_s,vy_m_s,vz_m_s,F,mF,alive,loss_cause,loss_time_s\n";
    char buf[512];
    for (const auto& a : atoms) {
        std::snprintf(buf, sizeof buf, "%u,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%d,%d,%s,%.9g\n", a.id, a.position.x(),
                      a.position.y(), a.position.z(), a.velocity.x(), a.velocity.y(), a.velocity.z(), a.spin.F,
                      a.spin.mF, a.alive ? 1 : 0, std::string(loss_cause_name(a.loss)).c_str(), a.loss_time);
        out << buf;
    }
}

}  // namespace atomchip
