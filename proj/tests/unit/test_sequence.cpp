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
#include <sstream>

#include "atomchip/errors.hpp"
#include "atomchip/sequence.hpp"
#include "oracles.hpp"

using namespace atomchip;

namespace {

double stage_end(const SequenceSpec& seq, const std::string& name)
{
    for (std::size_t i = 0; i < seq.stages.size(); ++i) {
        if (seq.stages[i].name == name) return seq.stage_start(i) + seq.stages[i].duration;
    }
    throw std::runtime_error("no stage " + name);
}

double stage_begin(const SequenceSpec& seq, const std::string& name)
{
    for (std::size_t i = 0; i < seq.stages.size(); ++i) {
        if (seq.stages[i].name == name) return seq.stage_start(i);
    }
    throw std::runtime_error("no stage " + name);
}

Stage& stage(SequenceSpec& seq, const std::string& name)
{
    for (auto& s : seq.stages) {
        if (s.name == name) return s;
    }
    throw std::runtime_error("no stage " + name);
}

}  // namespace

TEST_CASE("default sequence values")
{
    const SequenceSpec seq = default_sequence();
    REQUIRE(seq.stages.size() == 5);
    CHECK(seq.stages[0].name == "mot_loading");
    CHECK(seq.stages[4].name == "hold");
    CHECK(value_at(seq, Channel::I_U, 5.0 + 10e-3) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(value_at(seq, Channel::B_z, stage_end(seq, "compression")) == doctest::Approx(6.26e-4).epsilon(1e-12));
    CHECK(value_at(seq, Channel::I_U, stage_end(seq, "compression")) == doctest::Approx(1.8).epsilon(1e-12));
    for (double t = 5.02; t <= seq.total_duration(); t += 1e-3) CHECK(value_at(seq, Channel::I_Q, t) == 0.0);
    CHECK(value_at(seq, Channel::I_Q, 0.0) == 1.77);
    CHECK(value_at(seq, Channel::B_z, 0.0) == doctest::Approx(3.1e-4));
    CHECK(value_at(seq, Channel::delta, 0.0) == -2.7);
    CHECK(value_at(seq, Channel::P, 0.0) == doctest::Approx(8.5e-3));
    CHECK(value_at(seq, Channel::delta, stage_end(seq, "compression")) == doctest::Approx(-10.2));
    // The power step of the next stage applies from its first instant.
    CHECK(value_at(seq, Channel::P, stage_end(seq, "compression") - 1e-9) == doctest::Approx(6e-3));
    CHECK(value_at(seq, Channel::P, stage_end(seq, "compression")) == 0.0);
    CHECK(value_at(seq, Channel::I_Z, stage_end(seq, "trap_load")) == doctest::Approx(1.5));
    CHECK(value_at(seq, Channel::B_x, stage_end(seq, "hold")) == doctest::Approx(2.75e-4));
    CHECK(value_at(seq, Channel::B_x, stage_end(seq, "hold")) ==
          value_at(default_sequence(0.0), Channel::B_x, 0.0) + 2.75e-4);

    // Bz does not move during the magnetic-trap load.
    CHECK(value_at(seq, Channel::B_z, stage_begin(seq, "trap_load")) ==
          value_at(seq, Channel::B_z, stage_end(seq, "hold")));
    CHECK(seq.stages[3].duration == doctest::Approx(100e-6));
    CHECK(seq.stages[4].duration >= 50e-3);
    CHECK(lasers_on(seq, 1.0));
    CHECK_FALSE(lasers_on(seq, stage_end(seq, "trap_load")));
}

TEST_CASE("timeline bookkeeping")
{
    const SequenceSpec seq = default_sequence();
    double sum = 0.0;
    for (const auto& s : seq.stages) sum += s.duration;
    CHECK(seq.total_duration() == doctest::Approx(sum).epsilon(1e-15));
    CHECK_THROWS_AS(value_at(seq, Channel::I_Z, -1e-9), RangeError);
    CHECK_THROWS_AS(value_at(seq, Channel::I_Z, seq.total_duration() + 1e-6), RangeError);
    CHECK_NOTHROW(value_at(seq, Channel::I_Z, seq.total_duration()));
    CHECK(seq.stage_index(0.0) == 0);
    CHECK(seq.stage_index(5.0) == 1);
    CHECK(seq.stage_index(seq.total_duration()) == 4);
}

TEST_CASE("channel values are continuous across linear boundaries")
{
    const SequenceSpec seq = default_sequence();
    for (std::size_t i = 1; i < seq.stages.size(); ++i) {
        const double t = seq.stage_start(i);
        for (Channel c : kAllChannels) {
            const auto& r = seq.stages[i].ramp(c);
            if (r && r->shape == RampShape::step) continue;
            const double before = value_at(seq, c, t - 1e-12);
            const double after = value_at(seq, c, t + 1e-12);
            const double scale = std::max(1e-6, std::abs(before));
            // 1e-7 covers the 15 kA/s Z ramp across the 2 ps window.
            CHECK(std::abs(after - before) <= 1e-6 * scale + 1e-7);
        }
    }
}

TEST_CASE("structural checks")
{
    SequenceSpec seq = default_sequence();
    stage(seq, "transfer").ramp(Channel::I_U) = Ramp{0.5, 3.0};
    CHECK_THROWS_AS(seq.check(), ConfigError);

    seq = default_sequence();
    stage(seq, "transfer").ramp(Channel::I_U)->shape = RampShape::step;
    CHECK_THROWS_AS(seq.check(), ConfigError);

    seq = default_sequence();
    stage(seq, "hold").duration = 0.0;
    CHECK_THROWS_AS(seq.check(), ConfigError);
}

TEST_CASE("hardware limits")
{
    CHECK(validate(default_sequence()).empty());

    SUBCASE("Z current above the heated limit while lasers are on")
    {
        SequenceSpec seq = default_sequence();
        stage(seq, "compression").ramp(Channel::I_Z) = Ramp{0.0, 1.8};
        stage(seq, "trap_load").ramp(Channel::I_Z) = Ramp{1.8, 1.5};
        seq.check();
        const auto v = validate(seq);
        REQUIRE(v.size() == 1);
        CHECK(v[0].channel == Channel::I_Z);
        CHECK(v[0].limit == 1.71);
        CHECK(v[0].t == doctest::Approx(stage_end(seq, "compression")));
        CHECK(format_violation(v[0]).find("channel=I_Z limit=1.71") != std::string::npos);
        CHECK(format_violation(v[0]).rfind("t=", 0) == 0);
    }
    SUBCASE("same current with lasers off is fine")
    {
        SequenceSpec seq = default_sequence();
        stage(seq, "trap_load").ramp(Channel::I_Z) = Ramp{0.0, 1.8};
        CHECK(validate(seq).empty());
        stage(seq, "trap_load").ramp(Channel::I_Z) = Ramp{0.0, 2.0};
        // Reported once per stage: the ramp overshoots in trap_load and the current holds there.
        const auto v = validate(seq);
        REQUIRE(v.size() == 2);
        CHECK(v[0].stage == "trap_load");
        CHECK(v[1].stage == "hold");
        for (const auto& e : v) CHECK(e.limit == 1.94);
    }
    SUBCASE("U wire, power and detuning")
    {
        SequenceSpec seq = default_sequence();
        stage(seq, "transfer").ramp(Channel::I_U) = Ramp{0.0, 5.5};
        stage(seq, "compression").ramp(Channel::I_U) = Ramp{5.5, 1.8};
        CHECK(validate(seq).size() == 2);  // one per stage

        seq = default_sequence();
        stage(seq, "compression").ramp(Channel::delta) = Ramp{-2.7, -60};
        CHECK(validate(seq).size() == 3);  // the detuning holds through trap_load and hold

        seq = default_sequence();
        stage(seq, "compression").ramp(Channel::P) = Ramp{8.5e-3, -1e-3};
        stage(seq, "trap_load").ramp(Channel::P) = Ramp{-1e-3, 0.0, RampShape::step};
        const auto v = validate(seq);
        REQUIRE(v.size() >= 1);
        CHECK(v[0].channel == Channel::P);
    }
    SUBCASE("limits just below the peak values are violated")
    {
        const SequenceSpec seq = default_sequence();
        HardwareLimits lim;
        lim.U_max = 0.9 * 3.0;
        CHECK_FALSE(validate(seq, lim).empty());
        lim = {};
        lim.Z_max_lasers_off = 0.9 * 1.5;
        CHECK_FALSE(validate(seq, lim).empty());
        lim = {};
        lim.detuning_max = 0.9 * 10.2;
        CHECK_FALSE(validate(seq, lim).empty());
    }
}

TEST_CASE("sequence file round trip")
{
    const SequenceSpec seq = default_sequence(1.25e-4, 0.2);
    std::stringstream s;
    write_sequence(s, seq);
    const SequenceSpec back = parse_sequence(s);
    REQUIRE(back.stages.size() == seq.stages.size());
    CHECK(back.initial == seq.initial);
    for (std::size_t i = 0; i < seq.stages.size(); ++i) {
        CHECK(back.stages[i].name == seq.stages[i].name);
        CHECK(back.stages[i].duration == seq.stages[i].duration);
        for (Channel c : kAllChannels) {
            const auto& a = seq.stages[i].ramp(c);
            const auto& b = back.stages[i].ramp(c);
            REQUIRE(a.has_value() == b.has_value());
            if (a) {
                CHECK(a->start == b->start);
                CHECK(a->end == b->end);
                CHECK(a->shape == b->shape);
            }
        }
    }
    std::stringstream again;
    write_sequence(again, back);
    CHECK(again.str() == s.str());
}

TEST_CASE("sequence file parsing")
{
    std::istringstream in(
        "[initial]\nI_Z = 0 A\nB_z = 6.26 G\nδ = -2.7 Gamma\nP = 1 mW\n"
        "[stage ramp]\nduration = 10 ms\nI_Z = 0 A -> 1.5 A\nP = 1 mW -> 0 mW step\n");
    CHECK_THROWS_AS(parse_sequence(in), ConfigError);  // step in a 10 ms stage

    std::istringstream ok(
        "[initial]\nI_Z = 0 A\nB_z = 6.26 G\n"
        "[stage ramp]\nduration = 10 ms\nI_Z = 0 A -> 1.5 A\n[stage hold]\nduration = 50 ms\n");
    const SequenceSpec seq = parse_sequence(ok);
    CHECK(value_at(seq, Channel::I_Z, 5e-3) == doctest::Approx(0.75));
    CHECK(value_at(seq, Channel::B_z, 0.03) == doctest::Approx(6.26e-4));

    std::istringstream bad("[initial]\nI_Z = 0 A\n[stage a]\nduration = 1 s\nI_W = 0 -> 1\n");
    try {
        parse_sequence(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 5);
    }
    std::istringstream units("[initial]\nI_Z = 1 G\n");
    CHECK_THROWS_AS(parse_sequence(units), ConfigError);
}

TEST_CASE("snapshots along the default sequence")
{
    const SequenceSpec seq = default_sequence();
    const ChipParameters chip;
    const double transfer_end = stage_end(seq, "transfer") - 1e-9;
    const double c0 = stage_begin(seq, "compression");
    const double c1 = stage_end(seq, "compression") - 1e-9;
    const double after_load = stage_end(seq, "trap_load") + 1e-6;
    std::vector<double> times{transfer_end};
    for (int k = 1; k <= 4; ++k) times.push_back(c0 + 0.25 * k * (c1 - c0));
    times.push_back(after_load);
    const auto snaps = snapshots(seq, chip, times);
    REQUIRE(snaps.size() == times.size());

    REQUIRE(snaps.front().quadrupole);
    CHECK(snaps.front().stage == "transfer");
    CHECK(snaps.front().distance_to_chip() > 1e-3);
    CHECK(snaps.front().distance_to_chip() < 4e-3);

    for (std::size_t i = 1; i + 1 < snaps.size(); ++i) {
        REQUIRE(snaps[i].quadrupole);
        CHECK(snaps[i].distance_to_chip() <= snaps[i - 1].distance_to_chip());
    }
    const double ratio = snaps[snaps.size() - 2].quadrupole->gradient_norm / snaps.front().quadrupole->gradient_norm;
    CHECK(ratio >= 20.0);

    REQUIRE(snaps.back().trap);
    CHECK(snaps.back().stage == "hold");
    CHECK(snaps.back().distance_to_chip() == doctest::Approx(440e-6).epsilon(0.15));
}

TEST_CASE("snapshot errors carry the time")
{
    SequenceSpec seq = default_sequence();
    ChipParameters chip;
    try {
        // A load that never switches the Z wire on leaves only uniform biases.
        stage(seq, "trap_load").ramp(Channel::I_Z) = Ramp{0.0, 0.0};
        snapshots(seq, chip, {stage_end(seq, "hold")});
        FAIL("expected NoTrapError");
    } catch (const NoTrapError& e) {
        CHECK(std::string(e.what()).find("t=") != std::string::npos);
    }
}

TEST_CASE("adiabaticity metric")
{
    const SequenceSpec seq = default_sequence();
    const ChipParameters chip;
    const double hold_mid = 0.5 * (stage_begin(seq, "hold") + stage_end(seq, "hold"));
    CHECK(adiabaticity_metric(seq, chip, SpinState{}, hold_mid) == 0.0);

    const double load_mid = 0.5 * (stage_begin(seq, "trap_load") + stage_end(seq, "trap_load"));
    CHECK(adiabaticity_metric(seq, chip, SpinState{}, load_mid) > 10.0);

    SUBCASE("time reversal")
    {
        SequenceSpec ramp;
        ramp.initial[static_cast<std::size_t>(Channel::I_Z)] = 1.2;
        ramp.initial[static_cast<std::size_t>(Channel::B_z)] = 6.26e-4;
        ramp.initial[static_cast<std::size_t>(Channel::B_x)] = 2.75e-4;
        Stage s{"squeeze", 0.1, {}};
        s.ramp(Channel::I_Z) = Ramp{1.2, 1.6};
        ramp.stages = {s};
        ramp.check();
        const SequenceSpec rev = time_reversed(ramp);
        CHECK(value_at(rev, Channel::I_Z, 0.0) == 1.6);
        for (double t : {0.03, 0.05, 0.07}) {
            const double a = adiabaticity_metric(ramp, chip, SpinState{}, t);
            const double b = adiabaticity_metric(rev, chip, SpinState{}, 0.1 - t);
            CHECK(a > 0.0);
            CHECK(b == doctest::Approx(a).epsilon(1e-6));
        }
        CHECK_THROWS_AS(time_reversed(default_sequence()), ConfigError);
    }
}

TEST_CASE("channel names")
{
    for (Channel c : kAllChannels) CHECK(parse_channel(channel_name(c)) == c);
    CHECK(parse_channel("δ") == Channel::delta);
    CHECK_THROWS_AS(parse_channel("I_W"), ConfigError);
}
