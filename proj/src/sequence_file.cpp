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

#include <charconv>
#include <fstream>
#include <ostream>

#include "atomchip/errors.hpp"
#include "atomchip/sequence.hpp"
#include "ini.hpp"

namespace atomchip {

namespace {

std::string shortest(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string_view si_symbol(Channel c)
{
    switch (channel_dimension(c)) {
    case Dimension::current: return "A";
    case Dimension::magnetic_field: return "T";
    case Dimension::power: return "W";
    default: return "Gamma";
    }
}

Ramp parse_ramp(const std::string& text, Channel c)
{
    const auto arrow = text.find("->");
    if (arrow == std::string::npos) throw ConfigError("expected '<start> -> <end> [linear|step]'");
    std::string rhs = detail::trim(std::string_view(text).substr(arrow + 2));
    Ramp r;
    const auto space = rhs.find_last_of(" \t");
    if (space != std::string::npos) {
        const std::string word = rhs.substr(space + 1);
        if (word == "step" || word == "linear") {
            r.shape = word == "step" ? RampShape::step : RampShape::linear;
            rhs = detail::trim(std::string_view(rhs).substr(0, space));
        }
    }
    r.start = parse_quantity_as(detail::trim(std::string_view(text).substr(0, arrow)), channel_dimension(c));
    r.end = parse_quantity_as(rhs, channel_dimension(c));
    return r;
}

}  // namespace

SequenceSpec parse_sequence(std::istream& in)
{
    SequenceSpec seq;
    std::array<bool, kChannelCount> initial_seen{};
    Stage* stage = nullptr;
    bool duration_seen = false;
    int header_line = 0;

    auto finish_stage = [&] {
        if (stage && !duration_seen) throw ConfigError("stage '" + stage->name + "' has no duration", header_line);
    };

    for (const auto& e : detail::parse_ini(in)) {
        if (e.is_section_header) {
            finish_stage();
            header_line = e.line;
            if (e.section == "initial") {
                stage = nullptr;
            } else if (e.section.rfind("stage", 0) == 0 && e.section.size() > 5 &&
                       (e.section[5] == ' ' || e.section[5] == '\t')) {
                seq.stages.push_back({detail::trim(std::string_view(e.section).substr(5)), 0.0, {}});
                stage = &seq.stages.back();
                duration_seen = false;
            } else {
                throw ConfigError("unknown section [" + e.section + "]; expected [initial] or [stage <name>]", e.line);
            }
            continue;
        }
        try {
            if (e.section.empty()) throw ConfigError("entry outside [initial] or [stage] section");
            if (!stage) {
                const Channel c = parse_channel(e.key);
                const auto i = static_cast<std::size_t>(c);
                if (initial_seen[i]) throw ConfigError("duplicate initial value for " + e.key);
                initial_seen[i] = true;
                seq.initial[i] = parse_quantity_as(e.value, channel_dimension(c));
            } else if (e.key == "duration") {
                if (duration_seen) throw ConfigError("duplicate duration");
                duration_seen = true;
                stage->duration = parse_quantity_as(e.value, Dimension::time);
            } else {
                const Channel c = parse_channel(e.key);
                if (stage->ramp(c)) throw ConfigError("duplicate ramp for " + e.key);
                stage->ramp(c) = parse_ramp(e.value, c);
            }
        } catch (const ConfigError& err) {
            if (err.line() > 0) throw;
            throw ConfigError(err.what(), e.line);
        }
    }
    finish_stage();
    seq.check();
    return seq;
}

SequenceSpec load_sequence(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sequence file '" + path.string() + "'");
    try {
        return parse_sequence(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_sequence(std::ostream& out, const SequenceSpec& seq)
{
    out << "# atomchip sequence, version 1\n";
    out << "# Ramps: <channel> = <start> -> <end> [linear|step]; omitted channels hold.\n\n";
    out << "[initial]\n";
    for (Channel c : kAllChannels) {
        out << channel_name(c) << " = " << shortest(seq.initial_value(c)) << ' ' << si_symbol(c) << '\n';
    }
    for (const Stage& s : seq.stages) {
        out << "\n[stage " << s.name << "]\n";
        out << "duration = " << shortest(s.duration) << " s\n";
        for (Channel c : kAllChannels) {
            const auto& r = s.ramp(c);
            if (!r) continue;
            out << channel_name(c) << " = " << shortest(r->start) << ' ' << si_symbol(c) << " -> " << shortest(r->end)
                << ' ' << si_symbol(c) << (r->shape == RampShape::step ? " step" : " linear") << '\n';
        }
    }
}

}  // namespace atomchip
