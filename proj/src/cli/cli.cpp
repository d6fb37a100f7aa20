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

#include "atomchip/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "atomchip/analysis.hpp"
#include "atomchip/chip_config.hpp"
#include "atomchip/ensemble.hpp"
#include "atomchip/errors.hpp"
#include "atomchip/fieldsolver.hpp"
#include "atomchip/report_json.hpp"
#include "atomchip/sequence.hpp"
#include "atomchip/svg.hpp"
#include "atomchip/trapanalysis.hpp"
#include "atomchip/units.hpp"

namespace atomchip {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
    std::string chip_path;
    std::string sequence_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir;
    bool plots = false;
    unsigned workers = 0;
    std::map<std::string, std::string> chip_overrides;
};

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

Vec3 parse_point(const std::string& text)
{
    const auto parts = split(text, ',');
    if (parts.size() != 3) throw ConfigError("expected a point 'x,y,z', got '" + text + "'");
    Vec3 p;
    for (int k = 0; k < 3; ++k) p[k] = parse_quantity_as(parts[static_cast<std::size_t>(k)], Dimension::length);
    return p;
}

std::pair<double, double> parse_range(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("expected a range 'lo:hi', got '" + text + "'");
    const double lo = parse_quantity_as(text.substr(0, colon), Dimension::length);
    const double hi = parse_quantity_as(text.substr(colon + 1), Dimension::length);
    if (!(hi > lo)) throw ConfigError("range '" + text + "' must have hi > lo");
    return {lo, hi};
}

std::vector<double> parse_times(const std::string& text)
{
    std::vector<double> out;
    for (const auto& part : split(text, ',')) {
        if (part.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(parse_quantity_as(part, Dimension::time));
    }
    if (out.empty()) throw ConfigError("empty time list");
    return out;
}

ChipParameters load_chip(const GlobalOptions& g)
{
    ChipParameters p = g.chip_path.empty() ? ChipParameters{} : load_chip_config(g.chip_path);
    for (const auto& [name, text] : g.chip_overrides) {
        const auto& table = chip_parameter_table();
        const auto it = std::find_if(table.begin(), table.end(), [&](const ParameterInfo& i) { return i.name == name; });
        p.set(name, parse_quantity_as(text, it->dimension));
    }
    return p;
}

SequenceSpec load_seq(const GlobalOptions& g, const ChipParameters& chip)
{
    return g.sequence_path.empty() ? default_sequence(chip.Bx) : load_sequence(g.sequence_path);
}

fs::path output_dir(const GlobalOptions& g)
{
    fs::path dir = g.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("ATOMCHIP_OUT");
        dir = env && *env ? env : ".";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    return f;
}

SpinState parse_spin(const std::string& text)
{
    const auto parts = split(text, ',');
    if (parts.size() != 2) throw ConfigError("expected spin 'F,mF', got '" + text + "'");
    try {
        return SpinState::rubidium87(std::stoi(parts[0]), std::stoi(parts[1]));
    } catch (const std::logic_error&) {
        throw ConfigError("expected spin 'F,mF', got '" + text + "'");
    }
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const
    {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("input has no column '" + name + "'");
        const auto k = static_cast<std::size_t>(it - header.begin());
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r.at(k));
        return out;
    }
};

Table read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    Table t;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line, ',');
        if (t.header.empty()) {
            t.header = cells;
            continue;
        }
        if (cells.size() != t.header.size()) throw ConfigError(path + ": wrong number of columns", line_no);
        std::vector<double> row;
        for (const auto& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            // Non-numeric cells (e.g. a stage name) read as NaN.
            row.push_back(end != c.c_str() && *end == '\0' ? v : std::nan(""));
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty() || t.rows.empty()) throw ConfigError(path + ": no data rows");
    return t;
}

void emit_json(std::ostream& out, const fs::path& path, const nlohmann::json& j)
{
    const std::string text = j.dump(2) + "\n";
    out << text;
    open_out(path) << text;
}

// --- field-map -------------------------------------------------------------

struct FieldMapOptions {
    std::vector<std::string> planes{"yz"};
    std::string at = "0";
    std::string u_range;
    std::string v_range;
    int n = 21;
};

std::pair<double, double> default_range(int axis)
{
    switch (axis) {
    case 0: return {-2e-3, 2e-3};
    case 1: return {50e-6, 1050e-6};
    default: return {-500e-6, 500e-6};
    }
}

int cmd_field_map(const GlobalOptions& g, const FieldMapOptions& o, std::ostream& out)
{
    const ChipAssembly chip = build_chip(load_chip(g));
    const fs::path dir = output_dir(g);
    if (o.n < 1) throw ConfigError("--n must be at least 1");
    static const char* axis_names = "xyz";
    for (const auto& plane : o.planes) {
        if (plane.size() != 2 || plane[0] == plane[1]) throw ConfigError("plane must be one of xy, yz, xz");
        const auto ia = std::string("xyz").find(plane[0]);
        const auto ib = std::string("xyz").find(plane[1]);
        if (ia == std::string::npos || ib == std::string::npos || ia > ib) {
            throw ConfigError("plane must be one of xy, yz, xz");
        }
        const int a = static_cast<int>(ia);
        const int b = static_cast<int>(ib);
        const int c = 3 - a - b;
        const auto ra = o.u_range.empty() ? default_range(a) : parse_range(o.u_range);
        const auto rb = o.v_range.empty() ? default_range(b) : parse_range(o.v_range);

        GridSpec spec;
        spec.origin[a] = ra.first;
        spec.origin[b] = rb.first;
        spec.origin[c] = parse_quantity_as(o.at, Dimension::length);
        spec.spacing[a] = o.n > 1 ? (ra.second - ra.first) / (o.n - 1) : 0.0;
        spec.spacing[b] = o.n > 1 ? (rb.second - rb.first) / (o.n - 1) : 0.0;
        spec.dims = {1, 1, 1};
        spec.dims[static_cast<std::size_t>(a)] = o.n;
        spec.dims[static_cast<std::size_t>(b)] = o.n;

        const FieldGrid grid = field_map(chip, spec, g.workers);
        const fs::path csv = dir / ("field_map_" + plane + ".csv");
        auto f = open_out(csv);
        write_field_grid_csv(f, grid);
        out << "wrote " << csv.string() << " (" << grid.samples.size() << " points)\n";

        if (g.plots) {
            Heatmap h;
            h.nx = o.n;
            h.ny = o.n;
            h.values.resize(grid.samples.size());
            for (std::size_t i = 0; i < grid.samples.size(); ++i) {
                const Vec3 d = grid.samples[i].point - spec.origin;
                const int ii = spec.spacing[a] > 0 ? static_cast<int>(std::lround(d[a] / spec.spacing[a])) : 0;
                const int jj = spec.spacing[b] > 0 ? static_cast<int>(std::lround(d[b] / spec.spacing[b])) : 0;
                h.values[static_cast<std::size_t>(jj) * o.n + ii] = grid.samples[i].magnitude * 1e4;
            }
            h.x_min = ra.first * 1e3;
            h.x_max = ra.second * 1e3;
            h.y_min = rb.first * 1e3;
            h.y_max = rb.second * 1e3;
            h.title = std::string("|B| in the ") + plane + " plane at " + axis_names[c] + " = " + o.at;
            h.x_label = std::string(1, axis_names[a]) + " (mm)";
            h.y_label = std::string(1, axis_names[b]) + " (mm)";
            h.value_label = "|B| (G)";
            const fs::path svg = dir / ("field_map_" + plane + ".svg");
            auto s = open_out(svg);
            write_heatmap_svg(s, h);
            out << "wrote " << svg.string() << "\n";
        }
    }
    return kExitOk;
}

// --- trap ------------------------------------------------------------------

struct TrapOptions {
    std::string start = "0,1mm,0";
    std::string spin = "2,2";
};

int cmd_trap(const GlobalOptions& g, const TrapOptions& o, std::ostream& out, std::ostream& err)
{
    const ChipAssembly chip = build_chip(load_chip(g));
    const TrapReport r = characterize(chip, parse_spin(o.spin), parse_point(o.start));
    emit_json(out, output_dir(g) / "trap.json", to_json(r));
    char buf[256];
    std::snprintf(buf, sizeof buf, "distance %.1f um, B0 %.4g G, frequencies %.3g / %.3g / %.3g Hz, depth %.4g uK\n",
                  r.distance_to_chip * 1e6, r.B0 * 1e4, r.frequencies[0], r.frequencies[1], r.frequencies[2],
                  r.depth_microkelvin());
    err << buf;
    return kExitOk;
}

// --- sequence --------------------------------------------------------------

int cmd_sequence_validate(const GlobalOptions& g, std::ostream& out)
{
    const SequenceSpec seq = load_seq(g, load_chip(g));
    const auto violations = validate(seq);
    for (const auto& v : violations) out << format_violation(v) << '\n';
    return violations.empty() ? kExitOk : kExitValidation;
}

struct SnapshotOptions {
    std::string times;
    std::string spin = "2,2";
};

int cmd_sequence_snapshots(const GlobalOptions& g, const SnapshotOptions& o, std::ostream& out)
{
    const ChipParameters chip = load_chip(g);
    const SequenceSpec seq = load_seq(g, chip);
    std::vector<double> times;
    if (o.times.empty()) {
        // End of transfer, through compression, then into the hold.
        for (std::size_t i = 0; i < seq.stages.size(); ++i) {
            const double t0 = seq.stage_start(i);
            const double t1 = t0 + seq.stages[i].duration;
            const std::string& name = seq.stages[i].name;
            if (name == "transfer") times.push_back(t1 - 1e-9);
            if (name == "compression") {
                for (int k = 1; k <= 4; ++k) times.push_back(t0 + k * 0.25 * (t1 - t0) - (k == 4 ? 1e-9 : 0.0));
            }
            if (name == "hold") times.push_back(t0 + 1e-6);
        }
        if (times.empty()) times.push_back(seq.total_duration());
    } else {
        times = parse_times(o.times);
    }
    const auto snaps = snapshots(seq, chip, times, parse_spin(o.spin));

    const fs::path csv = output_dir(g) / "snapshots.csv";
    auto f = open_out(csv);
    const std::string header = "t_s,stage,kind,distance_um,B0_G,gradient_norm_G_per_cm,f1_Hz,f2_Hz,f3_Hz\n";
    f << header;
    out << header;
    double grad_transfer = 0.0;
    double grad_compression = 0.0;
    for (const auto& s : snaps) {
        char buf[512];
        if (s.quadrupole) {
            std::snprintf(buf, sizeof buf, "%.9g,%s,quadrupole,%.6g,0,%.6g,,,\n", s.t, s.stage.c_str(),
                          s.distance_to_chip() * 1e6, s.quadrupole->gradient_norm * 100.0);
            if (s.stage == "transfer") grad_transfer = s.quadrupole->gradient_norm;
            if (s.stage == "compression") grad_compression = s.quadrupole->gradient_norm;
        } else {
            std::snprintf(buf, sizeof buf, "%.9g,%s,ioffe,%.6g,%.6g,,%.6g,%.6g,%.6g\n", s.t, s.stage.c_str(),
                          s.distance_to_chip() * 1e6, s.trap->B0 * 1e4, s.trap->frequencies[0],
                          s.trap->frequencies[1], s.trap->frequencies[2]);
        }
        f << buf;
        out << buf;
    }
    if (grad_transfer > 0.0 && grad_compression > 0.0) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "gradient ratio compression/transfer = %.4g\n", grad_compression / grad_transfer);
        out << buf;
    }
    return kExitOk;
}

// --- simulate --------------------------------------------------------------

struct SimulateOptions {
    std::size_t N = 5000;
    std::string temperature = "40uK";
    std::string cloud = "trap";
    std::string t_end = "10s";
    std::string hold_times;
    int points = 40;
    std::string dt = "auto";
    std::string losses = "all";
    std::string tau;
    std::string pressure;
    double chi = kSpinFlipRatio;
    std::string start_stage = "trap_load";
    std::string tof_times = "0,2ms,4ms,6ms,8ms,10ms";
    std::string hold = "0";
    std::string start = "0,1mm,0";
};

LossConfig parse_losses(const SimulateOptions& o)
{
    LossConfig c = LossConfig::none();
    if (o.losses == "all") {
        c = LossConfig{};
    } else if (o.losses != "none") {
        for (const auto& part : split(o.losses, ',')) {
            if (part == "surface") c.surface = true;
            else if (part == "spinflip" || part == "spin_flip") c.spin_flip = true;
            else if (part == "background") c.background = true;
            else if (part == "untrapped") c.untrapped = true;
            else throw ConfigError("unknown loss channel '" + part + "'");
        }
    }
    c.chi = o.chi;
    if (!o.tau.empty() && !o.pressure.empty()) throw ConfigError("give either --tau or --pressure, not both");
    if (!o.tau.empty()) c.background_lifetime = parse_quantity_as(o.tau, Dimension::time);
    if (!o.pressure.empty()) c.background_lifetime = infer_lifetime(parse_quantity_as(o.pressure, Dimension::pressure));
    if (c.background && c.background_lifetime <= 0.0) c.background_lifetime = default_background_lifetime();
    return c;
}

struct Setup {
    FieldSchedule schedule;
    CloudSpec cloud;
    Vec3 trap_center = Vec3::Zero();
    double schedule_start = 0.0;
};

Setup make_setup(const GlobalOptions& g, const SimulateOptions& o)
{
    const ChipParameters chip = load_chip(g);
    Setup s;
    if (g.sequence_path.empty()) {
        const ChipAssembly assembly = build_chip(chip);
        s.schedule = FieldSchedule::constant(assembly);
        const TrapReport r = characterize(assembly, SpinState{}, parse_point(o.start));
        s.trap_center = r.position;
    } else {
        const SequenceSpec seq = load_seq(g, chip);
        double t0 = 0.0;
        bool found = false;
        for (std::size_t i = 0; i < seq.stages.size(); ++i) {
            if (seq.stages[i].name == o.start_stage) {
                t0 = seq.stage_start(i);
                found = true;
            }
        }
        if (!found) throw ConfigError("sequence has no stage '" + o.start_stage + "'");
        s.schedule = FieldSchedule::sequence(seq, chip, t0);
        s.schedule_start = t0;
        s.trap_center = CloudSpec::compressed_mot().center;
    }
    if (o.cloud == "trap") {
        s.cloud = CloudSpec::magnetic_trap(s.trap_center);
    } else if (o.cloud == "mot") {
        s.cloud = CloudSpec::compressed_mot();
    } else {
        throw ConfigError("--cloud must be 'trap' or 'mot'");
    }
    s.cloud.N = o.N;
    s.cloud.temperature = parse_quantity_as(o.temperature, Dimension::temperature);
    return s;
}

double resolve_dt(const SimulateOptions& o, const Setup& s, double t_end)
{
    if (o.dt != "auto") return parse_quantity_as(o.dt, Dimension::time);
    const double t_ref = s.schedule.reference_time(t_end);
    return suggested_dt(s.schedule, t_ref, s.trap_center);
}

void require_seed(const GlobalOptions& g)
{
    if (!g.seed_given) throw ConfigError("simulate needs an explicit --seed");
}

nlohmann::json run_metadata(const GlobalOptions& g, const SimulateOptions& o, const Setup& s, double dt)
{
    nlohmann::json j;
    j["seed"] = g.seed;
    j["dt_s"] = dt;
    j["N"] = s.cloud.N;
    j["temperature_K"] = s.cloud.temperature;
    j["cloud"] = o.cloud;
    j["cloud_center_m"] = {s.cloud.center.x(), s.cloud.center.y(), s.cloud.center.z()};
    j["losses"] = o.losses;
    j["chi"] = o.chi;
    j["chip"] = g.chip_path;
    j["sequence"] = g.sequence_path;
    return j;
}

int cmd_simulate_decay(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out)
{
    require_seed(g);
    const Setup s = make_setup(g, o);
    std::vector<double> holds;
    if (!o.hold_times.empty()) {
        holds = parse_times(o.hold_times);
    } else {
        const double t_end = parse_quantity_as(o.t_end, Dimension::time);
        if (o.points < 1) throw ConfigError("--points must be at least 1");
        for (int k = 0; k < o.points; ++k) {
            holds.push_back(o.points == 1 ? t_end : 50e-3 + (t_end - 50e-3) * k / (o.points - 1));
        }
    }
    const LossConfig losses = parse_losses(o);
    const double dt = resolve_dt(o, s, holds.back());
    const SimResult r = decay_curve(s.schedule, s.cloud, holds, losses, g.seed, dt, g.workers);

    const fs::path dir = output_dir(g);
    {
        auto f = open_out(dir / "decay.csv");
        write_decay_csv(f, r);
    }
    {
        auto f = open_out(dir / "atoms_final.csv");
        write_atoms_csv(f, r.atoms);
    }
    nlohmann::json meta = run_metadata(g, o, s, dt);
    meta["background_lifetime_s"] = losses.background ? losses.background_lifetime : 0.0;
    meta["steps"] = r.steps;
    open_out(dir / "run.json") << meta.dump(2) << "\n";
    if (g.plots) {
        PlotSeries series{"N alive", {}, {}, true};
        for (const auto& rec : r.records) {
            series.x.push_back(rec.t);
            series.y.push_back(static_cast<double>(rec.alive));
        }
        auto f = open_out(dir / "decay.svg");
        write_line_plot_svg(f, {series}, {"Atoms in the trap", "hold time (s)", "N", true});
    }
    const auto& last = r.records.back();
    char buf[256];
    std::snprintf(buf, sizeof buf, "seed=%llu dt=%.9g N0=%zu N_final=%zu T_final=%.4g uK\n",
                  static_cast<unsigned long long>(g.seed), dt, r.records.front().alive, last.alive,
                  last.temperature * 1e6);
    out << buf;
    return kExitOk;
}

int cmd_simulate_tof(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out)
{
    require_seed(g);
    const Setup s = make_setup(g, o);
    std::vector<Atom> atoms = sample_cloud(s.cloud, g.seed);
    const double hold = parse_quantity_as(o.hold, Dimension::time);
    double dt = 0.0;
    if (hold > 0.0) {
        dt = resolve_dt(o, s, hold);
        EvolveOptions eo;
        eo.dt = dt;
        eo.record_times = {hold};
        eo.losses = parse_losses(o);
        eo.seed = g.seed;
        eo.workers = g.workers;
        atoms = evolve(s.schedule, std::move(atoms), eo).atoms;
    }
    const auto times = parse_times(o.tof_times);
    const fs::path dir = output_dir(g);
    auto f = open_out(dir / "tof.csv");
    const std::string header = "t_s,center_x_m,center_y_m,center_z_m,sigma_x_m,sigma_y_m,sigma_z_m,N\n";
    f << header;
    PlotSeries sx{"sigma_x", {}, {}, true};
    PlotSeries sy{"sigma_y", {}, {}, true};
    PlotSeries sz{"sigma_z", {}, {}, true};
    for (double t : times) {
        const TofResult r = time_of_flight(atoms, t, s.schedule.source_at(0.0)->gravity());
        char buf[512];
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%zu\n", t, r.center.x(), r.center.y(),
                      r.center.z(), r.widths.x(), r.widths.y(), r.widths.z(), r.atoms.size());
        f << buf;
        sx.x.push_back(t * 1e3);
        sy.x.push_back(t * 1e3);
        sz.x.push_back(t * 1e3);
        sx.y.push_back(r.widths.x() * 1e6);
        sy.y.push_back(r.widths.y() * 1e6);
        sz.y.push_back(r.widths.z() * 1e6);
    }
    nlohmann::json meta = run_metadata(g, o, s, dt);
    meta["hold_s"] = hold;
    open_out(dir / "run.json") << meta.dump(2) << "\n";
    if (g.plots) {
        auto p = open_out(dir / "tof.svg");
        write_line_plot_svg(p, {sx, sy, sz}, {"Time-of-flight expansion", "flight time (ms)", "width (um)", false});
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "seed=%llu dt=%.9g N=%zu\n", static_cast<unsigned long long>(g.seed), dt,
                  atoms.size());
    out << buf;
    return kExitOk;
}

// --- fit -------------------------------------------------------------------

struct FitCliOptions {
    std::string input;
    std::string time_column = "t_s";
    std::string column;
    std::string weights = "none";
    std::string axis = "x";
    std::string mass;
    std::string tau;
    std::string sigma = "100A2";
    std::string gas = "He";
    std::string gas_temperature = "4.2";
    int max_iterations = 500;
};

int cmd_fit(const GlobalOptions& g, const std::string& which, const FitCliOptions& o, std::ostream& out)
{
    const fs::path dir = output_dir(g);
    const fs::path json_path = dir / ("fit_" + which + ".json");
    if (which == "pressure") {
        if (o.tau.empty()) throw ConfigError("fit pressure needs --tau");
        PressureQuery q;
        q.lifetime = parse_quantity_as(o.tau, Dimension::time);
        q.cross_section = parse_quantity_as(o.sigma, Dimension::area);
        q.gas_temperature = parse_quantity_as(o.gas_temperature, Dimension::temperature);
        q.gas_mass = o.mass.empty() ? gas_mass(o.gas) : parse_quantity_as(o.mass, Dimension::mass);
        emit_json(out, json_path, to_json(q, infer_pressure(q)));
        return kExitOk;
    }
    if (o.input.empty()) throw ConfigError("fit " + which + " needs --input");
    const Table t = read_csv(o.input);
    FitOptions fo;
    fo.weighting = parse_weighting(o.weights);
    fo.max_iterations = o.max_iterations;
    try {
        FitResult r;
        if (which == "biexp") {
            r = fit_biexponential(t.column(o.time_column), t.column(o.column.empty() ? "N_alive" : o.column), fo);
        } else if (which == "expdecay") {
            r = fit_exponential_decay(t.column(o.time_column), t.column(o.column.empty() ? "T_kinetic_K" : o.column),
                                      fo);
        } else {
            const double mass = o.mass.empty() ? constants::rb87_mass : parse_quantity_as(o.mass, Dimension::mass);
            r = fit_tof(t.column(o.time_column), t.column(o.column.empty() ? "sigma_" + o.axis + "_m" : o.column), mass);
        }
        emit_json(out, json_path, to_json(r));
    } catch (const FitError& e) {
        nlohmann::json j = to_json(e.best());
        j["error"] = e.what();
        emit_json(out, json_path, j);
        throw;
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Atom-chip magnetic trap toolkit: fields, traps, sequences, Monte-Carlo and fits."};
    app.name("atomchip");
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--chip", g.chip_path, "Chip configuration file");
    app.add_option("--sequence", g.sequence_path, "Sequence file");
    auto* seed_opt = app.add_option("--seed", g.seed, "Master random seed");
    app.add_option("--out", g.out_dir, "Output directory (default: $ATOMCHIP_OUT or .)");
    app.add_flag("--plots", g.plots, "Also write SVG plots");
    app.add_option("--workers", g.workers, "Worker threads (0: all cores); never changes results");
    std::map<std::string, CLI::Option*> override_opts;
    for (const auto& info : chip_parameter_table()) {
        const std::string name(info.name);
        override_opts[name] = app.add_option("--" + name, g.chip_overrides[name],
                                             std::string(info.description) + " [" +
                                                 std::string(unit_symbol(info.display_unit)) + "]")
                                  ->group("Chip parameters");
    }

    FieldMapOptions fm;
    auto* field_cmd = app.add_subcommand("field-map", "Field on a plane of grid points");
    field_cmd->add_option("--plane", fm.planes, "Plane(s): xy, yz, xz");
    field_cmd->add_option("--at", fm.at, "Coordinate of the plane along its normal axis");
    field_cmd->add_option("--u-range", fm.u_range, "Range of the first in-plane axis, lo:hi");
    field_cmd->add_option("--v-range", fm.v_range, "Range of the second in-plane axis, lo:hi");
    field_cmd->add_option("--n", fm.n, "Points per axis");

    TrapOptions tr;
    auto* trap_cmd = app.add_subcommand("trap", "Locate and characterize the magnetic trap");
    trap_cmd->add_option("--start", tr.start, "Search start point x,y,z");
    trap_cmd->add_option("--spin", tr.spin, "Hyperfine state F,mF");

    auto* seq_cmd = app.add_subcommand("sequence", "Experimental sequence tools");
    seq_cmd->require_subcommand(1);
    auto* validate_cmd = seq_cmd->add_subcommand("validate", "Check hardware limits");
    SnapshotOptions so;
    auto* snap_cmd = seq_cmd->add_subcommand("snapshots", "Trap or quadrupole reports along the sequence");
    snap_cmd->add_option("--times", so.times, "Comma-separated times");
    snap_cmd->add_option("--spin", so.spin, "Hyperfine state F,mF");

    SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo simulation of the trapped cloud");
    sim_cmd->require_subcommand(1);
    auto add_sim_common = [&](CLI::App* c) {
        c->add_option("--N", sim.N, "Number of atoms");
        c->add_option("--T", sim.temperature, "Initial temperature");
        c->add_option("--cloud", sim.cloud, "Initial cloud: trap or mot");
        c->add_option("--dt", sim.dt, "Time step or 'auto' (1/(50 f_max))");
        c->add_option("--losses", sim.losses, "all, none or a list of surface,spinflip,background,untrapped");
        c->add_option("--tau", sim.tau, "Background-gas lifetime");
        c->add_option("--pressure", sim.pressure, "Background pressure (sets the lifetime)");
        c->add_option("--chi", sim.chi, "Spin-flip threshold ratio");
        c->add_option("--start-stage", sim.start_stage, "Sequence stage at which the simulation starts");
        c->add_option("--start", sim.start, "Trap search start point x,y,z");
    };
    auto* decay_cmd = sim_cmd->add_subcommand("decay", "Atom number versus hold time");
    add_sim_common(decay_cmd);
    decay_cmd->add_option("--t-end", sim.t_end, "Last hold time");
    decay_cmd->add_option("--points", sim.points, "Number of hold times from 50 ms to --t-end");
    decay_cmd->add_option("--hold-times", sim.hold_times, "Explicit comma-separated hold times");
    auto* tof_cmd = sim_cmd->add_subcommand("tof", "Ballistic expansion after release");
    add_sim_common(tof_cmd);
    tof_cmd->add_option("--times", sim.tof_times, "Comma-separated flight times");
    tof_cmd->add_option("--hold", sim.hold, "Hold time in the trap before release");

    FitCliOptions fo;
    auto* fit_cmd = app.add_subcommand("fit", "Curve fits and pressure inference");
    fit_cmd->require_subcommand(1);
    std::map<std::string, CLI::App*> fit_cmds;
    for (const char* name : {"biexp", "tof", "expdecay"}) {
        auto* c = fit_cmd->add_subcommand(name, std::string("Fit ") + name + " model to a CSV file");
        c->add_option("--input", fo.input, "Input CSV");
        c->add_option("--time-column", fo.time_column, "Time column");
        c->add_option("--column", fo.column, "Value column");
        c->add_option("--weights", fo.weights, "none, poisson or relative");
        c->add_option("--axis", fo.axis, "TOF axis: x, y or z");
        c->add_option("--mass", fo.mass, "Atomic mass");
        c->add_option("--max-iterations", fo.max_iterations, "Iteration limit of the nonlinear fits");
        fit_cmds[name] = c;
    }
    auto* pressure_cmd = fit_cmd->add_subcommand("pressure", "Background pressure from a trap lifetime");
    pressure_cmd->add_option("--tau", fo.tau, "Trap lifetime")->required();
    pressure_cmd->add_option("--sigma", fo.sigma, "Collision cross-section");
    pressure_cmd->add_option("--gas", fo.gas, "Background gas species");
    pressure_cmd->add_option("--T", fo.gas_temperature, "Gas temperature");
    pressure_cmd->add_option("--mass", fo.mass, "Gas mass (overrides --gas)");
    fit_cmds["pressure"] = pressure_cmd;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    g.seed_given = seed_opt->count() > 0;
    for (auto it = g.chip_overrides.begin(); it != g.chip_overrides.end();) {
        if (override_opts[it->first]->count() == 0) it = g.chip_overrides.erase(it);
        else ++it;
    }

    try {
        if (field_cmd->parsed()) return cmd_field_map(g, fm, out);
        if (trap_cmd->parsed()) return cmd_trap(g, tr, out, err);
        if (validate_cmd->parsed()) return cmd_sequence_validate(g, out);
        if (snap_cmd->parsed()) return cmd_sequence_snapshots(g, so, out);
        if (decay_cmd->parsed()) return cmd_simulate_decay(g, sim, out);
        if (tof_cmd->parsed()) return cmd_simulate_tof(g, sim, out);
        for (const auto& [name, c] : fit_cmds) {
            if (c->parsed()) return cmd_fit(g, name, fo, out);
        }
        err << "error: no command given\n";
        return kExitConfig;
    } catch (const SingularityError& e) {
        err << "singularity: " << e.what() << "\n";
        return kExitSingularity;
    } catch (const NoTrapError& e) {
        err << "no trap: " << e.what() << "\n";
        return kExitNoTrap;
    } catch (const UnphysicalTrapError& e) {
        err << "no trap: " << e.what() << "\n";
        return kExitNoTrap;
    } catch (const SaddlePointError& e) {
        err << "no trap: " << e.what() << "\n";
        return kExitNoTrap;
    } catch (const FitError& e) {
        err << "fit failed: " << e.what() << "\n";
        return kExitFit;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace atomchip
