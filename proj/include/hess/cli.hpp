#pragma once

// Command-line front end. Exit codes: 0 success, 1 simulation abort, 2 input or config error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hess/analysis_sizing.hpp"
#include "hess/config.hpp"
#include "hess/drive_cycle.hpp"
#include "hess/ems_core.hpp"
#include "hess/errors.hpp"
#include "hess/report.hpp"
#include "hess/sg_filter.hpp"

namespace hess {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSimulation = 1;
inline constexpr int kExitInput = 2;

enum class Command { simulate, compare, sweep, filter_demo };

struct RunManifest {
    Command command = Command::simulate;
    std::vector<std::string> configs;
    std::vector<std::string> cycles;
    std::vector<std::string> modes;
    std::string speed_unit = "mps";
    std::string out_dir = ".";
    std::vector<std::string> formats{"json", "csv"};
    std::string monomers;
    std::string input;
    std::string column;
    int half_width = 5;
    int max_order = 4;
    int mode2_order = 2;
    std::vector<int> mode2_half_widths{3, 5, 7};
};

namespace detail {

inline SimConfig config_or_default(const std::vector<std::string>& paths, std::size_t i) {
    if (paths.empty()) return SimConfig{};
    return load_config_file(paths[std::min(i, paths.size() - 1)]);
}

inline DriveCycle load_named_cycle(const std::string& path, SpeedUnit unit) {
    auto c = load_cycle_file(path, unit);
    c.name = std::filesystem::path(path).stem().string();
    return c;
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (!std::filesystem::is_directory(p)) throw InputError("cannot create output directory '" + dir + "'");
    return p;
}

inline bool wants(const RunManifest& m, const std::string& fmt) {
    return std::find(m.formats.begin(), m.formats.end(), fmt) != m.formats.end();
}

// Run metadata lives beside the payloads so the payloads stay reproducible.
inline void write_meta(const std::filesystem::path& dir, const std::string& command, int argc,
                       const char* const* argv) {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    json j;
    j["command"] = command;
    j["unix_time"] = secs;
    json args = json::array();
    for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
    j["argv"] = args;
    write_file_atomic(dir / "run.meta.json", dump_json(j));
}

} // namespace detail

inline int cmd_simulate(const RunManifest& m, std::ostream& out) {
    if (m.cycles.size() != 1) throw InputError("simulate needs exactly one --cycle");
    SimConfig cfg = detail::config_or_default(m.configs, 0);
    if (!m.modes.empty()) cfg.mode = parse_mode(m.modes.front());
    const auto cycle = detail::load_named_cycle(m.cycles.front(), parse_speed_unit(m.speed_unit));
    const auto rep = run_simulation(cycle, cfg);
    const auto metrics = summarize(rep, cfg);
    const auto dir = detail::prepare_out_dir(m.out_dir);
    if (detail::wants(m, "json")) write_file_atomic(dir / "report.json", dump_json(report_to_json(rep, metrics, cfg, cycle)));
    if (detail::wants(m, "csv")) write_file_atomic(dir / "trace.csv", trace_csv(rep));
    out << to_string(rep.mode) << ": q_total_loss=" << metrics.q_total_loss << " kJ, i_bat_max=" << metrics.i_bat_max
        << " A, delta_i_max=" << metrics.delta_i_max << " A\n";
    return kExitOk;
}

inline int cmd_compare(const RunManifest& m, std::ostream& out) {
    if (m.cycles.empty() || m.cycles.size() > 2) throw InputError("compare needs one or two --cycle values");
    if (m.configs.size() > 2) throw InputError("compare takes at most two --config values");
    if (m.modes.size() > 2) throw InputError("compare takes at most two --mode values");
    const auto unit = parse_speed_unit(m.speed_unit);
    const auto cycle_a = detail::load_named_cycle(m.cycles.front(), unit);
    if (m.cycles.size() == 2) {
        const auto cycle_b = detail::load_named_cycle(m.cycles.back(), unit);
        if (!(cycle_a == cycle_b)) {
            throw InputError("cycle mismatch: '" + m.cycles.front() + "' and '" + m.cycles.back() +
                             "' differ; both runs must share the cycle");
        }
    }
    SimConfig a = detail::config_or_default(m.configs, 0);
    SimConfig b = detail::config_or_default(m.configs, 1);
    if (m.modes.size() == 2) {
        a.mode = parse_mode(m.modes[0]);
        b.mode = parse_mode(m.modes[1]);
    } else if (m.modes.size() == 1) {
        a.mode = b.mode = parse_mode(m.modes[0]);
    } else if (m.configs.size() < 2) {
        a.mode = Mode::single_ess;
        b.mode = Mode::hess;
    }
    const auto ma = summarize(run_simulation(cycle_a, a), a);
    const auto mb = summarize(run_simulation(cycle_a, b), b);
    const auto cmp = compare(ma, mb);
    const std::string la = std::string(to_string(a.mode)) + (m.configs.empty() ? "" : ":" + m.configs.front());
    const std::string lb = std::string(to_string(b.mode)) + (m.configs.empty() ? "" : ":" + m.configs.back());
    const auto dir = detail::prepare_out_dir(m.out_dir);
    write_file_atomic(dir / "compare.json", dump_json(comparison_to_json(cmp, la, lb, ma, mb, cycle_a)));
    for (const auto& d : cmp.deltas) {
        out << d.name << ": " << d.baseline << " -> " << d.candidate;
        if (!d.absolute) out << " (" << d.pct_reduction << "% reduction)";
        out << '\n';
    }
    return kExitOk;
}

inline int cmd_sweep(const RunManifest& m, std::ostream& out) {
    if (m.cycles.size() != 1) throw InputError("sweep needs exactly one --cycle");
    if (m.monomers.empty()) throw InputError("sweep needs --monomers");
    const SimConfig cfg = detail::config_or_default(m.configs, 0);
    const auto specs = load_monomers_file(m.monomers);
    const auto cycle = detail::load_named_cycle(m.cycles.front(), parse_speed_unit(m.speed_unit));
    const auto rows = monomer_sweep(specs, cycle, cfg);
    const auto dir = detail::prepare_out_dir(m.out_dir);
    const auto csv = sweep_csv(rows);
    write_file_atomic(dir / "sweep.csv", csv);
    out << csv;
    return kExitOk;
}

// Reads one numeric column, then reports the centered smoothing and the causal
// Mode I / Mode II fits at every sample with enough history.
inline int cmd_filter_demo(const RunManifest& m, std::ostream& out) {
    if (m.input.empty() || m.column.empty()) throw InputError("filter-demo needs --input and --column");
    std::ifstream in(m.input);
    if (!in) throw InputError("cannot open input file '" + m.input + "'");
    std::string raw;
    std::size_t line_no = 0;
    std::optional<std::size_t> col;
    std::vector<double> series;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = detail::trim(detail::clean_line(raw, line_no == 1));
        if (line.empty()) continue;
        const auto fields = detail::split(line, ',');
        if (!col) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (detail::trim(fields[i]) == m.column) col = i;
            }
            if (!col) throw ParseError(line_no, "column '" + m.column + "' not in header");
            continue;
        }
        if (*col >= fields.size()) throw ParseError(line_no, "missing column '" + m.column + "'");
        const auto v = detail::parse_double(fields[*col]);
        if (!v) throw ParseError(line_no, "non-numeric value in column '" + m.column + "'");
        series.push_back(*v);
    }
    if (!col) throw InputError("input file '" + m.input + "' is empty");

    FilterConfig fc;
    fc.mode1_half_width = m.half_width;
    fc.mode1_max_order = m.max_order;
    fc.mode2_order = m.mode2_order;
    fc.mode2_half_widths = m.mode2_half_widths;
    fc.validate();
    const auto n1 = static_cast<std::size_t>(2 * m.half_width + 1);
    if (series.size() < n1) {
        throw InputError("filter-demo needs at least " + std::to_string(n1) + " samples, got " +
                         std::to_string(series.size()));
    }
    const auto smoothed = smooth(series, m.half_width, std::min(m.max_order, 2));

    std::ostringstream os;
    os << "i,x,smooth,mode1,mode1_order,mode1_r2,mode2,mode2_half_width,mode2_r2\n";
    using detail::format_double;
    const std::span<const double> all(series);
    for (std::size_t i = 0; i < series.size(); ++i) {
        os << i << ',' << format_double(series[i]) << ',' << format_double(smoothed[i]) << ',';
        const auto hist = all.first(i + 1);
        if (hist.size() >= n1) {
            const auto f = mode1_select(hist.last(n1), m.max_order);
            os << format_double(f.latest()) << ',' << f.order << ',' << format_double(f.r2) << ',';
        } else {
            os << ",,,";
        }
        try {
            const auto f = mode2_select(hist, m.mode2_half_widths, m.mode2_order);
            os << format_double(f.latest()) << ',' << f.half_width << ',' << format_double(f.r2);
        } catch (const InsufficientHistoryError&) {
            os << ",,";
        }
        os << '\n';
    }
    if (m.out_dir.empty()) {
        out << os.str();
    } else {
        const auto dir = detail::prepare_out_dir(m.out_dir);
        write_file_atomic(dir / "filter_demo.csv", os.str());
    }
    return kExitOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Battery/supercapacitor hybrid storage simulator"};
    app.require_subcommand(1);
    RunManifest m;

    auto add_common = [&m](CLI::App* sub) {
        sub->add_option("--speed-unit", m.speed_unit, "Cycle speed unit: mps, mph or kmh")
            ->check(CLI::IsMember({"mps", "mph", "kmh"}));
        sub->add_option("--out", m.out_dir, "Output directory");
    };

    auto* sim = app.add_subcommand("simulate", "Run one simulation and write report.json and trace.csv");
    sim->add_option("--config", m.configs, "Config file")->expected(0, 1);
    sim->add_option("--cycle", m.cycles, "Drive cycle CSV (time,speed)")->required()->expected(1);
    sim->add_option("--mode", m.modes, "Override mode: hess or single_ess")->expected(0, 1);
    sim->add_option("--format", m.formats, "Outputs to write: json, csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->delimiter(',');
    add_common(sim);

    auto* cmp = app.add_subcommand("compare", "Run two simulations on one cycle and write compare.json");
    cmp->add_option("--config", m.configs, "One or two config files")->expected(0, 2);
    cmp->add_option("--cycle", m.cycles, "Drive cycle CSV; a second one must be identical")->required()->expected(1, 2);
    cmp->add_option("--mode", m.modes, "Baseline and candidate modes")->expected(0, 2);
    add_common(cmp);

    auto* swp = app.add_subcommand("sweep", "Supercapacitor monomer sweep; writes sweep.csv");
    swp->add_option("--config", m.configs, "Config file")->expected(0, 1);
    swp->add_option("--cycle", m.cycles, "Drive cycle CSV")->required()->expected(1);
    swp->add_option("--monomers", m.monomers, "Monomer table CSV")->required();
    add_common(swp);

    auto* flt = app.add_subcommand("filter-demo", "Windowed polynomial fits over one CSV column");
    flt->add_option("--input", m.input, "CSV file with a header row")->required();
    flt->add_option("--column", m.column, "Column name")->required();
    flt->add_option("--half-width", m.half_width, "Mode I half-width");
    flt->add_option("--max-order", m.max_order, "Mode I highest order");
    flt->add_option("--mode2-order", m.mode2_order, "Mode II order");
    flt->add_option("--mode2-half-widths", m.mode2_half_widths, "Mode II candidate half-widths")->delimiter(',');
    flt->add_option("--out", m.out_dir, "Output directory (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        std::string name;
        int rc = kExitOk;
        if (sim->parsed()) {
            name = "simulate";
            rc = cmd_simulate(m, out);
        } else if (cmp->parsed()) {
            name = "compare";
            rc = cmd_compare(m, out);
        } else if (swp->parsed()) {
            name = "sweep";
            rc = cmd_sweep(m, out);
        } else {
            if (!flt->count("--out")) m.out_dir.clear();
            return cmd_filter_demo(m, out);
        }
        detail::write_meta(detail::prepare_out_dir(m.out_dir), name, argc, argv);
        return rc;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const SimulationError& e) {
        err << "simulation aborted: " << e.what() << '\n';
        return kExitSimulation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitSimulation;
    }
}

} // namespace hess
