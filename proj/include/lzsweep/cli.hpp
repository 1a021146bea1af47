#pragma once
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "primitives.hpp"
#include "simulator.hpp"
#include "smoothing.hpp"
#include "svg.hpp"
#include "torsion.hpp"

namespace lzsweep {

// exit codes: 0 success, 1 input error, 2 verification failure, 3 solver
// failure

// ============================================================ configuration

// plain-text config: key = value lines under [section] headers
struct Config {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static Config load(const std::string& path) {
        Config c;
        std::ifstream f(path);
        if (!f) throw input_error("cannot open config: " + path);
        std::string line, section;
        size_t lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            auto trim = [](std::string s) {
                size_t a = s.find_first_not_of(" \t\r");
                size_t b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string()
                                              : s.substr(a, b - a + 1);
            };
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            if (line.front() == '[' && line.back() == ']') {
                section = line.substr(1, line.size() - 2);
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw input_error(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
            c.sections[section][trim(line.substr(0, eq))] =
                trim(line.substr(eq + 1));
        }
        return c;
    }

    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = "") const {
        auto s = sections.find(section);
        if (s == sections.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }
    double get_num(const std::string& section, const std::string& key,
                   double fallback) const {
        std::string v = get(section, key);
        return v.empty() ? fallback : std::stod(v);
    }
};

// "(loc, before, after), (loc, before, after)" possibly bracketed
inline std::vector<RemovalWindow> parse_removal_list(const std::string& text) {
    std::vector<RemovalWindow> out;
    std::string s = text;
    for (char& ch : s)
        if (ch == '[' || ch == ']' || ch == '(' || ch == ')' || ch == ',')
            ch = ' ';
    std::istringstream ss(s);
    double loc;
    int before, after;
    while (ss >> loc >> before >> after) out.push_back({loc, before, after});
    return out;
}

// grid syntax: "lo:hi:N" (linear) or "lo:hi:Nlog"
inline std::vector<double> parse_grid(const std::string& text) {
    size_t c1 = text.find(':');
    size_t c2 = text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        return {std::stod(text)};
    double lo = std::stod(text.substr(0, c1));
    double hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    std::string nstr = text.substr(c2 + 1);
    bool logscale = false;
    if (nstr.size() > 3 && nstr.substr(nstr.size() - 3) == "log") {
        logscale = true;
        nstr = nstr.substr(0, nstr.size() - 3);
    }
    int n = std::stoi(nstr);
    if (n < 1) throw input_error("grid: need at least one point");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double u = n == 1 ? 0.0 : double(i) / double(n - 1);
        out[i] = logscale ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u;
    }
    return out;
}

// ============================================================ shared helpers

namespace cli_detail {

inline void print_waveform_summary(const Waveform& w) {
    auto traj = magnus_terms(w);
    double T = w.duration();
    std::printf("duration            = %.9g\n", T);
    std::printf("delta               = %.9g\n", w.delta);
    std::printf("pulse_area          = %.9g\n", pulse_area(w));
    std::printf("|A1(T)|             = %.6e\n", traj.a1.back().norm());
    std::printf("|A2(T)|             = %.6e\n", traj.a2.back().norm());
    auto it = w.meta.find("declared_order");
    if (it != w.meta.end())
        std::printf("declared_order      = %s\n", it->second.c_str());
}

inline void print_curve_summary(const SampledCurve& c) {
    Vec3 areas = projected_areas(c);
    std::printf("samples             = %zu\n", c.size());
    std::printf("length              = %.9g\n", c.length());
    std::printf("closure_defect      = %.6e\n", closure_defect(c));
    std::printf("projected_areas     = (%.6e, %.6e, %.6e)\n", areas.x, areas.y,
                areas.z);
}

inline SmoothingConfig smoothing_from_config(const Config& cfg) {
    SmoothingConfig s;
    s.step = cfg.get_num("smoothing", "step", 0.01);
    s.order = static_cast<int>(cfg.get_num("smoothing", "order", 10));
    s.remove = parse_removal_list(cfg.get("smoothing", "remove", ""));
    s.resample_factor =
        static_cast<int>(cfg.get_num("smoothing", "resample_factor", 1));
    return s;
}

}  // namespace cli_detail

// ================================================================ commands

inline int cmd_design(const Config& cfg, const std::string& builder_arg,
                      const std::map<std::string, std::string>& overrides) {
    auto opt = [&](const std::string& key, double fallback) {
        auto it = overrides.find(key);
        if (it != overrides.end() && !it->second.empty())
            return std::stod(it->second);
        return cfg.get_num("design", key, fallback);
    };
    std::string builder = builder_arg.empty()
                              ? cfg.get("design", "builder", "figure8")
                              : builder_arg;
    double v = opt("v", 1.0);
    DesignBundle bundle;
    std::vector<SolveTraceRow> trace;

    if (builder == "two-spiral") {
        int idx = static_cast<int>(opt("root", 0));
        auto roots = closure_roots(idx + 1);
        bundle = two_spiral_design(v, roots[idx]);
        std::printf("zeta                = %.9g\n", roots[idx].zeta);
        std::printf("pulse_peak          = %.9g\n",
                    roots[idx].zeta * std::sqrt(v));
    } else if (builder == "figure8") {
        bundle = figure8_design(v);
    } else if (builder == "semicircle") {
        bundle = semicircle_sweep_design(v);
        auto g = semicircle_geometry(v);
        std::printf("d                   = %.9g\n", g.d);
        std::printf("omega_circ          = %.9g\n", g.omega_circ);
        std::printf("t_circ              = %.9g\n", g.t_circ);
    } else if (builder == "phase-square") {
        double phi = opt("phi", M_PI / 4);
        bundle.pulse = build_phase_gate_square(phi);
        bundle.curve = plane_error_curve(bundle.pulse);
    } else if (builder == "phase-general") {
        double phi = opt("phi", M_PI / 4);
        bundle = phase_gate_general_design(phi);
    } else if (builder == "linear") {
        double T = opt("T", 2 * 2.14357 / std::sqrt(v));
        bundle.pulse = linear_pulse(v, T, true);
        bundle.curve = plane_error_curve(bundle.pulse);
    } else if (builder == "constant") {
        double T = opt("T", 1.0);
        double area = opt("area", 2 * M_PI);
        bundle.pulse = constant_pulse(area, T);
        bundle.curve = plane_error_curve(bundle.pulse);
    } else if (builder == "torsion") {
        double tau = opt("tau", 1.0);
        TorsionSolveOptions topt;
        topt.step_s = cfg.get_num("design", "step_s", 0.01);
        auto d = design_constant_torsion(v, tau, opt("t_f", 2.2237391),
                                         opt("x_a", -0.2800000),
                                         opt("y_a", -0.2280100), topt);
        bundle.curve = d.r;
        bundle.pulse = d.pulse.waveform;
        trace = d.solve.trace;
        std::printf("residual            = %.6e\n", d.residual);
        std::printf("t_f,x_a,y_a         = %.7f, %.7f, %.7f\n", d.solve.t_f,
                    d.solve.x_a, d.solve.y_a);
    } else {
        throw input_error("unknown builder: " + builder);
    }

    cli_detail::print_curve_summary(bundle.curve);
    cli_detail::print_waveform_summary(bundle.pulse);

    std::string curve_path = cfg.get("output", "curve", "curve.csv");
    std::string wf_path = cfg.get("output", "waveform", "waveform.csv");
    write_curve_csv(bundle.curve, curve_path);
    write_waveform_csv(bundle.pulse, wf_path);
    std::printf("wrote %s\n", curve_path.c_str());
    std::printf("wrote %s\n", wf_path.c_str());
    if (!trace.empty()) {
        std::string trace_path = cfg.get("output", "trace", "trace.csv");
        std::ofstream f(trace_path);
        f.precision(17);
        f << "iter,t_f,x_a,y_a,residual\n";
        for (auto& r : trace)
            f << r.iter << ',' << r.t_f << ',' << r.x_a << ',' << r.y_a << ','
              << r.residual << '\n';
        std::printf("wrote %s\n", trace_path.c_str());
    }
    return 0;
}

inline int cmd_smooth(const Config& cfg, const std::string& input) {
    SampledCurve c = read_curve_csv(input);
    SmoothingConfig s = cli_detail::smoothing_from_config(cfg);
    SampledCurve out = smooth_curve(c, s);
    cli_detail::print_curve_summary(out);
    std::string curve_path = cfg.get("output", "curve", "smoothed.csv");
    write_curve_csv(out, curve_path);
    std::printf("wrote %s\n", curve_path.c_str());
    if (c.dim == 2) {
        size_t n_pulse = static_cast<size_t>(
            cfg.get_num("smoothing", "pulse_samples", 96000));
        Waveform w = smoothed_pulse(c, s, n_pulse);
        std::string wf_path =
            cfg.get("output", "waveform", "smoothed_pulse.csv");
        write_waveform_csv(w, wf_path);
        std::printf("wrote %s\n", wf_path.c_str());
    }
    return 0;
}

inline int cmd_simulate(const Config& cfg, const std::string& input,
                        const std::string& deltas_arg, bool plot) {
    Waveform w = read_waveform_csv(input);
    std::string spec =
        deltas_arg.empty() ? cfg.get("simulate", "deltas", "0") : deltas_arg;
    std::vector<double> deltas = parse_grid(spec);
    std::vector<double> p(deltas.size()), fid(deltas.size());
    for (size_t i = 0; i < deltas.size(); ++i) {
        auto r = evolve(w, deltas[i]);
        p[i] = r.p_lz;
        fid[i] = r.fidelity;
        std::printf("delta=%.6e  p_lz=%.9e  fidelity=%.12f\n", deltas[i], p[i],
                    fid[i]);
    }
    std::string out = cfg.get("output", "results", "results.csv");
    {
        std::ofstream f(out);
        f.precision(17);
        f << "delta,p_lz,fidelity\n";
        for (size_t i = 0; i < deltas.size(); ++i)
            f << deltas[i] << ',' << p[i] << ',' << fid[i] << '\n';
    }
    std::printf("wrote %s\n", out.c_str());
    if (plot) {
        LinePlot lp;
        lp.title = "transition probability vs noise";
        lp.xlabel = "delta";
        lp.ylabel = "P_LZ";
        lp.logx = true;
        lp.logy = true;
        lp.add("P_LZ", deltas, p, "#1f77b4");
        std::string svg = cfg.get("output", "plot", "results.svg");
        write_svg_plot(lp, svg);
        std::printf("wrote %s\n", svg.c_str());
    }
    return 0;
}

inline int cmd_sweep(const Config& cfg, const std::string& input,
                     const std::string& sigmas_arg, bool plot, int threads) {
    Waveform w = read_waveform_csv(input);
    double T = w.duration();
    std::string spec = sigmas_arg.empty()
                           ? cfg.get("sweep", "sigmas",
                                     std::to_string(0.005 / T) + ":" +
                                         std::to_string(0.5 / T) + ":9log")
                           : sigmas_arg;
    std::vector<double> sigmas = parse_grid(spec);
    NoiseModel nm;
    nm.n_samples = static_cast<int>(cfg.get_num("noise", "samples", 100));
    nm.seed = static_cast<std::uint64_t>(cfg.get_num("noise", "seed", 42));
    std::vector<double> mean(sigmas.size()), err(sigmas.size());
    for (size_t i = 0; i < sigmas.size(); ++i) {
        nm.sigma_delta = sigmas[i];
        auto r = noise_average(w, nm, threads);
        mean[i] = r.mean_p_lz;
        err[i] = r.std_error;
        std::printf("sigma=%.6e  mean_p_lz=%.9e  stderr=%.3e\n", sigmas[i],
                    mean[i], err[i]);
    }
    std::string out = cfg.get("output", "sweep", "sweep.csv");
    {
        std::ofstream f(out);
        f.precision(17);
        f << "sigma_delta,mean_p_lz,stderr\n";
        for (size_t i = 0; i < sigmas.size(); ++i)
            f << sigmas[i] << ',' << mean[i] << ',' << err[i] << '\n';
    }
    std::printf("wrote %s\n", out.c_str());
    if (plot) {
        LinePlot lp;
        lp.title = "noise-averaged transition probability";
        lp.xlabel = "sigma_delta";
        lp.ylabel = "mean P_LZ";
        lp.logx = true;
        lp.logy = true;
        lp.add("mean P_LZ", sigmas, mean, "#d62728");
        std::string svg = cfg.get("output", "plot", "sweep.svg");
        write_svg_plot(lp, svg);
        std::printf("wrote %s\n", svg.c_str());
    }
    return 0;
}

inline int cmd_verify(const Config& cfg, const std::string& waveform_path,
                      const std::string& curve_path, int threads) {
    Waveform w;
    if (!waveform_path.empty()) {
        w = read_waveform_csv(waveform_path);
    } else if (!curve_path.empty()) {
        SampledCurve c = read_curve_csv(curve_path);
        double worst = 0;
        for (size_t i = 0; i + 1 < c.size(); ++i) {
            double sp =
                (c.pts[i + 1] - c.pts[i]).norm() / (c.t[i + 1] - c.t[i]);
            worst = std::max(worst, std::abs(sp - 1.0));
        }
        std::printf("unit_speed_residual = %.6e\n", worst);
        if (c.dim == 3) {
            auto p = extract_lz_pulse(c);
            std::printf("torsion_rel_std     = %.6e\n", p.torsion_rel_std);
            w = p.waveform;
        } else {
            w = pulse_from_curve(c);
        }
    } else {
        throw input_error("verify: provide --waveform or --curve");
    }
    auto traj = magnus_terms(w);
    std::printf("|A1(T)|             = %.6e\n", traj.a1.back().norm());
    std::printf("|A2(T)|             = %.6e\n", traj.a2.back().norm());
    auto ro = robustness_order(w, 13, threads);
    std::printf("slope               = %.4f\n", ro.slope);
    if (ro.order)
        std::printf("robustness_order    = %d\n", *ro.order);
    else
        std::printf("robustness_order    = unclassified\n");
    (void)cfg;
    auto it = w.meta.find("declared_order");
    if (it != w.meta.end()) {
        std::printf("declared_order      = %s\n", it->second.c_str());
        if (!ro.order || std::to_string(*ro.order) != it->second) {
            std::printf("verification: FAILED (declared %s, measured %s)\n",
                        it->second.c_str(),
                        ro.order ? std::to_string(*ro.order).c_str()
                                 : "unclassified");
            return 2;
        }
        std::printf("verification: ok\n");
    }
    return 0;
}

inline int cmd_scaling(const Config& cfg, const std::string& pulse_arg,
                       int threads) {
    std::string family =
        pulse_arg.empty() ? cfg.get("scaling", "pulse", "engineered")
                          : pulse_arg;
    double v = cfg.get_num("scaling", "v", 1.0);
    std::vector<double> xs = parse_grid(cfg.get("scaling", "x", "0.02:1.05:25log"));
    std::vector<ScalingPoint> pts;
    if (family == "infinite") {
        pts = scaling_points_infinite_reference(xs);
    } else if (family == "linear") {
        auto g = semicircle_geometry(v);
        Waveform w = linear_pulse(v, g.T, true, 4001);
        pts = scaling_points(w, v, xs, threads);
    } else if (family == "engineered") {
        auto d = semicircle_sweep_design(v);
        auto g = semicircle_geometry(v);
        SmoothingConfig s;
        s.step = 0.01 / std::sqrt(v);
        s.order = 10;
        s.remove = {{g.t_circ, 3, 3}, {g.t_circ + g.t_euler, 3, 3}};
        Waveform w = smoothed_pulse(d.curve, s, 96000);
        pts = scaling_points(w, v, xs, threads);
    } else {
        throw input_error(
            "scaling: pulse must be infinite, linear or engineered");
    }
    auto fit = scaling_fit(pts);
    std::printf("c1                  = %.9g\n", fit.c1);
    std::printf("c2                  = %.9g\n", fit.c2);
    std::printf("c3                  = %.9g\n", fit.c3);
    std::printf("c4                  = %.9g\n", fit.c4);
    std::string out = cfg.get("output", "scaling", "scaling.csv");
    {
        std::ofstream f(out);
        f.precision(17);
        f << "x,log1m_plz\n";
        for (auto& p : pts) f << p.x << ',' << p.log1m_plz << '\n';
    }
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

inline int cmd_plot(const Config& cfg, const std::string& input,
                    const std::string& xcol, const std::string& ycol,
                    bool logx, bool logy) {
    std::ifstream f(input);
    if (!f) throw input_error("cannot open: " + input);
    std::string line;
    std::vector<std::string> cols;
    std::vector<std::vector<double>> data;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        if (cols.empty()) {
            std::string name;
            while (std::getline(ss, name, ',')) cols.push_back(name);
            data.resize(cols.size());
            continue;
        }
        std::string cell;
        size_t k = 0;
        while (std::getline(ss, cell, ',') && k < cols.size())
            data[k++].push_back(std::stod(cell));
    }
    if (cols.size() < 2) throw input_error("plot: need at least two columns");
    auto index_of = [&](const std::string& name, size_t fallback) -> size_t {
        if (name.empty()) return fallback;
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return i;
        throw input_error("plot: no column named " + name);
    };
    size_t xi = index_of(xcol, 0), yi = index_of(ycol, 1);
    LinePlot lp;
    lp.title = input;
    lp.xlabel = cols[xi];
    lp.ylabel = cols[yi];
    lp.logx = logx;
    lp.logy = logy;
    lp.add(cols[yi], data[xi], data[yi], "#1f77b4");
    std::string out = cfg.get("output", "plot", "plot.svg");
    write_svg_plot(lp, out);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

// ================================================================ dispatch

inline int cli_main(int argc, char** argv) {
    CLI::App app{
        "noise-robust Landau-Zener pulse design from geometric curves"};
    app.require_subcommand(1);

    std::string config_path, builder, input, waveform_path, curve_path;
    std::string deltas, sigmas, pulse_family, xcol, ycol;
    std::map<std::string, std::string> design_overrides;
    int threads = 0;
    bool plot = false, logx = false, logy = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (key = value)");
        cmd->add_option("--threads", threads, "worker threads (0: all cores)");
    };

    auto* design =
        app.add_subcommand("design", "construct a pulse and its curve");
    add_common(design);
    design->add_option("--builder", builder,
                       "two-spiral|figure8|semicircle|phase-square|"
                       "phase-general|linear|constant|torsion");
    for (const char* key :
         {"v", "root", "phi", "tau", "T", "area", "t_f", "x_a", "y_a"})
        design->add_option(std::string("--") + key, design_overrides[key]);

    auto* smooth = app.add_subcommand("smooth", "smooth a curve CSV");
    add_common(smooth);
    smooth->add_option("--input", input, "curve CSV")->required();

    auto* simulate = app.add_subcommand("simulate", "evolve a waveform CSV");
    add_common(simulate);
    simulate->add_option("--waveform", waveform_path, "waveform CSV")
        ->required();
    simulate->add_option("--deltas", deltas,
                         "delta grid lo:hi:N[log] or a single value");
    simulate->add_flag("--plot", plot, "emit an SVG plot");

    auto* sweep =
        app.add_subcommand("sweep", "noise-averaged Monte-Carlo sweep");
    add_common(sweep);
    sweep->add_option("--waveform", waveform_path, "waveform CSV")->required();
    sweep->add_option("--sigmas", sigmas, "sigma grid lo:hi:N[log]");
    sweep->add_flag("--plot", plot, "emit an SVG plot");

    auto* verify =
        app.add_subcommand("verify", "verify the robustness of a pulse");
    add_common(verify);
    verify->add_option("--waveform", waveform_path, "waveform CSV");
    verify->add_option("--curve", curve_path, "curve CSV");

    auto* scaling = app.add_subcommand("scaling", "quartic scaling-law fit");
    add_common(scaling);
    scaling->add_option("--pulse", pulse_family, "infinite|linear|engineered");

    auto* plotcmd = app.add_subcommand("plot", "plot a CSV as SVG");
    add_common(plotcmd);
    plotcmd->add_option("--input", input, "CSV file")->required();
    plotcmd->add_option("--x", xcol, "x column name");
    plotcmd->add_option("--y", ycol, "y column name");
    plotcmd->add_flag("--logx", logx, "log x axis");
    plotcmd->add_flag("--logy", logy, "log y axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Config cfg;
        if (!config_path.empty()) cfg = Config::load(config_path);
        if (design->parsed()) return cmd_design(cfg, builder, design_overrides);
        if (smooth->parsed()) return cmd_smooth(cfg, input);
        if (simulate->parsed())
            return cmd_simulate(cfg, waveform_path, deltas, plot);
        if (sweep->parsed())
            return cmd_sweep(cfg, waveform_path, sigmas, plot, threads);
        if (verify->parsed())
            return cmd_verify(cfg, waveform_path, curve_path, threads);
        if (scaling->parsed()) return cmd_scaling(cfg, pulse_family, threads);
        if (plotcmd->parsed())
            return cmd_plot(cfg, input, xcol, ycol, logx, logy);
    } catch (const solver_error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const verification_error& e) {
        std::fprintf(stderr, "verification error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

}  // namespace lzsweep
