// Command-line front end: solves, simulations, sweeps and figure presets.

#include "mlescape/basin_metrics.hpp"
#include "mlescape/error.hpp"
#include "mlescape/field_io.hpp"
#include "mlescape/heatmap.hpp"
#include "mlescape/monte_carlo.hpp"
#include "mlescape/nonlocal_solver.hpp"
#include "mlescape/run_config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mlescape;

namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
    std::string out;
};

/// Flags that map onto config keys; unset ones are skipped.
struct Overrides {
    std::vector<std::pair<std::string, std::string>> pending;

    template <typename T>
    void add(const std::string& key, const std::optional<T>& value)
    {
        if (!value)
            return;
        std::ostringstream s;
        s.precision(17);
        s << *value;
        pending.emplace_back(key, s.str());
    }
};

RunConfig load(const Common& common, const Overrides& flags)
{
    std::vector<std::string> overrides = common.sets;
    for (const auto& [k, v] : flags.pending)
        overrides.push_back(k + "=" + v);
    if (!common.out.empty())
        overrides.push_back("output.dir=" + common.out);
    std::optional<fs::path> file;
    if (!common.config_file.empty())
        file = common.config_file;
    return parse_config(file, overrides);
}

fs::path output_root(const RunConfig& cfg)
{
    fs::path dir = cfg.output_dir;
    if (dir.is_relative()) {
        if (const char* root = std::getenv("MLESCAPE_OUTPUT_ROOT"); root && *root)
            dir = fs::path(root) / dir;
    }
    return dir;
}

void archive_config(const fs::path& dir, const RunConfig& cfg)
{
    write_text_atomic(dir / "config.txt", emit_config(cfg));
}

std::string fmt(double x, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

ColorScale default_scale(FieldKind kind, double max)
{
    return kind == FieldKind::fep ? ColorScale{0.0, 1.0} : ColorScale{0.0, max > 0.0 ? max : 1.0};
}

/// CSV, metadata sidecar and (optionally) a PNG rendered from the CSV itself.
void write_field(const fs::path& dir, const std::string& stem, const ScalarField& field, const NoiseSpec& noise,
                 const RunConfig& cfg, const std::map<std::string, std::string>& extras,
                 std::optional<ColorScale> scale = std::nullopt)
{
    const fs::path csv = dir / (stem + ".csv");
    write_field_csv(csv, field);
    write_text_atomic(dir / (stem + ".json"), field_metadata(field, noise, cfg.solver, extras));
    if (cfg.render) {
        const FieldTable table = read_field_csv(csv);
        write_field_png(dir / (stem + ".png"), table, scale.value_or(default_scale(field.kind, field.max())),
                        cfg.cell_px);
    }
}

LinearSystem build_system(const RunConfig& cfg, const NoiseSpec& noise)
{
    return LinearSystem(assemble(cfg.drift_field(), noise, cfg.region, cfg.solver), cfg.solver);
}

int cmd_params(const RunConfig& cfg)
{
    const MLParams& p = cfg.model;
    std::cout << "Morris-Lecar parameters (type-II set unless overridden)\n"
              << "  C = " << p.capacitance << " uF/cm^2, g_Ca = " << p.g_ca << ", g_K = " << p.g_k
              << ", g_L = " << p.g_l << " uS/cm^2\n"
              << "  V_Ca = " << p.v_ca << ", V_K = " << p.v_k << ", V_L = " << p.v_l << " mV\n"
              << "  V1 = " << p.v1 << ", V2 = " << p.v2 << ", V3 = " << p.v3 << ", V4 = " << p.v4 << " mV\n"
              << "  phi = " << p.phi << ", I = " << p.current << " uA/cm^2 (Hopf onset near " << kHopfCurrent
              << ")\n"
              << "  scaling: v = " << cfg.scaling.v_scale << " v_raw, w = " << cfg.scaling.w_scale << " w_raw\n";
    if (cfg.drift == "morris_lecar") {
        const State s = find_equilibrium(p, cfg.scaling);
        const State raw = cfg.scaling.to_raw(s);
        std::cout << "  equilibrium s* = (" << fmt(s.v, 8) << ", " << fmt(s.w, 8) << ") scaled, ("
                  << fmt(raw.v, 8) << " mV, " << fmt(raw.w, 8) << ") raw\n";
    }
    std::cout << "\nEffective configuration:\n" << emit_config(cfg);
    return 0;
}

int cmd_field(const RunConfig& cfg, FieldKind kind)
{
    const fs::path dir = output_root(cfg);
    const LinearSystem system = build_system(cfg, cfg.noise);
    const ScalarField field = kind == FieldKind::fep ? system.solve_fep(cfg.target) : system.solve_mfet();
    const State point = cfg.evaluation_point();
    const std::string stem = kind == FieldKind::fep ? "fep" : "mfet";

    archive_config(dir, cfg);
    write_field(dir, stem, field, cfg.noise, cfg,
                {{"point", fmt(point.v, 8) + "," + fmt(point.w, 8)},
                 {"value_at_point", fmt(field.evaluate(point), 10)}});
    std::cout << stem << " alpha=" << cfg.noise.alpha << " sigma1=" << cfg.noise.sigma1 << " sigma2=" << cfg.noise.sigma2
              << " grid=" << cfg.solver.grid.n_v << "x" << cfg.solver.grid.n_w << ": value at (" << fmt(point.v)
              << ", " << fmt(point.w) << ") = " << fmt(field.evaluate(point), 8) << ", max " << fmt(field.max(), 8)
              << ", " << field.iterations << " iterations, residual " << fmt(field.residual, 3) << ", "
              << fmt(field.seconds, 3) << " s\n"
              << "wrote " << (dir / (stem + ".csv")).string() << "\n";
    return 0;
}

json estimate_json(const PathEstimate& e)
{
    return {{"mean", e.mean},
            {"half_width", e.half_width},
            {"effective_paths", e.effective},
            {"total_paths", e.total},
            {"censored_fraction", e.censored_fraction},
            {"non_finite", e.non_finite}};
}

int cmd_mc(const RunConfig& cfg)
{
    const fs::path dir = output_root(cfg);
    const State start = cfg.evaluation_point();
    const auto outcomes = simulate(start, cfg.region, cfg.target, cfg.drift_field(), cfg.noise, cfg.mc);

    // Estimates are computed before anything is written so a censoring
    // failure leaves no partial record behind.
    const PathEstimate fep = fep_from(outcomes, cfg.mc);
    const PathEstimate mfet = mfet_from(outcomes, cfg.mc);

    archive_config(dir, cfg);
    json j;
    j["start"] = {start.v, start.w};
    j["alpha"] = cfg.noise.alpha;
    j["sigma1"] = cfg.noise.sigma1;
    j["sigma2"] = cfg.noise.sigma2;
    j["dt"] = cfg.mc.dt;
    j["t_max"] = cfg.mc.t_max;
    j["seed"] = cfg.mc.seed;
    j["antithetic"] = cfg.mc.antithetic;
    j["bridge"] = cfg.mc.bridge && cfg.noise.brownian();
    j["fep"] = estimate_json(fep);
    j["mfet"] = estimate_json(mfet);
    write_text_atomic(dir / "mc.json", j.dump(2) + "\n");
    if (cfg.mc_dump)
        write_outcomes_csv(dir / "outcomes.csv", outcomes);

    std::cout << "mc alpha=" << cfg.noise.alpha << " sigma1=" << cfg.noise.sigma1 << " sigma2=" << cfg.noise.sigma2
              << " paths=" << cfg.mc.paths << " dt=" << cfg.mc.dt << ": FEP " << fmt(fep.mean) << " +/- "
              << fmt(fep.half_width, 3) << ", MFET " << fmt(mfet.mean) << " +/- " << fmt(mfet.half_width, 3)
              << ", censored " << fmt(fep.censored_fraction, 3) << "\n";
    std::cout << j.dump() << "\n";
    return 0;
}

/// Turning points of every requested column, per sigma series (against alpha)
/// and per alpha series (against sigma).
std::string turning_report(const std::vector<SweepRow>& rows, const SweepSpec& spec)
{
    std::string out = "series,fixed,column,turning_points\n";
    const std::size_t ns = spec.sigmas.size();
    const std::size_t na = rows.size() / std::max<std::size_t>(ns, 1);
    for (const char* column : {"fep_at_star", "mfet_at_star", "r_fep", "r_mfet"}) {
        for (std::size_t j = 0; j < ns; ++j) {
            std::vector<double> xs, ys;
            for (std::size_t a = 0; a < na; ++a) {
                const SweepRow& r = rows[a * ns + j];
                if (r.point.alpha < 2.0 && !std::isnan(row_value(r, column))) {
                    xs.push_back(r.point.alpha);
                    ys.push_back(row_value(r, column));
                }
            }
            std::string tp;
            for (double x : turning_points(xs, ys))
                tp += (tp.empty() ? "" : " ") + fmt(x);
            out += "alpha," + fmt(spec.sigmas[j]) + "," + column + "," + tp + "\n";
        }
        for (std::size_t a = 0; a < na; ++a) {
            std::vector<double> xs, ys;
            for (std::size_t j = 0; j < ns; ++j) {
                const SweepRow& r = rows[a * ns + j];
                if (!std::isnan(row_value(r, column))) {
                    xs.push_back(spec.sigmas[j]);
                    ys.push_back(row_value(r, column));
                }
            }
            std::string tp;
            for (double x : turning_points(xs, ys))
                tp += (tp.empty() ? "" : " ") + fmt(x);
            out += "sigma," + fmt(rows[a * ns].point.alpha) + "," + column + "," + tp + "\n";
        }
    }
    return out;
}

struct SweepOutput {
    std::vector<SweepRow> rows;
    std::size_t failures = 0;
};

SweepOutput run_sweep(const RunConfig& cfg, const SweepSpec& spec, const fs::path& dir, const std::string& stem,
                      const fs::path& cache)
{
    SweepOptions options;
    options.workers = cfg.sweep_workers;
    if (cfg.sweep_cache)
        options.cache_dir = cache;
    SweepOutput out;
    out.rows = sweep(spec, cfg.sweep_problem(), options);
    for (const SweepRow& r : out.rows) {
        if (!r.ok()) {
            ++out.failures;
            std::cerr << "sweep point alpha=" << r.point.alpha << " sigma1=" << r.point.sigma1
                      << " sigma2=" << r.point.sigma2 << " failed: " << r.status << "\n";
        }
    }
    write_text_atomic(dir / (stem + ".csv"), sweep_csv(out.rows));
    write_text_atomic(dir / (stem + "_turning_points.csv"), turning_report(out.rows, spec));
    std::size_t cached = 0;
    for (const SweepRow& r : out.rows)
        cached += r.cached ? 1 : 0;
    std::cout << stem << ": " << out.rows.size() << " points (" << cached << " from cache, " << out.failures
              << " failed) -> " << (dir / (stem + ".csv")).string() << "\n";
    return out;
}

void write_matrix(const fs::path& dir, const std::string& stem, const std::vector<SweepRow>& rows,
                  const SweepSpec& spec, const std::string& column, const RunConfig& cfg,
                  std::optional<ColorScale> scale)
{
    write_text_atomic(dir / (stem + ".csv"), sweep_matrix_csv(rows, spec, column));
    if (!cfg.render)
        return;
    // Rows of the image are alpha (ascending upwards), columns the varying sigma.
    const std::size_t ns = spec.sigmas.size();
    const std::size_t na = rows.size() / ns;
    std::vector<double> values(rows.size());
    double hi = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t j = 0; j < ns; ++j) {
            values[a * ns + j] = row_value(rows[a * ns + j], column);
            if (!std::isnan(values[a * ns + j]))
                hi = std::max(hi, values[a * ns + j]);
        }
    }
    write_heatmap_png(dir / (stem + ".png"), values, static_cast<int>(ns), static_cast<int>(na),
                      scale.value_or(ColorScale{0.0, hi > 0.0 ? hi : 1.0}), std::max(cfg.cell_px, 8));
}

int cmd_sweep(const RunConfig& cfg)
{
    const fs::path dir = output_root(cfg);
    archive_config(dir, cfg);
    const SweepOutput out = run_sweep(cfg, cfg.sweep, dir, "sweep", dir / "cache");
    for (const char* column : {"fep_at_star", "mfet_at_star", "r_fep", "r_mfet"}) {
        const bool wanted = (std::string(column).find("fep") != std::string::npos) ? cfg.sweep.want_fep
                                                                                    : cfg.sweep.want_mfet;
        const bool field_column = column[0] == 'r';
        if (wanted && (!field_column || cfg.sweep.fields))
            write_matrix(dir, std::string("matrix_") + column, out.rows, cfg.sweep, column, cfg, std::nullopt);
    }
    return out.failures ? 2 : 0;
}

int cmd_metrics(const RunConfig& cfg, const std::string& field_csv, const std::string& kind)
{
    const FieldTable t = read_field_csv(field_csv);
    json j;
    j["field"] = field_csv;
    j["nodes"] = t.values.size();
    if (kind == "fep" || kind == "both") {
        j["p_star"] = cfg.sweep.thresholds.p_star;
        j["r_fep"] = area_fraction(t.values, cfg.sweep.thresholds.p_star);
    }
    if (kind == "mfet" || kind == "both") {
        j["u_star"] = cfg.sweep.thresholds.u_star;
        j["r_mfet"] = area_fraction(t.values, cfg.sweep.thresholds.u_star);
    }
    const fs::path dir = output_root(cfg);
    write_text_atomic(dir / "metrics.json", j.dump(2) + "\n");
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_render(const std::string& csv, std::string png, std::optional<double> lo, std::optional<double> hi,
               std::string kind, int cell_px)
{
    const FieldTable t = read_field_csv(csv);
    if (kind.empty()) {
        // Pick the kind up from the metadata sidecar when there is one.
        fs::path meta = fs::path(csv).replace_extension(".json");
        kind = "mfet";
        std::error_code ec;
        if (fs::exists(meta, ec)) {
            const json j = json::parse(read_text(meta), nullptr, false);
            if (!j.is_discarded() && j.contains("kind"))
                kind = j["kind"].get<std::string>();
        }
    }
    double max = 0.0;
    for (double x : t.values)
        max = std::max(max, x);
    ColorScale scale = default_scale(kind == "fep" ? FieldKind::fep : FieldKind::mfet, max);
    if (lo)
        scale.lo = *lo;
    if (hi)
        scale.hi = *hi;
    if (png.empty())
        png = fs::path(csv).replace_extension(".png").string();
    write_field_png(png, t, scale, cell_px);
    std::cout << "rendered " << png << " with scale [" << scale.lo << ", " << scale.hi << "]\n";
    return 0;
}

// ---------------------------------------------------------------------------
// Figure presets

struct Panel {
    std::string label;
    double alpha;
    double sigma;
};

void artifact_defaults(json& meta, const RunConfig& cfg, bool dense)
{
    meta["artifact_default"] = {
        {"grid", std::to_string(cfg.solver.grid.n_v) + "x" + std::to_string(cfg.solver.grid.n_w)},
        {"tolerance", cfg.solver.tolerance},
        {"drift_scheme", std::string(to_string(cfg.solver.drift_scheme))},
        {"quadrature", std::string(to_string(cfg.solver.quadrature))},
        {"normalization", std::string(to_string(cfg.noise.normalization))},
        {"alpha_grid", dense ? "0.01:1.99:0.01 (dense)" : "0.25:1.75:0.25 (subsampled)"},
        {"sigma_grid", dense ? "0.05:1:0.005 (dense)" : "0.05:1:0.05 (subsampled)"},
    };
}

int reproduce_fields(const RunConfig& cfg, const fs::path& dir, const std::string& figure, FieldKind kind,
                     const std::vector<Panel>& panels, json& meta)
{
    std::vector<std::pair<std::string, ScalarField>> done;
    std::vector<NoiseSpec> noises;
    for (const Panel& p : panels) {
        NoiseSpec noise = cfg.noise;
        noise.alpha = p.alpha;
        noise.sigma1 = noise.sigma2 = p.sigma;
        const LinearSystem system = build_system(cfg, noise);
        ScalarField f = kind == FieldKind::fep ? system.solve_fep(cfg.target) : system.solve_mfet();
        std::cout << figure << "(" << p.label << ") alpha=" << p.alpha << " sigma=" << p.sigma << ": max "
                  << fmt(f.max(), 8) << ", " << f.iterations << " iterations, " << fmt(f.seconds, 3) << " s\n";
        done.emplace_back(p.label, std::move(f));
        noises.push_back(noise);
    }
    // One colour scale for every panel.
    double shared_max = 0.0;
    for (const auto& [label, f] : done)
        shared_max = std::max(shared_max, f.max());
    const ColorScale scale = kind == FieldKind::fep ? ColorScale{0.0, 1.0} : ColorScale{0.0, shared_max};
    json panels_json = json::array();
    for (std::size_t i = 0; i < done.size(); ++i) {
        const auto& [label, f] = done[i];
        const std::string stem = figure + "_" + label;
        write_field(dir, stem, f, noises[i], cfg, {{"preset", figure}, {"panel", label}}, scale);
        panels_json.push_back({{"panel", label},
                               {"alpha", panels[i].alpha},
                               {"sigma", panels[i].sigma},
                               {"file", stem + ".csv"},
                               {"max", f.max()}});
    }
    meta["panels"] = panels_json;
    meta["color_scale"] = {scale.lo, scale.hi};
    return 0;
}

int reproduce(const RunConfig& base, int figure, bool dense)
{
    RunConfig cfg = base;
    const fs::path root = output_root(cfg);
    const std::string name = "fig" + std::to_string(figure);
    const fs::path dir = root / name;
    archive_config(dir, cfg);

    json meta;
    meta["preset"] = name;
    artifact_defaults(meta, cfg, dense);

    const std::vector<double> alphas =
        dense ? SweepSpec::range(0.01, 1.99, 0.01) : std::vector<double>{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75};
    const std::vector<double> sigmas = dense ? SweepSpec::range(0.05, 1.0, 0.005) : SweepSpec::range(0.05, 1.0, 0.05);
    const std::vector<double> curve_sigmas{0.25, 0.5, 0.75, 1.0};
    const std::vector<double> curve_alphas{0.5, 1.0, 1.5};
    int status = 0;

    auto curves = [&](bool fep, bool fields) {
        // (a) against alpha for the four sigma curves; (b) against sigma for
        // alpha in {0.5, 1, 1.5} plus the Brownian curve.
        SweepSpec a = cfg.sweep;
        a.alphas = alphas;
        a.sigmas = curve_sigmas;
        a.mode = SweepMode::diagonal;
        a.brownian = true;
        a.want_fep = fep;
        a.want_mfet = !fep;
        a.fields = fields;
        SweepSpec b = a;
        b.alphas = curve_alphas;
        b.sigmas = sigmas;
        const auto ra = run_sweep(cfg, a, dir, name + "a", root / "cache");
        const auto rb = run_sweep(cfg, b, dir, name + "b", root / "cache");
        meta["panels"] = {{{"panel", "a"}, {"file", name + "a.csv"}, {"sigmas", curve_sigmas}},
                          {{"panel", "b"}, {"file", name + "b.csv"}, {"alphas", {0.5, 1.0, 1.5, 2.0}}}};
        if (fields)
            meta["threshold"] = fep ? cfg.sweep.thresholds.p_star : cfg.sweep.thresholds.u_star;
        status = (ra.failures || rb.failures) ? 2 : 0;
    };

    auto ratio = [&](bool fep) {
        const std::string column = fep ? "fep_at_star" : "mfet_at_star";
        struct RatioPanel {
            std::string label;
            SweepMode mode;
            double fixed;
        };
        const std::vector<RatioPanel> panels{{"a", SweepMode::fix_sigma1, 0.5},
                                             {"b", SweepMode::fix_sigma1, 1.0},
                                             {"c", SweepMode::fix_sigma2, 0.5},
                                             {"d", SweepMode::fix_sigma2, 1.0}};
        std::vector<std::pair<SweepSpec, SweepOutput>> results;
        json pj = json::array();
        for (const RatioPanel& p : panels) {
            SweepSpec s = cfg.sweep;
            s.alphas = alphas;
            s.sigmas = sigmas;
            s.mode = p.mode;
            s.fixed_sigma = p.fixed;
            s.brownian = true;
            s.want_fep = fep;
            s.want_mfet = !fep;
            s.fields = false;
            auto out = run_sweep(cfg, s, dir, name + p.label, root / "cache");
            status = out.failures ? 2 : status;
            pj.push_back({{"panel", p.label},
                          {"mode", std::string(to_string(p.mode))},
                          {"fixed_sigma", p.fixed},
                          {"file", name + p.label + ".csv"}});
            results.emplace_back(s, std::move(out));
        }
        // FEP panels share [0,1]; MFET panels share a scale pairwise, (a,b) and (c,d).
        for (std::size_t i = 0; i < results.size(); ++i) {
            std::optional<ColorScale> scale;
            if (fep) {
                scale = ColorScale{0.0, 1.0};
            } else {
                const std::size_t j = i ^ 1u;
                double hi = 0.0;
                for (std::size_t k : {i, j})
                    for (const SweepRow& r : results[k].second.rows)
                        if (!std::isnan(r.mfet_at_star))
                            hi = std::max(hi, r.mfet_at_star);
                scale = ColorScale{0.0, hi > 0.0 ? hi : 1.0};
            }
            write_matrix(dir, name + panels[i].label + "_matrix", results[i].second.rows, results[i].first, column,
                         cfg, scale);
        }
        meta["panels"] = pj;
    };

    switch (figure) {
    case 3:
        meta["caption_parameters"] = "FEP fields; (a)-(d) sigma = 0.5, alpha = 0.5, 1, 1.5, Brownian; "
                                     "(e)-(h) alpha = 1.25, sigma = 0.25, 0.5, 0.75, 1; shared scale [0,1]";
        status = reproduce_fields(cfg, dir, name, FieldKind::fep,
                                  {{"a", 0.5, 0.5},
                                   {"b", 1.0, 0.5},
                                   {"c", 1.5, 0.5},
                                   {"d", 2.0, 0.5},
                                   {"e", 1.25, 0.25},
                                   {"f", 1.25, 0.5},
                                   {"g", 1.25, 0.75},
                                   {"h", 1.25, 1.0}},
                                  meta);
        break;
    case 4:
        meta["caption_parameters"] = "FEP at s*; (a) against alpha for sigma = 0.25, 0.5, 0.75, 1; "
                                     "(b) against sigma for alpha = 0.5, 1, 1.5, 2";
        curves(true, false);
        break;
    case 5:
        meta["caption_parameters"] = "R_FEP with p* = 0.8; (a) against alpha for sigma = 0.25, 0.5, 0.75, 1; "
                                     "(b) against sigma for alpha = 0.5, 1, 1.5, 2";
        curves(true, true);
        break;
    case 6:
        meta["caption_parameters"] = "FEP at s* over (alpha, ratio); (a) sigma1 = 0.5, (b) sigma1 = 1 with "
                                     "sigma2 in [0.05,1]; (c) sigma2 = 0.5, (d) sigma2 = 1 with sigma1 in [0.05,1]";
        ratio(true);
        break;
    case 7:
        meta["caption_parameters"] = "MFET fields; (a)-(d) sigma = 0.75, alpha = 0.5, 1, 1.5, 2; "
                                     "(e)-(h) alpha = 1.25, sigma = 0.25, 0.5, 0.75, 1; shared scale";
        status = reproduce_fields(cfg, dir, name, FieldKind::mfet,
                                  {{"a", 0.5, 0.75},
                                   {"b", 1.0, 0.75},
                                   {"c", 1.5, 0.75},
                                   {"d", 2.0, 0.75},
                                   {"e", 1.25, 0.25},
                                   {"f", 1.25, 0.5},
                                   {"g", 1.25, 0.75},
                                   {"h", 1.25, 1.0}},
                                  meta);
        break;
    case 8:
        meta["caption_parameters"] = "MFET at s*; (a) against alpha for sigma = 0.25, 0.5, 0.75, 1; "
                                     "(b) against sigma for alpha = 0.5, 1, 1.5, 2";
        curves(false, false);
        break;
    case 9:
        meta["caption_parameters"] = "R_MFET with u* = 10; (a) against alpha for sigma = 0.25, 0.5, 0.75, 1; "
                                     "(b) against sigma for alpha = 0.5, 1, 1.5, 2";
        curves(false, true);
        break;
    case 10:
        meta["caption_parameters"] = "MFET at s* over (alpha, ratio); (a) sigma1 = 0.5, (b) sigma1 = 1 with "
                                     "sigma2 in [0.05,1]; (c) sigma2 = 0.5, (d) sigma2 = 1 with sigma1 in [0.05,1]; "
                                     "(a,b) and (c,d) share scales";
        ratio(false);
        break;
    default:
        throw Error(ErrorKind::ConfigError, "reproduce: figure must be one of fig3 ... fig10");
    }
    write_text_atomic(dir / "preset.json", meta.dump(2) + "\n");
    return status;
}

void print_error(const std::string& kind, const std::string& message, int code)
{
    json j;
    j["error"] = kind;
    j["message"] = message;
    j["exit_code"] = code;
    std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Escape probability and mean exit time for the stochastic Morris-Lecar neuron"};
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("-c,--config", common.config_file, "flat key = value config file");
    app.add_option("-s,--set", common.sets, "override a config key, e.g. --set noise.alpha=1.5")->take_all();
    app.add_option("-o,--out", common.out, "output directory (relative paths go under $MLESCAPE_OUTPUT_ROOT)");

    std::optional<double> alpha, sigma, sigma1, sigma2, u_star, p_star, dt, t_max;
    std::optional<int> n, workers;
    std::optional<long long> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> point;
    bool dump = false;
    bool antithetic = false;
    bool dense = false;

    auto noise_flags = [&](CLI::App* sub) {
        sub->add_option("--alpha", alpha, "stability index in (0,2]");
        sub->add_option("--sigma", sigma, "noise intensity for both channels");
        sub->add_option("--sigma1", sigma1, "noise intensity on v");
        sub->add_option("--sigma2", sigma2, "noise intensity on w");
        sub->add_option("--point", point, "evaluation point 'v,w' or 'equilibrium'");
    };

    auto* params = app.add_subcommand("params", "print model parameters, equilibrium and effective config");
    auto* fep = app.add_subcommand("fep", "solve the first escape probability field");
    auto* mfet = app.add_subcommand("mfet", "solve the mean first exit time field");
    for (auto* sub : {fep, mfet}) {
        noise_flags(sub);
        sub->add_option("--n", n, "interior nodes per axis");
    }
    auto* mc = app.add_subcommand("mc", "Monte Carlo estimates of FEP and MFET at the evaluation point");
    noise_flags(mc);
    mc->add_option("--paths", paths, "number of paths (>= 100)");
    mc->add_option("--seed", seed, "base seed");
    mc->add_option("--dt", dt, "time step");
    mc->add_option("--t-max", t_max, "horizon");
    mc->add_option("--workers", workers, "worker threads (0 = all cores)");
    mc->add_flag("--dump", dump, "write per-path outcomes.csv");
    mc->add_flag("--antithetic", antithetic, "mirror CMS angles on odd paths");

    auto* sw = app.add_subcommand("sweep", "parameter sweep of FEP/MFET at the point and R_FEP/R_MFET");
    sw->add_option("--n", n, "interior nodes per axis");
    sw->add_option("--workers", workers, "parallel sweep points (0 = all cores)");
    sw->add_option("--p-star", p_star, "FEP threshold");
    sw->add_option("--u-star", u_star, "MFET threshold");

    std::string field_file;
    std::string metric_kind = "both";
    auto* metrics = app.add_subcommand("metrics", "R_FEP / R_MFET of a field CSV");
    metrics->add_option("field", field_file, "field CSV written by fep or mfet")->required()->check(CLI::ExistingFile);
    metrics->add_option("--kind", metric_kind, "fep, mfet or both")->check(CLI::IsMember({"fep", "mfet", "both"}));
    metrics->add_option("--p-star", p_star, "FEP threshold");
    metrics->add_option("--u-star", u_star, "MFET threshold");

    std::string figure;
    auto* repro = app.add_subcommand("reproduce", "figure presets fig3 ... fig10");
    repro->add_option("figure", figure, "fig3 ... fig10")->required();
    repro->add_option("--n", n, "interior nodes per axis");
    repro->add_option("--workers", workers, "parallel sweep points (0 = all cores)");
    repro->add_flag("--dense", dense, "full alpha step 0.01 and sigma step 0.005 sweeps");

    std::string render_csv, render_png, render_kind;
    std::optional<double> lo, hi;
    int render_px = 2;
    auto* render = app.add_subcommand("render", "render a field CSV to PNG (no recomputation)");
    render->add_option("csv", render_csv, "field CSV")->required()->check(CLI::ExistingFile);
    render->add_option("--png", render_png, "output image (default: CSV path with .png)");
    render->add_option("--kind", render_kind, "fep or mfet colour anchors")->check(CLI::IsMember({"fep", "mfet"}));
    render->add_option("--lo", lo, "value drawn blue");
    render->add_option("--hi", hi, "value drawn red");
    render->add_option("--cell-px", render_px, "pixels per node")->check(CLI::Range(1, 16));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (render->parsed())
            return cmd_render(render_csv, render_png, lo, hi, render_kind, render_px);

        Overrides flags;
        flags.add("noise.sigma", sigma);
        flags.add("noise.alpha", alpha);
        flags.add("noise.sigma1", sigma1);
        flags.add("noise.sigma2", sigma2);
        flags.add("point", point);
        flags.add("solver.n", n);
        flags.add("mc.paths", paths);
        flags.add("mc.seed", seed);
        flags.add("mc.dt", dt);
        flags.add("mc.t_max", t_max);
        if (mc->parsed()) {
            flags.add("mc.workers", workers);
            if (dump)
                flags.pending.emplace_back("mc.dump", "true");
            if (antithetic)
                flags.pending.emplace_back("mc.antithetic", "true");
        } else {
            flags.add("sweep.workers", workers);
        }
        flags.add("metrics.p_star", p_star);
        flags.add("metrics.u_star", u_star);
        const RunConfig cfg = load(common, flags);

        if (params->parsed())
            return cmd_params(cfg);
        if (fep->parsed())
            return cmd_field(cfg, FieldKind::fep);
        if (mfet->parsed())
            return cmd_field(cfg, FieldKind::mfet);
        if (mc->parsed())
            return cmd_mc(cfg);
        if (sw->parsed())
            return cmd_sweep(cfg);
        if (metrics->parsed())
            return cmd_metrics(cfg, field_file, metric_kind);
        if (repro->parsed()) {
            int number = 0;
            if (figure.rfind("fig", 0) == 0)
                number = std::atoi(figure.c_str() + 3);
            if (number < 3 || number > 10)
                throw Error(ErrorKind::ConfigError, "reproduce: figure must be one of fig3 ... fig10, got " + figure);
            return reproduce(cfg, number, dense);
        }
    } catch (const Error& e) {
        const int code = exit_code(e.kind());
        print_error(std::string(to_string(e.kind())), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        print_error("internal", e.what(), 2);
        return 2;
    }
    return 0;
}
