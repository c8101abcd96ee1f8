#include "mlescape/run_config.hpp"

#include "mlescape/error.hpp"
#include "mlescape/field_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

namespace mlescape {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& text)
{
    if (text == "inf" || text == "+inf")
        return std::numeric_limits<double>::infinity();
    if (text == "-inf")
        return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw Error(ErrorKind::ConfigError, key + ": expected a number, got '" + text + "'");
    return x;
}

long long to_integer(const std::string& key, const std::string& text)
{
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw Error(ErrorKind::ConfigError, key + ": expected an integer, got '" + text + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes")
        return true;
    if (text == "false" || text == "0" || text == "no")
        return false;
    throw Error(ErrorKind::ConfigError, key + ": expected true or false, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(to_double(key, item));
    }
    return out;
}

std::string num(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    // Shortest text that parses back to the same double.
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string list(const std::vector<double>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        out += (i ? ", " : "") + num(xs[i]);
    return out;
}

struct Entry {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get; ///< empty for write-only aliases
};

#define MLE_REAL(KEY, EXPR)                                                                                       \
    Entry{KEY, [](RunConfig& c, const std::string& v) { c.EXPR = to_double(KEY, v); },                        \
          [](const RunConfig& c) { return num(c.EXPR); }}
#define MLE_INT(KEY, EXPR, TYPE)                                                                                  \
    Entry{KEY, [](RunConfig& c, const std::string& v) { c.EXPR = static_cast<TYPE>(to_integer(KEY, v)); },    \
          [](const RunConfig& c) { return std::to_string(c.EXPR); }}
#define MLE_BOOL(KEY, EXPR)                                                                                       \
    Entry{KEY, [](RunConfig& c, const std::string& v) { c.EXPR = to_bool(KEY, v); },                          \
          [](const RunConfig& c) { return std::string(c.EXPR ? "true" : "false"); }}

const std::vector<Entry>& entries()
{
    static const std::vector<Entry> table = {
        Entry{"model.drift",
              [](RunConfig& c, const std::string& v) {
                  if (v != "morris_lecar" && v != "zero")
                      throw Error(ErrorKind::ConfigError, "model.drift must be morris_lecar or zero, got '" + v + "'");
                  c.drift = v;
              },
              [](const RunConfig& c) { return c.drift; }},
        MLE_REAL("model.capacitance", model.capacitance),
        MLE_REAL("model.g_ca", model.g_ca),
        MLE_REAL("model.g_k", model.g_k),
        MLE_REAL("model.g_l", model.g_l),
        MLE_REAL("model.v_ca", model.v_ca),
        MLE_REAL("model.v_k", model.v_k),
        MLE_REAL("model.v_l", model.v_l),
        MLE_REAL("model.v1", model.v1),
        MLE_REAL("model.v2", model.v2),
        MLE_REAL("model.v3", model.v3),
        MLE_REAL("model.v4", model.v4),
        MLE_REAL("model.phi", model.phi),
        MLE_REAL("model.current", model.current),
        MLE_REAL("scaling.v", scaling.v_scale),
        MLE_REAL("scaling.w", scaling.w_scale),

        MLE_REAL("noise.alpha", noise.alpha),
        Entry{"noise.sigma",
              [](RunConfig& c, const std::string& v) { c.noise.sigma1 = c.noise.sigma2 = to_double("noise.sigma", v); },
              {}},
        MLE_REAL("noise.sigma1", noise.sigma1),
        MLE_REAL("noise.sigma2", noise.sigma2),
        Entry{"noise.normalization",
              [](RunConfig& c, const std::string& v) { c.noise.normalization = parse_jump_normalization(v); },
              [](const RunConfig& c) { return std::string(to_string(c.noise.normalization)); }},

        MLE_REAL("region.a", region.a),
        MLE_REAL("region.b", region.b),
        MLE_REAL("region.c", region.c),
        MLE_REAL("region.d", region.d),
        MLE_REAL("target.a_prime", target.a_p),
        MLE_REAL("target.b_prime", target.b_p),
        Entry{"point",
              [](RunConfig& c, const std::string& v) {
                  if (v == "equilibrium") {
                      c.point.reset();
                      return;
                  }
                  const auto xs = to_list("point", v);
                  if (xs.size() != 2)
                      throw Error(ErrorKind::ConfigError, "point must be 'equilibrium' or 'v, w', got '" + v + "'");
                  c.point = State{xs[0], xs[1]};
              },
              [](const RunConfig& c) {
                  return c.point ? num(c.point->v) + ", " + num(c.point->w) : std::string("equilibrium");
              }},

        Entry{"solver.n",
              [](RunConfig& c, const std::string& v) {
                  c.solver.grid.n_v = c.solver.grid.n_w = static_cast<int>(to_integer("solver.n", v));
              },
              {}},
        MLE_INT("solver.n_v", solver.grid.n_v, int),
        MLE_INT("solver.n_w", solver.grid.n_w, int),
        Entry{"solver.scheme",
              [](RunConfig& c, const std::string& v) { c.solver.drift_scheme = parse_drift_scheme(v); },
              [](const RunConfig& c) { return std::string(to_string(c.solver.drift_scheme)); }},
        Entry{"solver.quadrature",
              [](RunConfig& c, const std::string& v) { c.solver.quadrature = parse_quadrature(v); },
              [](const RunConfig& c) { return std::string(to_string(c.solver.quadrature)); }},
        MLE_REAL("solver.tolerance", solver.tolerance),
        MLE_INT("solver.max_iterations", solver.max_iterations, int),
        MLE_INT("solver.restart", solver.restart, int),

        MLE_REAL("mc.dt", mc.dt),
        MLE_REAL("mc.t_max", mc.t_max),
        Entry{"mc.paths",
              [](RunConfig& c, const std::string& v) {
                  const long long n = to_integer("mc.paths", v);
                  if (n < 0)
                      throw Error(ErrorKind::ConfigError, "mc.paths must be >= 100");
                  c.mc.paths = static_cast<std::size_t>(n);
              },
              [](const RunConfig& c) { return std::to_string(c.mc.paths); }},
        MLE_INT("mc.seed", mc.seed, std::uint64_t),
        MLE_BOOL("mc.antithetic", mc.antithetic),
        MLE_INT("mc.workers", mc.workers, int),
        MLE_BOOL("mc.validation", mc.validation),
        MLE_REAL("mc.censor_limit", mc.censor_limit),
        MLE_BOOL("mc.bridge", mc.bridge),
        MLE_BOOL("mc.dump", mc_dump),

        Entry{"sweep.alphas", [](RunConfig& c, const std::string& v) { c.sweep.alphas = to_list("sweep.alphas", v); },
              [](const RunConfig& c) { return list(c.sweep.alphas); }},
        Entry{"sweep.alpha_range",
              [](RunConfig& c, const std::string& v) {
                  const auto xs = to_list("sweep.alpha_range", v);
                  if (xs.size() != 3)
                      throw Error(ErrorKind::ConfigError, "sweep.alpha_range must be 'lo, hi, step'");
                  c.sweep.alphas = SweepSpec::range(xs[0], xs[1], xs[2]);
              },
              {}},
        Entry{"sweep.sigmas", [](RunConfig& c, const std::string& v) { c.sweep.sigmas = to_list("sweep.sigmas", v); },
              [](const RunConfig& c) { return list(c.sweep.sigmas); }},
        Entry{"sweep.sigma_range",
              [](RunConfig& c, const std::string& v) {
                  const auto xs = to_list("sweep.sigma_range", v);
                  if (xs.size() != 3)
                      throw Error(ErrorKind::ConfigError, "sweep.sigma_range must be 'lo, hi, step'");
                  c.sweep.sigmas = SweepSpec::range(xs[0], xs[1], xs[2]);
              },
              {}},
        Entry{"sweep.mode", [](RunConfig& c, const std::string& v) { c.sweep.mode = parse_sweep_mode(v); },
              [](const RunConfig& c) { return std::string(to_string(c.sweep.mode)); }},
        MLE_REAL("sweep.fixed_sigma", sweep.fixed_sigma),
        MLE_BOOL("sweep.brownian", sweep.brownian),
        MLE_BOOL("sweep.fep", sweep.want_fep),
        MLE_BOOL("sweep.mfet", sweep.want_mfet),
        MLE_BOOL("sweep.fields", sweep.fields),
        MLE_INT("sweep.workers", sweep_workers, int),
        MLE_BOOL("sweep.cache", sweep_cache),
        MLE_REAL("metrics.p_star", sweep.thresholds.p_star),
        MLE_REAL("metrics.u_star", sweep.thresholds.u_star),

        Entry{"output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
              [](const RunConfig& c) { return c.output_dir; }},
        MLE_BOOL("output.render", render),
        MLE_INT("output.cell_px", cell_px, int),
    };
    return table;
}

#undef MLE_REAL
#undef MLE_INT
#undef MLE_BOOL

/// Rethrow a domain error from a constituent validator as a config error that
/// names the key.
template <typename F>
void check(const char* key, F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        const std::string what = e.what();
        if (what.rfind(key, 0) == 0)
            throw Error(ErrorKind::ConfigError, what);
        throw Error(ErrorKind::ConfigError, std::string(key) + ": " + what);
    }
}

} // namespace

void set_key(RunConfig& config, const std::string& key, const std::string& value)
{
    for (const Entry& e : entries()) {
        if (e.key == key) {
            e.set(config, value);
            return;
        }
    }
    throw Error(ErrorKind::ConfigError, "unknown config key '" + key + "'");
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> out;
    for (const Entry& e : entries())
        out.push_back(e.key);
    return out;
}

void RunConfig::validate() const
{
    check("model", [&] { model.validate(); });
    if (!(scaling.v_scale > 0.0 && scaling.w_scale > 0.0))
        throw Error(ErrorKind::ConfigError, "scaling: scale factors must be > 0");
    check("noise.alpha", [&] { noise.validate(/*stochastic=*/false); });
    check("region", [&] { region.validate(); });
    check("target", [&] { target.validate(region); });
    if (point && !region.contains(*point))
        throw Error(ErrorKind::ConfigError, "point must lie inside the region");
    check("solver", [&] { solver.grid.validate(); });
    check("solver", [&] { solver.validate(); });
    check("mc", [&] { mc.validate(); });
    check("sweep", [&] { sweep.validate(); });
    if (sweep_workers < 0)
        throw Error(ErrorKind::ConfigError, "sweep.workers must be >= 0");
    if (output_dir.empty())
        throw Error(ErrorKind::ConfigError, "output.dir must not be empty");
    if (cell_px < 1 || cell_px > 16)
        throw Error(ErrorKind::ConfigError, "output.cell_px must lie in [1,16]");
}

DriftField RunConfig::drift_field() const
{
    if (drift == "zero")
        return zero_field();
    return morris_lecar_field(model, scaling);
}

std::string RunConfig::drift_key() const
{
    if (drift == "zero")
        return "zero";
    std::string out = "morris_lecar";
    for (const std::string key : {"model.capacitance", "model.g_ca", "model.g_k", "model.g_l", "model.v_ca",
                                  "model.v_k", "model.v_l", "model.v1", "model.v2", "model.v3", "model.v4",
                                  "model.phi", "model.current", "scaling.v", "scaling.w"}) {
        for (const Entry& e : entries()) {
            if (e.key == key) {
                double x = 0.0;
                x = to_double(key, e.get(*this));
                char buf[40];
                std::snprintf(buf, sizeof buf, ",%a", x);
                out += buf;
            }
        }
    }
    return out;
}

State RunConfig::evaluation_point() const
{
    if (point)
        return *point;
    if (drift == "zero")
        return region.center();
    return find_equilibrium(model, scaling);
}

SweepProblem RunConfig::sweep_problem() const
{
    SweepProblem p;
    p.drift = drift_field();
    p.drift_key = drift_key();
    p.region = region;
    p.target = target;
    p.point = evaluation_point();
    p.solver = solver;
    p.normalization = noise.normalization;
    return p;
}

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides)
{
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    auto assign = [&config](const std::string& raw, const std::string& where) {
        const auto eq = raw.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ConfigError, where + ": expected 'key = value', got '" + raw + "'");
        set_key(config, trim(std::string_view(raw).substr(0, eq)), trim(std::string_view(raw).substr(eq + 1)));
    };
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        assign(line, "line " + std::to_string(number));
    }
    for (const std::string& o : overrides)
        assign(o, "override");
    config.validate();
    return config;
}

RunConfig parse_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides)
{
    return parse_config_text(file ? read_text(*file) : std::string(), overrides);
}

std::string emit_config(const RunConfig& config)
{
    std::string out;
    std::string section;
    for (const Entry& e : entries()) {
        if (!e.get)
            continue;
        const std::string s = e.key.substr(0, e.key.find('.'));
        if (s != section && !out.empty())
            out += '\n';
        section = s;
        out += e.key + " = " + e.get(config) + '\n';
    }
    return out;
}

} // namespace mlescape
