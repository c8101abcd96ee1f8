#include "mlescape/ml_model.hpp"

#include "mlescape/error.hpp"

#include <cmath>
#include <string>

namespace mlescape {

void MLParams::validate() const
{
    auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
    if (!(capacitance > 0.0)) fail("model.C must be > 0");
    if (!(phi > 0.0)) fail("model.phi must be > 0");
    if (v2 == 0.0) fail("model.V2 must be nonzero");
    if (v4 == 0.0) fail("model.V4 must be nonzero");
    if (g_ca < 0.0 || g_k < 0.0 || g_l < 0.0) fail("model conductances must be >= 0");
}

Gating gating(double v_raw, const MLParams& p)
{
    // 0.5 (1 + tanh x) = 1 / (1 + e^{-2x}) and sech y = 2 / (e^y + e^{-y}); one
    // exponential serves both w_inf and tau_w. The limits stay exact under overflow.
    const double x1 = (v_raw - p.v1) / p.v2;
    const double y = (v_raw - p.v3) / (2.0 * p.v4);
    const double e = std::exp(y);
    const double ie = 1.0 / e;
    const double ie2 = ie * ie;
    return {
        1.0 / (1.0 + std::exp(-2.0 * x1)),
        1.0 / (1.0 + ie2 * ie2),
        2.0 / (e + ie),
    };
}

State raw_drift(State raw, const MLParams& p)
{
    const Gating g = gating(raw.v, p);
    const double ionic = -p.g_ca * g.m_inf * (raw.v - p.v_ca) - p.g_k * raw.w * (raw.v - p.v_k)
                         - p.g_l * (raw.v - p.v_l) + p.current;
    return {ionic / p.capacitance, p.phi * (g.w_inf - raw.w) / g.tau_w};
}

State drift(State scaled, const MLParams& params, const ScalingMap& scaling)
{
    const State f = raw_drift(scaling.to_raw(scaled), params);
    return {scaling.v_scale * f.v, scaling.w_scale * f.w};
}

std::array<double, 4> drift_jacobian(State scaled, const MLParams& p, const ScalingMap& scaling)
{
    const State raw = scaling.to_raw(scaled);
    const double v = raw.v;
    const Gating g = gating(v, p);

    const double x1 = (v - p.v1) / p.v2;
    const double sech1 = 1.0 / std::cosh(x1);
    const double dm = 0.5 * sech1 * sech1 / p.v2;
    const double x3 = (v - p.v3) / p.v4;
    const double sech3 = 1.0 / std::cosh(x3);
    const double dwinf = 0.5 * sech3 * sech3 / p.v4;
    const double half = (v - p.v3) / (2.0 * p.v4);

    const double f1v = (-p.g_ca * (dm * (v - p.v_ca) + g.m_inf) - p.g_k * raw.w - p.g_l) / p.capacitance;
    const double f1w = -p.g_k * (v - p.v_k) / p.capacitance;
    const double f2v = p.phi * (dwinf * std::cosh(half) + (g.w_inf - raw.w) * std::sinh(half) / (2.0 * p.v4));
    const double f2w = -p.phi * std::cosh(half);

    // J_scaled = S J_raw S^{-1} with S = diag(v_scale, w_scale)
    const double sv = scaling.v_scale;
    const double sw = scaling.w_scale;
    return {f1v, f1w * sv / sw, f2v * sw / sv, f2w};
}

DriftField morris_lecar_field(const MLParams& params, const ScalingMap& scaling)
{
    return [params, scaling](State s) { return drift(s, params, scaling); };
}

DriftField zero_field()
{
    return [](State) { return State{0.0, 0.0}; };
}

State find_equilibrium(const MLParams& params, const ScalingMap& scaling,
                       const EquilibriumOptions& options)
{
    if (!(options.tolerance > 0.0))
        throw Error(ErrorKind::ConfigError, "equilibrium tolerance must be > 0");

    auto residual = [&](State s) {
        const State f = drift(s, params, scaling);
        return std::hypot(f.v, f.w);
    };

    State s = options.guess;
    double r = residual(s);
    for (int it = 0; it < options.max_iterations && r > options.tolerance; ++it) {
        const State f = drift(s, params, scaling);
        const auto j = drift_jacobian(s, params, scaling);
        const double det = j[0] * j[3] - j[1] * j[2];
        if (det == 0.0 || !std::isfinite(det))
            break;
        const double dv = (-f.v * j[3] + f.w * j[1]) / det;
        const double dw = (-f.w * j[0] + f.v * j[2]) / det;

        double lambda = 1.0;
        State trial{s.v + dv, s.w + dw};
        double r_trial = residual(trial);
        while (!(r_trial < r) && lambda > 1e-6) {
            lambda *= 0.5;
            trial = {s.v + lambda * dv, s.w + lambda * dw};
            r_trial = residual(trial);
        }
        if (!(r_trial < r))
            break;
        s = trial;
        r = r_trial;
    }
    if (!(r <= options.tolerance))
        throw Error(ErrorKind::NoConvergence,
                    "equilibrium residual " + std::to_string(r) + " above tolerance");
    return s;
}

Nullclines nullclines(const MLParams& p, const ScalingMap& scaling, std::span<const double> v_samples)
{
    Nullclines out;
    out.v_nullcline.reserve(v_samples.size());
    out.w_nullcline.reserve(v_samples.size());
    for (double v_scaled : v_samples) {
        const double v = v_scaled / scaling.v_scale;
        const Gating g = gating(v, p);
        const double denom = p.g_k * (v - p.v_k);
        if (denom == 0.0)
            throw Error(ErrorKind::Singular, "v-nullcline undefined at v_raw = V_K");
        const double w_raw = (-p.g_ca * g.m_inf * (v - p.v_ca) - p.g_l * (v - p.v_l) + p.current) / denom;
        out.v_nullcline.push_back(scaling.to_scaled({v, w_raw}));
        out.w_nullcline.push_back(scaling.to_scaled({v, g.w_inf}));
    }
    return out;
}

} // namespace mlescape
