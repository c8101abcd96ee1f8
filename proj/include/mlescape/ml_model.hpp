#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace mlescape {

/**
 * Morris-Lecar constants. Units: C in uF/cm^2, conductances in uS/cm^2,
 * potentials in mV, current in uA/cm^2. Defaults are the type-II
 * excitability set with I = 88, for which the unique equilibrium is stable.
 */
struct MLParams {
    double capacitance = 20.0;
    double g_ca = 4.4;
    double g_k = 8.0;
    double g_l = 2.0;
    double v_ca = 120.0;
    double v_k = -84.0;
    double v_l = -60.0;
    double v1 = -1.2;
    double v2 = 18.0;
    double v3 = 2.0;
    double v4 = 30.0;
    double phi = 0.04;
    double current = 88.0;

    /// Throws ConfigError when C, phi are not positive, V2 or V4 vanish, or a
    /// conductance is negative. Zero conductances are allowed (leak-only tests).
    void validate() const;

    bool operator==(const MLParams&) const = default;
};

/// Subcritical Hopf current of the type-II set; the equilibrium is stable below it.
/// Documentation only, no algorithm reads it.
inline constexpr double kHopfCurrent = 93.86;

/// Point in the (v, w) plane. Coordinates are scaled or raw depending on context.
struct State {
    double v = 0.0;
    double w = 0.0;

    bool operator==(const State&) const = default;
};

/// Affine change of units between raw (mV, activation in [0,1]) and the scaled
/// plane the escape problem is posed in. Time is not rescaled.
struct ScalingMap {
    double v_scale = 0.1;
    double w_scale = 10.0;

    State to_scaled(State raw) const { return {raw.v * v_scale, raw.w * w_scale}; }
    State to_raw(State scaled) const { return {scaled.v / v_scale, scaled.w / w_scale}; }

    bool operator==(const ScalingMap&) const = default;
};

struct Gating {
    double m_inf;
    double w_inf;
    double tau_w;
};

Gating gating(double v_raw, const MLParams& params);

/// Right-hand side of the deterministic Morris-Lecar system in raw units.
State raw_drift(State raw, const MLParams& params);

/// Drift in scaled coordinates: raw drift at the unscaled point, pushed through
/// the (diagonal) scaling Jacobian.
State drift(State scaled, const MLParams& params, const ScalingMap& scaling);

/// Row-major 2x2 Jacobian {df1/dv, df1/dw, df2/dv, df2/dw} of the scaled drift.
std::array<double, 4> drift_jacobian(State scaled, const MLParams& params,
                                     const ScalingMap& scaling);

/// Planar drift field in scaled coordinates, as consumed by the solver and the
/// path simulator.
using DriftField = std::function<State(State)>;

DriftField morris_lecar_field(const MLParams& params = {}, const ScalingMap& scaling = {});

/// Zero field, for the analytic oracle problems.
DriftField zero_field();

struct EquilibriumOptions {
    State guess{-2.5, 1.2};
    double tolerance = 1e-10;
    int max_iterations = 100;
};

/// Damped Newton on the scaled drift. Throws NoConvergence when the residual
/// norm does not drop below the tolerance within the iteration cap.
State find_equilibrium(const MLParams& params, const ScalingMap& scaling,
                       const EquilibriumOptions& options = {});

struct Nullclines {
    std::vector<State> v_nullcline; // f1 = 0, scaled coordinates
    std::vector<State> w_nullcline; // f2 = 0, scaled coordinates
};

/// Both nullclines sampled at the given scaled v values. The v-nullcline is
/// solved for w in closed form; throws Singular at v_raw = V_K.
Nullclines nullclines(const MLParams& params, const ScalingMap& scaling,
                      std::span<const double> v_samples);

} // namespace mlescape
