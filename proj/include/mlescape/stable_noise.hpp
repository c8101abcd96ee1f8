#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mlescape {

/// Counter-style stream construction: one independent engine per
/// (seed, path, channel) triple, so results never depend on scheduling.
using Engine = std::mt19937_64;

Engine make_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t channel);

/// Uniform on the open interval (0, 1); never returns an endpoint.
double open_uniform(Engine& engine);

/// Jump-measure constant C_alpha exactly as printed for the symmetric
/// alpha-stable motion: alpha / (2^{1-alpha} pi) * Gamma(1+alpha/2) / Gamma(1-alpha/2).
/// Throws OutOfDomain outside 0 < alpha < 2.
double c_alpha(double alpha);

/// Normalization of the one-dimensional fractional Laplacian,
/// alpha 2^{alpha-1} Gamma((1+alpha)/2) / (sqrt(pi) Gamma(1-alpha/2)). This is
/// the Levy-measure density constant of the motion whose increments over dt are
/// S_alpha(dt^{1/alpha}, 0, 0).
double fractional_laplacian_constant(double alpha);

/// Tail constant C with lim y^alpha P(|L| > y) = C for L ~ S_alpha(1, 0, 0):
/// (1 - alpha) / (Gamma(2 - alpha) cos(pi alpha / 2)), 2/pi at alpha = 1.
/// One-sided tail is C/2.
double tail_constant(double alpha);

/// Which constant multiplies |y|^{-1-alpha} in the generator.
enum class JumpNormalization {
    fractional_laplacian, ///< matches S_alpha(dt^{1/alpha}) increments (default)
    planar,               ///< c_alpha(), the two-dimensional fractional-Laplacian constant
};

std::string_view to_string(JumpNormalization n);
JumpNormalization parse_jump_normalization(std::string_view text);

double jump_constant(double alpha, JumpNormalization normalization);

/// S_alpha(scale, skew, shift). Samplers accept only the symmetric centred case.
struct StableParams {
    double alpha = 1.0;
    double scale = 1.0;
    double skew = 0.0;
    double shift = 0.0;

    void validate() const;
};

/// Noise on the two channels. alpha = 2 selects independent Brownian motions.
struct NoiseSpec {
    double alpha = 1.25;
    double sigma1 = 0.5;
    double sigma2 = 0.5;
    JumpNormalization normalization = JumpNormalization::fractional_laplacian;

    bool brownian() const { return alpha == 2.0; }

    /// sigma2 / sigma1; throws OutOfDomain when sigma1 == 0.
    double ratio() const;

    /// Density constant K of the jump measure K |y|^{-1-alpha} dy (alpha < 2).
    double jump_constant() const;

    double sigma(int channel) const { return channel == 1 ? sigma1 : sigma2; }

    /// Range checks. When `stochastic` is set, both intensities zero is rejected.
    void validate(bool stochastic = true) const;

    bool operator==(const NoiseSpec&) const = default;
};

/// Chambers-Mallows-Stuck draws of S_alpha(1, 0, 0). For alpha = 2 the same
/// (uniform, exponential) pair is mapped through Box-Muller, giving N(0, 2).
class StableSampler {
public:
    explicit StableSampler(double alpha);

    double alpha() const { return alpha_; }

    /// Draw from an explicit angle in (-pi/2, pi/2) and unit exponential.
    double transform(double angle, double exponential) const;

    /// `negate` mirrors the angle, which negates the draw (antithetic pairs).
    double operator()(Engine& engine, bool negate = false) const;

private:
    double alpha_;
};

std::vector<double> sample_standard(double alpha, std::uint64_t seed, std::size_t n);

/// S_alpha(params.scale, 0, 0) draws; equal to scale * sample_standard for the same seed.
std::vector<double> sample(const StableParams& params, std::uint64_t seed, std::size_t n);

/// Noise increment of channel 1 or 2 over dt. alpha < 2: sigma (kappa dt)^{1/alpha} xi
/// with xi ~ S_alpha(1,0,0) and kappa the ratio of the configured jump constant to
/// the fractional-Laplacian one (1 by default). alpha = 2: sigma sqrt(dt) N(0,1).
double increment(const NoiseSpec& spec, int channel, double dt, Engine& engine, bool negate = false);

/// Precomputed form of increment() for the path simulator's inner loop.
class IncrementSampler {
public:
    IncrementSampler(const NoiseSpec& spec, double dt);

    double operator()(int channel, Engine& engine, bool negate = false) const
    {
        const double amplitude = channel == 1 ? amplitude1_ : amplitude2_;
        if (amplitude == 0.0)
            return 0.0;
        return amplitude * sampler_(engine, negate);
    }

private:
    StableSampler sampler_;
    double amplitude1_;
    double amplitude2_;
};

struct TailEstimate {
    double alpha_hat = 0.0;
    double half_width = 0.0;
    std::size_t order_statistics = 0;
    bool power_tail = false; ///< false when alpha_hat exceeds 2 beyond its CI
    std::vector<std::pair<double, double>> by_fraction; ///< (fraction, alpha_hat) profile
};

/// Hill estimator on the largest |x|. Diagnostic only. Throws InsufficientData
/// below 1e5 samples or when the upper order statistics carry no spread.
TailEstimate tail_exponent(std::span<const double> samples, double fraction = 0.01);

} // namespace mlescape
