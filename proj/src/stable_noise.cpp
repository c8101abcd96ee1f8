#include "mlescape/stable_noise.hpp"

#include "mlescape/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mlescape {

namespace {

void check_open_index(double alpha)
{
    if (!(alpha > 0.0 && alpha < 2.0))
        throw Error(ErrorKind::OutOfDomain, "alpha must lie in (0,2), got " + std::to_string(alpha));
}

void check_index(double alpha)
{
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw Error(ErrorKind::OutOfDomain, "alpha must lie in (0,2], got " + std::to_string(alpha));
}

} // namespace

Engine make_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t channel)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                      static_cast<std::uint32_t>(channel), 0x9e3779b9u};
    return Engine(seq);
}

double open_uniform(Engine& engine)
{
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

double c_alpha(double alpha)
{
    check_open_index(alpha);
    return alpha / (std::pow(2.0, 1.0 - alpha) * std::numbers::pi)
           * std::tgamma(1.0 + alpha / 2.0) / std::tgamma(1.0 - alpha / 2.0);
}

double fractional_laplacian_constant(double alpha)
{
    check_open_index(alpha);
    return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma((1.0 + alpha) / 2.0)
           / (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - alpha / 2.0));
}

double tail_constant(double alpha)
{
    check_open_index(alpha);
    if (alpha == 1.0)
        return 2.0 / std::numbers::pi;
    return (1.0 - alpha) / (std::tgamma(2.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0));
}

std::string_view to_string(JumpNormalization n)
{
    return n == JumpNormalization::planar ? "planar" : "fractional_laplacian";
}

JumpNormalization parse_jump_normalization(std::string_view text)
{
    if (text == "fractional_laplacian")
        return JumpNormalization::fractional_laplacian;
    if (text == "planar")
        return JumpNormalization::planar;
    throw Error(ErrorKind::ConfigError,
                "noise.normalization must be fractional_laplacian or planar, got " + std::string(text));
}

double jump_constant(double alpha, JumpNormalization normalization)
{
    return normalization == JumpNormalization::planar ? c_alpha(alpha)
                                                   : fractional_laplacian_constant(alpha);
}

void StableParams::validate() const
{
    check_index(alpha);
    if (skew != 0.0 || shift != 0.0)
        throw Error(ErrorKind::OutOfDomain, "only symmetric centred stable laws are supported");
    if (!(scale >= 0.0))
        throw Error(ErrorKind::OutOfDomain, "stable scale must be >= 0");
}

double NoiseSpec::ratio() const
{
    if (!(sigma1 > 0.0))
        throw Error(ErrorKind::OutOfDomain, "noise ratio undefined for sigma1 = 0");
    return sigma2 / sigma1;
}

double NoiseSpec::jump_constant() const
{
    return mlescape::jump_constant(alpha, normalization);
}

void NoiseSpec::validate(bool stochastic) const
{
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw Error(ErrorKind::ConfigError, "alpha must lie in (0,2], got " + std::to_string(alpha));
    if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0))
        throw Error(ErrorKind::ConfigError, "noise intensities must be >= 0");
    if (stochastic && sigma1 == 0.0 && sigma2 == 0.0)
        throw Error(ErrorKind::ConfigError, "at least one noise intensity must be > 0");
}

StableSampler::StableSampler(double alpha) : alpha_(alpha)
{
    check_index(alpha);
}

double StableSampler::transform(double angle, double exponential) const
{
    if (alpha_ == 2.0)
        return 2.0 * std::sin(angle) * std::sqrt(exponential);
    if (alpha_ == 1.0)
        return std::tan(angle);
    const double a = alpha_;
    // sin(a U) / cos(U)^{1/a} * (cos(U - a U) / E)^{(1-a)/a}, with the powers
    // folded into a single exponential.
    return std::sin(a * angle)
           * std::exp(-std::log(std::cos(angle)) / a
                      + (1.0 - a) / a * (std::log(std::cos(angle - a * angle)) - std::log(exponential)));
}

double StableSampler::operator()(Engine& engine, bool negate) const
{
    double angle = std::numbers::pi * (open_uniform(engine) - 0.5);
    const double exponential = -std::log(open_uniform(engine));
    if (negate)
        angle = -angle;
    return transform(angle, exponential);
}

std::vector<double> sample_standard(double alpha, std::uint64_t seed, std::size_t n)
{
    const StableSampler sampler(alpha);
    Engine engine = make_stream(seed, 0, 0);
    std::vector<double> out(n);
    for (double& x : out)
        x = sampler(engine);
    return out;
}

std::vector<double> sample(const StableParams& params, std::uint64_t seed, std::size_t n)
{
    params.validate();
    std::vector<double> out = sample_standard(params.alpha, seed, n);
    for (double& x : out)
        x *= params.scale;
    return out;
}

namespace {

double increment_amplitude(const NoiseSpec& spec, int channel, double dt)
{
    if (!(dt > 0.0))
        throw Error(ErrorKind::OutOfDomain, "time step must be > 0");
    if (channel != 1 && channel != 2)
        throw Error(ErrorKind::OutOfDomain, "noise channel must be 1 or 2");
    const double sigma = spec.sigma(channel);
    if (spec.brownian())
        return sigma * std::sqrt(dt) / std::numbers::sqrt2; // S_2(1) has variance 2
    const double kappa = spec.jump_constant() / fractional_laplacian_constant(spec.alpha);
    return sigma * std::pow(kappa * dt, 1.0 / spec.alpha);
}

} // namespace

double increment(const NoiseSpec& spec, int channel, double dt, Engine& engine, bool negate)
{
    const double amplitude = increment_amplitude(spec, channel, dt);
    const StableSampler sampler(spec.alpha);
    const double xi = sampler(engine, negate);
    return amplitude == 0.0 ? 0.0 : amplitude * xi;
}

IncrementSampler::IncrementSampler(const NoiseSpec& spec, double dt)
    : sampler_(spec.alpha)
    , amplitude1_(increment_amplitude(spec, 1, dt))
    , amplitude2_(increment_amplitude(spec, 2, dt))
{
}

TailEstimate tail_exponent(std::span<const double> samples, double fraction)
{
    constexpr std::size_t kSampleFloor = 100000;
    if (samples.size() < kSampleFloor)
        throw Error(ErrorKind::InsufficientData, "tail estimate needs at least 1e5 samples");
    if (!(fraction > 0.0 && fraction < 0.5))
        throw Error(ErrorKind::OutOfDomain, "order-statistic fraction must lie in (0, 0.5)");

    std::vector<double> mags(samples.size());
    std::transform(samples.begin(), samples.end(), mags.begin(), [](double x) { return std::abs(x); });
    std::sort(mags.begin(), mags.end(), std::greater<>());

    auto hill = [&](std::size_t k) {
        const double threshold = mags[k];
        if (!(threshold > 0.0))
            throw Error(ErrorKind::InsufficientData, "tail estimate: threshold order statistic is zero");
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            sum += std::log(mags[i] / threshold);
        if (!(sum > 0.0))
            throw Error(ErrorKind::InsufficientData, "tail estimate: upper order statistics are degenerate");
        return static_cast<double>(k) / sum;
    };

    TailEstimate est;
    est.order_statistics = std::max<std::size_t>(10, static_cast<std::size_t>(fraction * samples.size()));
    est.alpha_hat = hill(est.order_statistics);
    est.half_width = 1.96 * est.alpha_hat / std::sqrt(static_cast<double>(est.order_statistics));
    est.power_tail = est.alpha_hat - est.half_width <= 2.0;
    for (double f : {fraction / 4.0, fraction / 2.0, fraction, 2.0 * fraction, 4.0 * fraction}) {
        const auto k = static_cast<std::size_t>(f * samples.size());
        if (k >= 10 && k < samples.size())
            est.by_fraction.emplace_back(f, hill(k));
    }
    return est;
}

} // namespace mlescape
