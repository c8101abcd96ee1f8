#include "mlescape/monte_carlo.hpp"

#include "mlescape/error.hpp"
#include "mlescape/field_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <thread>

namespace mlescape {

void SimConfig::validate() const
{
    if (!(dt > 0.0))
        throw Error(ErrorKind::ConfigError, "mc.dt must be > 0");
    if (!(t_max >= 100.0 * dt))
        throw Error(ErrorKind::ConfigError, "mc.t_max must be >= 100 * mc.dt");
    if (paths < 100)
        throw Error(ErrorKind::ConfigError, "mc.paths must be >= 100");
    if (workers < 0)
        throw Error(ErrorKind::ConfigError, "mc.workers must be >= 0");
    if (!(censor_limit >= 0.0 && censor_limit <= 1.0))
        throw Error(ErrorKind::ConfigError, "mc.censor_limit must lie in [0,1]");
}

int SimConfig::worker_count() const
{
    if (workers > 0)
        return workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

State step(State state, const DriftField& drift, const IncrementSampler& noise, double dt, Engine& channel1,
           Engine& channel2, bool negate)
{
    const State f = drift(state);
    return {state.v + f.v * dt + noise(1, channel1, negate), state.w + f.w * dt + noise(2, channel2, negate)};
}

namespace {

/// Brownian-bridge test for a boundary crossing inside one step whose two
/// endpoints lie in D. Given the endpoints, the probability that a channel
/// with step variance `var` touched a level at distances d0, d1 is
/// exp(-2 d0 d1 / var). Returns the boundary point of the crossed side.
std::optional<State> bridge_exit(State from, State to, const Region& r, double var1, double var2, Engine& engine)
{
    auto crossed = [&engine](double d0, double d1, double var) {
        if (var == 0.0)
            return false;
        const double exponent = 2.0 * d0 * d1 / var;
        // Below e^-40 the draw cannot change the outcome at double precision.
        return exponent < 40.0 && open_uniform(engine) < std::exp(-exponent);
    };
    if (crossed(r.b - from.v, r.b - to.v, var1))
        return State{r.b, to.w};
    if (crossed(from.v - r.a, to.v - r.a, var1))
        return State{r.a, to.w};
    if (crossed(r.d - from.w, r.d - to.w, var2))
        return State{to.v, r.d};
    if (crossed(from.w - r.c, to.w - r.c, var2))
        return State{to.v, r.c};
    return std::nullopt;
}

} // namespace

PathOutcome simulate_path(State start, const Region& region, const TargetStrip& target, const DriftField& drift,
                          const NoiseSpec& noise, const SimConfig& config, std::uint64_t path_id)
{
    PathOutcome out;
    if (!region.contains(start)) {
        out.exit_point = start;
        out.reached_E = target.contains(start, region);
        return out;
    }

    // Antithetic pairs share the streams of the even member.
    const bool negate = config.antithetic && (path_id % 2 == 1);
    const std::uint64_t stream_id = config.antithetic ? path_id / 2 : path_id;
    Engine e1 = make_stream(config.seed, stream_id, 1);
    Engine e2 = make_stream(config.seed, stream_id, 2);
    const IncrementSampler increments(noise, config.dt);
    const bool bridge = config.bridge && noise.brownian();
    Engine e3 = bridge ? make_stream(config.seed, stream_id, 3) : Engine{};
    const double var1 = noise.sigma1 * noise.sigma1 * config.dt;
    const double var2 = noise.sigma2 * noise.sigma2 * config.dt;

    const auto max_steps = static_cast<std::uint64_t>(std::ceil(config.t_max / config.dt));
    State x = start;
    for (std::uint64_t n = 1; n <= max_steps; ++n) {
        const State prev = x;
        x = step(x, drift, increments, config.dt, e1, e2, negate);
        if (!std::isfinite(x.v) || !std::isfinite(x.w)) {
            out.exit_time = config.t_max;
            out.exit_point = x;
            out.censored = true;
            out.non_finite = true;
            return out;
        }
        if (!region.contains(x)) {
            out.exit_time = static_cast<double>(n) * config.dt;
            out.exit_point = x;
            out.reached_E = target.contains(x, region);
            return out;
        }
        if (bridge) {
            if (const auto hit = bridge_exit(prev, x, region, var1, var2, e3)) {
                out.exit_time = static_cast<double>(n) * config.dt;
                out.exit_point = *hit;
                out.reached_E = target.contains(*hit, region);
                return out;
            }
        }
    }
    out.exit_time = config.t_max;
    out.exit_point = x;
    out.censored = true;
    return out;
}

std::vector<PathOutcome> simulate(State start, const Region& region, const TargetStrip& target,
                                  const DriftField& drift, const NoiseSpec& noise, const SimConfig& config)
{
    config.validate();
    noise.validate(/*stochastic=*/false);
    region.validate();
    target.validate(region);

    std::vector<PathOutcome> outcomes(config.paths);
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(config.worker_count(), config.paths));
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p)
            outcomes[p] = simulate_path(start, region, target, drift, noise, config, p);
    };
    if (workers <= 1) {
        run(0, config.paths);
        return outcomes;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (config.paths + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(config.paths, begin + chunk);
        if (begin < end)
            pool.emplace_back(run, begin, end);
    }
    for (auto& t : pool)
        t.join();
    return outcomes;
}

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

PathEstimate summarize(std::span<const PathOutcome> outcomes, const SimConfig& config, bool binomial,
                       const char* what)
{
    PathEstimate est;
    est.total = outcomes.size();
    std::vector<double> xs;
    xs.reserve(outcomes.size());
    std::size_t censored = 0;
    for (const PathOutcome& o : outcomes) {
        if (o.non_finite)
            ++est.non_finite;
        if (o.censored) {
            ++censored;
            continue;
        }
        xs.push_back(binomial ? (o.reached_E ? 1.0 : 0.0) : o.exit_time);
    }
    est.effective = xs.size();
    est.censored_fraction = est.total ? static_cast<double>(censored) / static_cast<double>(est.total) : 0.0;

    if (config.validation && est.censored_fraction > config.censor_limit) {
        std::ostringstream msg;
        msg << what << ": censored fraction " << est.censored_fraction << " exceeds " << config.censor_limit
            << " at horizon " << config.t_max;
        throw Error(ErrorKind::HorizonTooShort, msg.str());
    }
    if (xs.empty())
        throw Error(ErrorKind::InsufficientData, std::string(what) + ": every path was censored");

    const double n = static_cast<double>(xs.size());
    est.mean = pairwise_sum(xs) / n;
    double variance = 0.0;
    if (binomial) {
        variance = est.mean * (1.0 - est.mean);
    } else if (xs.size() > 1) {
        for (double& x : xs)
            x = (x - est.mean) * (x - est.mean);
        variance = pairwise_sum(xs) / (n - 1.0);
    }
    est.half_width = 1.96 * std::sqrt(std::max(variance, 0.0) / n);
    return est;
}

} // namespace

PathEstimate fep_from(std::span<const PathOutcome> outcomes, const SimConfig& config)
{
    return summarize(outcomes, config, true, "FEP estimate");
}

PathEstimate mfet_from(std::span<const PathOutcome> outcomes, const SimConfig& config)
{
    return summarize(outcomes, config, false, "MFET estimate");
}

PathEstimate estimate_fep(State start, const Region& region, const TargetStrip& target, const DriftField& drift,
                          const NoiseSpec& noise, const SimConfig& config)
{
    const auto outcomes = simulate(start, region, target, drift, noise, config);
    return fep_from(outcomes, config);
}

PathEstimate estimate_mfet(State start, const Region& region, const DriftField& drift, const NoiseSpec& noise,
                           const SimConfig& config)
{
    TargetStrip target;
    target.a_p = region.b;
    const auto outcomes = simulate(start, region, target, drift, noise, config);
    return mfet_from(outcomes, config);
}

void write_outcomes_csv(const std::filesystem::path& file, std::span<const PathOutcome> outcomes)
{
    // Shortest round-trip representation of each double.
    auto num = [](double x) {
        char buf[64];
        const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
        return std::string(buf, end);
    };
    std::string out = "path_id,exit_time,exit_v,exit_w,reached_E,censored\n";
    for (std::size_t p = 0; p < outcomes.size(); ++p) {
        const PathOutcome& o = outcomes[p];
        out += std::to_string(p) + ',' + num(o.exit_time) + ',' + num(o.exit_point.v) + ',' + num(o.exit_point.w)
               + ',' + (o.reached_E ? '1' : '0') + ',' + (o.censored ? '1' : '0') + '\n';
    }
    write_text_atomic(file, out);
}

} // namespace mlescape
