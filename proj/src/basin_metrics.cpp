#include "mlescape/basin_metrics.hpp"

#include "mlescape/error.hpp"
#include "mlescape/field_io.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace mlescape {

namespace fs = std::filesystem;

void ThresholdSpec::validate() const
{
    if (!(p_star > 0.0 && p_star < 1.0))
        throw Error(ErrorKind::ConfigError, "metrics.p_star must lie in (0,1)");
    if (!(u_star > 0.0))
        throw Error(ErrorKind::ConfigError, "metrics.u_star must be > 0");
}

double area_fraction(std::span<const double> values, double threshold)
{
    if (values.empty())
        return 0.0;
    const auto above = std::count_if(values.begin(), values.end(), [threshold](double x) { return x > threshold; });
    return static_cast<double>(above) / static_cast<double>(values.size());
}

double r_fep(const ScalarField& field, double p_star)
{
    return area_fraction(field.values, p_star);
}

double r_mfet(const ScalarField& field, double u_star)
{
    return area_fraction(field.values, u_star);
}

std::vector<double> turning_points(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size())
        throw Error(ErrorKind::OutOfDomain, "turning_points: abscissae and ordinates differ in length");
    std::vector<double> out;
    int last_sign = 0;
    for (std::size_t i = 1; i < ys.size(); ++i) {
        const double d = ys[i] - ys[i - 1];
        const int sign = (d > 0) - (d < 0);
        if (sign == 0)
            continue;
        if (last_sign != 0 && sign != last_sign)
            out.push_back(xs[i - 1]);
        last_sign = sign;
    }
    return out;
}

std::string_view to_string(SweepMode m)
{
    switch (m) {
    case SweepMode::diagonal: return "diagonal";
    case SweepMode::fix_sigma1: return "fix_sigma1";
    case SweepMode::fix_sigma2: return "fix_sigma2";
    }
    return "diagonal";
}

SweepMode parse_sweep_mode(std::string_view text)
{
    if (text == "diagonal")
        return SweepMode::diagonal;
    if (text == "fix_sigma1")
        return SweepMode::fix_sigma1;
    if (text == "fix_sigma2")
        return SweepMode::fix_sigma2;
    throw Error(ErrorKind::ConfigError,
                "sweep.mode must be diagonal, fix_sigma1 or fix_sigma2, got " + std::string(text));
}

void SweepSpec::validate() const
{
    if (alphas.empty() && !brownian)
        throw Error(ErrorKind::ConfigError, "sweep.alphas must not be empty");
    for (double a : alphas) {
        if (!(a > 0.0 && a < 2.0))
            throw Error(ErrorKind::ConfigError,
                        "sweep.alphas must lie in (0,2); the alpha = 2 series is requested with sweep.brownian");
    }
    if (sigmas.empty())
        throw Error(ErrorKind::ConfigError, "sweep.sigmas must not be empty");
    for (double s : sigmas) {
        if (!(s >= 0.0))
            throw Error(ErrorKind::ConfigError, "sweep.sigmas must be >= 0");
    }
    if (mode != SweepMode::diagonal && !(fixed_sigma >= 0.0))
        throw Error(ErrorKind::ConfigError, "sweep.fixed_sigma must be >= 0");
    if (!want_fep && !want_mfet)
        throw Error(ErrorKind::ConfigError, "sweep must request FEP, MFET or both");
    thresholds.validate();
}

std::vector<double> SweepSpec::range(double lo, double hi, double step)
{
    if (!(step > 0.0) || !(hi >= lo))
        throw Error(ErrorKind::ConfigError, "range needs step > 0 and hi >= lo");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i)
        out.push_back(std::round((lo + i * step) * 1e12) / 1e12);
    return out;
}

std::vector<SweepPoint> expand(const SweepSpec& spec)
{
    std::vector<double> alphas = spec.alphas;
    if (spec.brownian)
        alphas.push_back(2.0);
    std::vector<SweepPoint> out;
    for (double a : alphas) {
        for (double s : spec.sigmas) {
            switch (spec.mode) {
            case SweepMode::diagonal: out.push_back({a, s, s}); break;
            case SweepMode::fix_sigma1: out.push_back({a, spec.fixed_sigma, s}); break;
            case SweepMode::fix_sigma2: out.push_back({a, s, spec.fixed_sigma}); break;
            }
        }
    }
    return out;
}

namespace {

std::string hexf(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string canonical(const SweepProblem& problem, const SweepSpec& spec, const SweepPoint& point)
{
    std::ostringstream s;
    const Region& r = problem.region;
    const SolverConfig& c = problem.solver;
    s << "v1|drift=" << problem.drift_key << "|region=" << hexf(r.a) << ',' << hexf(r.b) << ',' << hexf(r.c) << ','
      << hexf(r.d) << "|target=" << hexf(problem.target.a_p) << ',' << hexf(problem.target.b_p)
      << "|point=" << hexf(problem.point.v) << ',' << hexf(problem.point.w) << "|grid=" << c.grid.n_v << 'x'
      << c.grid.n_w << "|scheme=" << to_string(c.drift_scheme) << "|quad=" << to_string(c.quadrature)
      << "|tol=" << hexf(c.tolerance) << "|maxit=" << c.max_iterations << "|restart=" << c.restart
      << "|norm=" << to_string(problem.normalization) << "|alpha=" << hexf(point.alpha)
      << "|s1=" << hexf(point.sigma1) << "|s2=" << hexf(point.sigma2) << "|fep=" << spec.want_fep
      << "|mfet=" << spec.want_mfet << "|fields=" << spec.fields << "|p*=" << hexf(spec.thresholds.p_star)
      << "|u*=" << hexf(spec.thresholds.u_star);
    return s.str();
}

std::string encode_row(const SweepRow& row)
{
    std::ostringstream s;
    s << hexf(row.fep_at_star) << '\n'
      << hexf(row.mfet_at_star) << '\n'
      << hexf(row.r_fep) << '\n'
      << hexf(row.r_mfet) << '\n'
      << row.status << '\n';
    return s.str();
}

std::optional<SweepRow> decode_row(const std::string& text, const SweepPoint& point)
{
    std::istringstream in(text);
    std::string f[5];
    for (auto& line : f) {
        if (!std::getline(in, line))
            return std::nullopt;
    }
    SweepRow row;
    row.point = point;
    double* slots[4] = {&row.fep_at_star, &row.mfet_at_star, &row.r_fep, &row.r_mfet};
    for (int i = 0; i < 4; ++i) {
        char* end = nullptr;
        *slots[i] = std::strtod(f[i].c_str(), &end);
        if (end == f[i].c_str())
            return std::nullopt;
    }
    row.status = f[4];
    row.cached = true;
    return row;
}

} // namespace

std::string cache_key(const SweepProblem& problem, const SweepSpec& spec, const SweepPoint& point)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(canonical(problem, spec, point)));
    return buf;
}

SweepRow evaluate_point(const SweepProblem& problem, const SweepSpec& spec, const SweepPoint& point)
{
    SweepRow row;
    row.point = point;
    try {
        const NoiseSpec noise{point.alpha, point.sigma1, point.sigma2, problem.normalization};
        const LinearSystem system(assemble(problem.drift, noise, problem.region, problem.solver), problem.solver);
        if (spec.want_fep) {
            const ScalarField p = system.solve_fep(problem.target);
            row.fep_at_star = p.evaluate(problem.point);
            if (spec.fields)
                row.r_fep = r_fep(p, spec.thresholds.p_star);
        }
        if (spec.want_mfet) {
            const ScalarField u = system.solve_mfet();
            row.mfet_at_star = u.evaluate(problem.point);
            if (spec.fields)
                row.r_mfet = r_mfet(u, spec.thresholds.u_star);
        }
    } catch (const Error& e) {
        row.status = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
        row.status = std::string("internal: ") + e.what();
    }
    // Keep the CSV single-line per row.
    std::replace(row.status.begin(), row.status.end(), ',', ';');
    std::replace(row.status.begin(), row.status.end(), '\n', ' ');
    return row;
}

std::vector<SweepRow> sweep(const SweepSpec& spec, const SweepProblem& problem, const SweepOptions& options)
{
    spec.validate();
    problem.solver.validate();
    problem.region.validate();
    problem.target.validate(problem.region);

    const std::vector<SweepPoint> points = expand(spec);
    std::vector<SweepRow> rows(points.size());
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            std::optional<fs::path> entry;
            if (options.cache_dir) {
                entry = *options.cache_dir / (cache_key(problem, spec, points[i]) + ".row");
                std::error_code ec;
                if (fs::exists(*entry, ec)) {
                    if (auto row = decode_row(read_text(*entry), points[i])) {
                        rows[i] = std::move(*row);
                        continue;
                    }
                }
            }
            rows[i] = evaluate_point(problem, spec, points[i]);
            // Failed points are recomputed on the next run.
            if (entry && rows[i].ok())
                write_text_atomic(*entry, encode_row(rows[i]));
        }
    };

    int workers = options.workers > 0 ? options.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(1, points.size())));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    return rows;
}

namespace {

std::string fmt(double x)
{
    if (std::isnan(x))
        return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace

double row_value(const SweepRow& row, std::string_view column)
{
    if (column == "fep_at_star")
        return row.fep_at_star;
    if (column == "mfet_at_star")
        return row.mfet_at_star;
    if (column == "r_fep")
        return row.r_fep;
    if (column == "r_mfet")
        return row.r_mfet;
    throw Error(ErrorKind::ConfigError, "unknown sweep column " + std::string(column));
}

std::string sweep_csv(std::span<const SweepRow> rows)
{
    std::string out = "alpha,sigma1,sigma2,fep_at_star,mfet_at_star,r_fep,r_mfet,status\n";
    for (const SweepRow& r : rows) {
        out += fmt(r.point.alpha) + ',' + fmt(r.point.sigma1) + ',' + fmt(r.point.sigma2) + ',' + fmt(r.fep_at_star)
               + ',' + fmt(r.mfet_at_star) + ',' + fmt(r.r_fep) + ',' + fmt(r.r_mfet) + ',' + r.status + '\n';
    }
    return out;
}

std::string sweep_matrix_csv(std::span<const SweepRow> rows, const SweepSpec& spec, std::string_view column)
{
    std::string out = "alpha";
    for (double s : spec.sigmas)
        out += ',' + fmt(s);
    out += '\n';
    std::map<double, std::vector<double>> by_alpha;
    const std::size_t per = spec.sigmas.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& line = by_alpha[rows[i].point.alpha];
        line.resize(per, std::numeric_limits<double>::quiet_NaN());
        line[i % per] = row_value(rows[i], column);
    }
    for (const auto& [alpha, line] : by_alpha) {
        out += fmt(alpha);
        for (double x : line)
            out += ',' + fmt(x);
        out += '\n';
    }
    return out;
}

} // namespace mlescape
