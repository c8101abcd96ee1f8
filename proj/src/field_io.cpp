#include "mlescape/field_io.hpp"

#include "mlescape/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace mlescape {

namespace fs = std::filesystem;

void write_text_atomic(const fs::path& file, const std::string& contents)
{
    static std::atomic<unsigned> counter{0};
    std::error_code ec;
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path(), ec);
        if (ec)
            throw Error(ErrorKind::IoError, "cannot create directory " + file.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = file;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorKind::IoError, "cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out)
            throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, file, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::IoError, "cannot move output into place at " + file.string());
    }
}

std::string read_text(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string field_csv(const ScalarField& field)
{
    std::string out = "v,w,value\n";
    out.reserve(out.size() + field.values.size() * 40);
    char line[128];
    for (int k = 0; k < field.grid.n_w; ++k) {
        for (int i = 0; i < field.grid.n_v; ++i) {
            const State p = field.node(i, k);
            std::snprintf(line, sizeof line, "%.6g,%.6g,%.6g\n", p.v, p.w, field.at(i, k));
            out += line;
        }
    }
    return out;
}

void write_field_csv(const fs::path& file, const ScalarField& field)
{
    write_text_atomic(file, field_csv(field));
}

FieldTable read_field_csv(const fs::path& file)
{
    std::istringstream in(read_text(file));
    std::string line;
    if (!std::getline(in, line) || line.rfind("v,w,value", 0) != 0)
        throw Error(ErrorKind::IoError, file.string() + ": missing `v,w,value` header");

    std::vector<double> vs, ws, values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        double v = 0, w = 0, x = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &v, &w, &x) != 3)
            throw Error(ErrorKind::IoError, file.string() + ": malformed row " + std::to_string(row));
        vs.push_back(v);
        ws.push_back(w);
        values.push_back(x);
    }
    if (values.empty())
        throw Error(ErrorKind::IoError, file.string() + ": no data rows");

    FieldTable t;
    // w is the slow index: the v lattice is the prefix before w first changes.
    std::size_t n_v = 1;
    while (n_v < ws.size() && ws[n_v] == ws[0])
        ++n_v;
    if (values.size() % n_v != 0)
        throw Error(ErrorKind::IoError, file.string() + ": row count is not a multiple of the v lattice");
    t.v.assign(vs.begin(), vs.begin() + static_cast<std::ptrdiff_t>(n_v));
    for (std::size_t r = 0; r < values.size(); r += n_v)
        t.w.push_back(ws[r]);
    t.values = std::move(values);
    return t;
}

std::string field_metadata(const ScalarField& field, const NoiseSpec& noise, const SolverConfig& config,
                           const std::map<std::string, std::string>& extras)
{
    nlohmann::ordered_json j;
    j["kind"] = field.kind == FieldKind::fep ? "fep" : "mfet";
    j["region"] = {{"a", field.region.a}, {"b", field.region.b}, {"c", field.region.c}, {"d", field.region.d}};
    if (field.target) {
        j["target"] = {{"a_prime", field.target->a_p},
                       {"b_prime", std::isfinite(field.target->b_p) ? nlohmann::ordered_json(field.target->b_p)
                                                                    : nlohmann::ordered_json("inf")}};
    }
    j["alpha"] = noise.alpha;
    j["sigma1"] = noise.sigma1;
    j["sigma2"] = noise.sigma2;
    j["normalization"] = std::string(to_string(noise.normalization));
    j["grid"] = {{"n_v", field.grid.n_v}, {"n_w", field.grid.n_w}};
    j["scheme"] = std::string(to_string(config.drift_scheme));
    j["quadrature"] = std::string(to_string(config.quadrature));
    j["tolerance"] = config.tolerance;
    j["residual"] = field.residual;
    j["iterations"] = field.iterations;
    j["wall_time_s"] = field.seconds;
    j["min"] = field.min();
    j["max"] = field.max();
    for (const auto& [k, v] : extras)
        j[k] = v;
    return j.dump(2) + "\n";
}

} // namespace mlescape
