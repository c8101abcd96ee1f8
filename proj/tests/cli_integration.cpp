// End-to-end checks of the mlescape command line. The binary path is passed
// with --cli=<path>; every run writes under a scratch directory.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_scratch;

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& file)
{
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run(const std::string& args)
{
    const fs::path out = g_scratch / "stdout.txt", err = g_scratch / "stderr.txt";
    const std::string cmd = "cd '" + g_scratch.string() + "' && '" + g_cli + "' " + args + " > '" + out.string()
                            + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::size_t count_files(const fs::path& dir, const std::string& prefix, const std::string& ext)
{
    std::size_t n = 0;
    if (!fs::exists(dir))
        return 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        n += name.rfind(prefix, 0) == 0 && e.path().extension() == ext;
    }
    return n;
}

} // namespace

TEST_CASE("params prints the equilibrium and the effective configuration")
{
    const Run r = run("params");
    CHECK(r.code == 0);
    CHECK(r.out.find("equilibrium s* = (-2.72766") != std::string::npos);
    CHECK(r.out.find("noise.alpha = 1.25") != std::string::npos);
}

TEST_CASE("invalid configurations exit with status 1 and write nothing")
{
    const Run mc = run("mc --paths 0 -o mc_zero");
    CHECK(mc.code == 1);
    CHECK(mc.err.find("mc.paths") != std::string::npos);
    CHECK_FALSE(fs::exists(g_scratch / "mc_zero"));

    const Run alpha = run("fep --alpha 2.5 -o bad_alpha");
    CHECK(alpha.code == 1);
    const auto j = nlohmann::json::parse(alpha.err);
    CHECK(j["error"] == "ConfigError");
    CHECK(j["exit_code"] == 1);
    CHECK(j["message"].get<std::string>().find("noise.alpha") != std::string::npos);
    CHECK_FALSE(fs::exists(g_scratch / "bad_alpha"));

    CHECK(run("nonsense").code == 1);
    CHECK(run("mfet --set noise.colour=red").code == 1);
}

TEST_CASE("field metrics agree with a single-point sweep")
{
    const std::string common = " --set noise.alpha=1.5 noise.sigma=0.5 solver.n=31";
    REQUIRE(run("mfet -o field" + common).code == 0);
    CHECK(fs::exists(g_scratch / "field" / "mfet.csv"));
    CHECK(fs::exists(g_scratch / "field" / "mfet.json"));
    CHECK(fs::exists(g_scratch / "field" / "mfet.png"));
    CHECK(fs::exists(g_scratch / "field" / "config.txt"));

    REQUIRE(run("metrics field/mfet.csv --kind mfet --u-star 2 -o metrics").code == 0);
    const auto m = nlohmann::json::parse(slurp(g_scratch / "metrics" / "metrics.json"));

    const Run sw = run("sweep -o sweep --u-star 2" + common
                       + " sweep.alphas=1.5 sweep.sigmas=0.5 sweep.brownian=false sweep.fep=false");
    REQUIRE(sw.code == 0);
    std::istringstream csv(slurp(g_scratch / "sweep" / "sweep.csv"));
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header == "alpha,sigma1,sigma2,fep_at_star,mfet_at_star,r_fep,r_mfet,status");
    std::vector<std::string> cells;
    std::stringstream cs(row);
    for (std::string c; std::getline(cs, c, ',');)
        cells.push_back(c);
    REQUIRE(cells.size() == 8);
    CHECK(cells[7] == "ok");
    const double r_sweep = std::stod(cells[6]);
    // The field CSV carries 6 significant digits; nodes within that of u* may flip.
    CHECK(std::abs(r_sweep - m["r_mfet"].get<double>()) <= 2.0 / (31 * 31));
    CHECK(r_sweep > 0.0);
    CHECK(r_sweep < 1.0);

    // A repeated sweep is served from the cache.
    const Run again = run("sweep -o sweep --u-star 2" + common
                          + " sweep.alphas=1.5 sweep.sigmas=0.5 sweep.brownian=false sweep.fep=false");
    CHECK(again.out.find("1 from cache") != std::string::npos);
}

TEST_CASE("a figure preset writes every panel")
{
    REQUIRE(run("reproduce fig7 --n 15 -o repro").code == 0);
    const fs::path dir = g_scratch / "repro" / "fig7";
    CHECK(count_files(dir, "fig7_", ".csv") == 8);
    CHECK(count_files(dir, "fig7_", ".png") == 8);
    const auto meta = nlohmann::json::parse(slurp(dir / "preset.json"));
    CHECK(meta["panels"].size() == 8);
    CHECK(meta.contains("artifact_default"));
    CHECK(run("reproduce fig2 -o repro").code == 1);
}

TEST_CASE("render redraws a field without solving")
{
    REQUIRE(fs::exists(g_scratch / "field" / "mfet.csv"));
    const Run r = run("render field/mfet.csv --png redrawn.png --lo 0 --hi 5");
    CHECK(r.code == 0);
    CHECK(fs::exists(g_scratch / "redrawn.png"));
    CHECK(run("render missing.csv").code == 1);
}

TEST_CASE("the output root prefixes relative directories")
{
    const fs::path root = g_scratch / "rooted";
    setenv("MLESCAPE_OUTPUT_ROOT", root.string().c_str(), 1);
    const Run r = run("mc -o prefixed --paths 200 --t-max 50 --set noise.sigma=1 mc.workers=2");
    unsetenv("MLESCAPE_OUTPUT_ROOT");
    CHECK(r.code == 0);
    CHECK(fs::exists(root / "prefixed" / "mc.json"));
}

int main(int argc, char** argv)
{
    doctest::Context context;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("--cli=", 0) == 0)
            g_cli = fs::absolute(arg.substr(6)).string();
    }
    if (g_cli.empty()) {
        std::fprintf(stderr, "usage: cli_integration --cli=<path to mlescape>\n");
        return 2;
    }
    g_scratch = fs::temp_directory_path() / ("mlescape_cli_" + std::to_string(::getpid()));
    fs::remove_all(g_scratch);
    fs::create_directories(g_scratch);
    context.applyCommandLine(argc, argv);
    const int status = context.run();
    fs::remove_all(g_scratch);
    return status;
}
