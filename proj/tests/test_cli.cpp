// End-to-end tests of the command-line front end. The binary path arrives as
// the first program argument (wired up by the build); each test drives it via
// std::system in a scratch directory and inspects the produced files with the
// library's own readers.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <firenet/io.hpp>
#include <firenet/solver.hpp>

using namespace firenet;
namespace fs = std::filesystem;

static std::string g_cli;
static fs::path g_dir;

namespace {

int run_cli(const std::string& args, const std::string& capture = "") {
    std::string cmd = g_cli + " " + args;
    if (!capture.empty()) cmd += " > " + capture + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string path(const std::string& name) { return (g_dir / name).string(); }

void write_levels(const std::string& p, const LevelModel& lm) {
    write_json_file(p, level_model_to_json(lm));
}

}  // namespace

TEST_CASE("pattern: full grid, determinism, mask") {
    REQUIRE(run_cli("pattern --kind walsh --r 3 --d 1 --fraction 1.0 --seed 7 --out " +
                    path("full.json")) == 0);
    auto sc = scheme_from_json(read_json_file(path("full.json")));
    CHECK(sc.m() == 8);
    CHECK(sc.indices.size() == 8);
    for (double s : sc.scaling) CHECK(s == 1.0);

    REQUIRE(run_cli("pattern --kind fourier --r 4 --d 2 --fraction 0.5 --seed 3 --out " +
                    path("a.json")) == 0);
    REQUIRE(run_cli("pattern --kind fourier --r 4 --d 2 --fraction 0.5 --seed 3 --out " +
                    path("b.json")) == 0);
    CHECK(slurp(path("a.json")) == slurp(path("b.json")));
    CHECK(fs::exists(path("a.json") + ".mask.pgm"));
    CHECK(fs::exists(g_dir / "run.json"));
    auto rj = read_json_file((g_dir / "run.json").string());
    CHECK(rj.at("command") == "pattern");
    CHECK(rj.at("seed").get<std::uint64_t>() == 3);
}

TEST_CASE("pattern: fraction targeting at 256^2") {
    auto M = wavelet_level_bounds(8, 2);
    std::vector<std::size_t> s(M.size());
    std::size_t prev = 0;
    for (std::size_t j = 0; j < M.size(); ++j) {
        s[j] = std::max<std::size_t>(1, (M[j] - prev) / 8);
        prev = M[j];
    }
    LevelModel lm(M, s, optimal_weights(M, s));
    write_levels(path("lvl256.json"), lm);
    REQUIRE(run_cli("pattern --kind fourier --r 8 --d 2 --levels " + path("lvl256.json") +
                    " --fraction 0.15 --seed 1 --out " + path("p256.json")) == 0);
    auto sc = scheme_from_json(read_json_file(path("p256.json")));
    double frac = static_cast<double>(sc.m()) / static_cast<double>(sc.N());
    CHECK(frac >= 0.145);
    CHECK(frac <= 0.155);
}

TEST_CASE("measure: exact noise level and determinism") {
    REQUIRE(run_cli("pattern --kind fourier --r 3 --d 2 --fraction 1.0 --seed 1 --out " +
                    path("sch.json")) == 0);
    auto sc = scheme_from_json(read_json_file(path("sch.json")));
    Rng rng(11);
    ComplexTensor img({8, 8});
    for (auto& v : img.data) v = rng.uniform();
    write_complex(path("img.fncx"), img);

    MeasurementOperator op{sc, OperatorDomain::Image};
    CVec Ax = op.forward(img.data);

    REQUIRE(run_cli("measure --image " + path("img.fncx") + " --scheme " + path("sch.json") +
                    " --noise 0 --out " + path("y0.fncv")) == 0);
    CVec y0 = read_complex_vec(path("y0.fncv"));
    REQUIRE(y0.size() == Ax.size());
    for (std::size_t i = 0; i < Ax.size(); ++i) CHECK(std::abs(y0[i] - Ax[i]) < 1e-12);

    REQUIRE(run_cli("measure --image " + path("img.fncx") + " --scheme " + path("sch.json") +
                    " --noise 0.02 --seed 9 --out " + path("y1.fncv")) == 0);
    CVec y1 = read_complex_vec(path("y1.fncv"));
    double ne = 0.0;
    for (std::size_t i = 0; i < Ax.size(); ++i) ne += std::norm(y1[i] - Ax[i]);
    CHECK(std::sqrt(ne) / norm_l2(Ax) == doctest::Approx(0.02).epsilon(1e-6));

    REQUIRE(run_cli("measure --image " + path("img.fncx") + " --scheme " + path("sch.json") +
                    " --noise 0.02 --seed 9 --out " + path("y2.fncv")) == 0);
    CHECK(slurp(path("y1.fncv")) == slurp(path("y2.fncv")));
}

TEST_CASE("measure: FIRENET_SEED fallback") {
    REQUIRE(fs::exists(path("img.fncx")));
    setenv("FIRENET_SEED", "9", 1);
    REQUIRE(run_cli("measure --image " + path("img.fncx") + " --scheme " + path("sch.json") +
                    " --noise 0.02 --out " + path("yenv.fncv")) == 0);
    unsetenv("FIRENET_SEED");
    CHECK(slurp(path("yenv.fncv")) == slurp(path("y1.fncv")));
}

TEST_CASE("reconstruct: full-sampling noiseless roundtrip") {
    // scheme and image from the measure test (full 8x8 Fourier grid)
    REQUIRE(run_cli("reconstruct --measurements " + path("y0.fncv") + " --scheme " +
                    path("sch.json") + " --lambda 0.0005 --p 10 --n 25 --out " +
                    path("rec")) == 0);
    ComplexTensor img = read_complex(path("img.fncx"));
    ComplexTensor out = read_complex(path("rec.fncx"));
    REQUIRE(out.size() == img.size());
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        err += std::norm(out.data[i] - img.data[i]);
        ref += std::norm(img.data[i]);
    }
    CHECK(std::sqrt(err / ref) <= 1e-6);

    std::string trace = slurp(path("rec.trace.csv"));
    CHECK(trace.substr(0, trace.find('\n')) ==
          "restart,inner,objective,objective_gap,l2_error_to_ref,epsilon_k,beta_k");
    // 25 restarts x 10 inner iterations
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 251);
    CHECK(fs::exists(path("rec.pgm")));
    auto rj = read_json_file((g_dir / "run.json").string());
    CHECK(rj.at("command") == "reconstruct");
    CHECK(rj.at("lambda").get<double>() == doctest::Approx(0.0005));
}

TEST_CASE("reconstruct: n = 0 returns the zero image") {
    REQUIRE(run_cli("reconstruct --measurements " + path("y0.fncv") + " --scheme " +
                    path("sch.json") + " --n 0 --out " + path("rec0")) == 0);
    ComplexTensor out = read_complex(path("rec0.fncx"));
    for (const auto& v : out.data) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("adversarial: smoke run with consistent report") {
    REQUIRE(run_cli("adversarial --image " + path("img.fncx") + " --scheme " + path("sch.json") +
                    " --p 3 --n 2 --steps 5 --restarts 2 --seed 4 --out " + path("adv")) == 0);
    auto rep = read_json_file(path("adv.report.json"));
    ComplexTensor r = read_complex(path("adv.r.fncx"));
    CHECK(rep.at("norm_r").get<double>() == doctest::Approx(norm_l2(r.data)).epsilon(1e-9));
    CHECK(rep.at("norm_damage").get<double>() >= 0.0);
    CHECK(std::isfinite(rep.at("Q_value").get<double>()));
    CHECK(fs::exists(path("adv.recon.pgm")));
    CHECK(fs::exists(path("adv.qtrace.csv")));

    // determinism
    REQUIRE(run_cli("adversarial --image " + path("img.fncx") + " --scheme " + path("sch.json") +
                    " --p 3 --n 2 --steps 5 --restarts 2 --seed 4 --out " + path("adv2")) == 0);
    CHECK(slurp(path("adv.r.fncx")) == slurp(path("adv2.r.fncx")));
}

TEST_CASE("barrier: one row, CSV reparses") {
    REQUIRE(run_cli("barrier --K 1 --n 10 --out " + path("bar.csv")) == 0);
    std::string csv = slurp(path("bar.csv"));
    CHECK(csv.substr(0, csv.find('\n')) == "K,n,dist,lower_bound,upper_bound,pass");
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    REQUIRE(std::getline(ss, line));
    std::stringstream row(line);
    std::string tok;
    std::getline(row, tok, ',');
    CHECK(tok == "1");
    std::getline(row, tok, ',');
    CHECK(tok == "10");
    std::getline(row, tok, ',');
    double dist = std::stod(tok);
    CHECK(dist > 0.1);
    CHECK(dist <= 1.0);
}

TEST_CASE("bad flags exit nonzero with an error JSON") {
    CHECK(run_cli("reconstruct --measurements missing.fncv", path("err1.txt")) != 0);
    auto j1 = read_json_file(path("err1.txt"));
    CHECK(j1.contains("error"));

    CHECK(run_cli("measure --image nope.fncx --scheme nope.json --out " + path("z.fncv"),
                  path("err2.txt")) != 0);
    auto j2 = read_json_file(path("err2.txt"));
    CHECK(j2.contains("error"));

    CHECK(run_cli("pattern --kind fourier --r 3 --noise -1 --out " + path("z.json"),
                  path("err3.txt")) != 0);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-cli-binary>\n");
        return 2;
    }
    g_cli = argv[1];
    fs::path base = fs::temp_directory_path() / "firenet_cli_test";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base);
    g_dir = base;
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
