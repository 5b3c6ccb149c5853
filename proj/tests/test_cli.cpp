#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace chemoproof;
using namespace chemoproof::cli;
namespace fs = std::filesystem;

namespace {

const char* kTrivial = R"([model]
sigma = 0.5
b = 2
gamma = rational
P = 1
Q = 1

[proof]
N = 8

[sweep]
sigma =
)";

RunConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is, "test");
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("chemoproof_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(CHEMOPROOF_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig c = parse(kTrivial);
    CHECK(c.params.sigma == 0.5);
    CHECK(c.params.d == 1.0);
    CHECK(c.params.geom.b == 2.0);
    CHECK(c.params.geom.nu == 1.0001);
    CHECK(c.N == 8);
    CHECK(c.sigma_grid.empty());
    CHECK(describe(c.params.gamma) == "rational P=1 Q=1");

    const RunConfig h = parse("[model]\nsigma=0.053\nb=3*pi\ngamma=rational\nQ=1 + x^9\n[sweep]\nsigma=0.1:0.5:5\n"
                              "modes=2,4\n[finder]\nseed_mode=2\nseed_method=newton\n");
    CHECK(h.params.geom.b == 3.0 * M_PI);
    CHECK(h.params.geom.length.contains(3.0 * M_PI));
    CHECK(h.params.geom.length.width() < 1e-14);
    REQUIRE(h.sigma_grid.size() == 5);
    CHECK(h.sigma_grid.front() == 0.1);
    CHECK(h.sigma_grid.back() == 0.5);
    CHECK(h.modes == std::vector<int>{2, 4});
    CHECK(h.seed_method == "newton");

    const RunConfig e = parse("[model]\nsigma=0.6\nb=4pi\ngamma=expfraction\nalpha=9\n[sweep]\nsigma=0.1, 0.2\n");
    CHECK(std::holds_alternative<ExpFraction>(e.params.gamma));
    CHECK(e.sigma_grid == std::vector<double>{0.1, 0.2});
}

TEST_CASE("config errors") {
    const std::string model = "[model]\nsigma=0.5\nb=2\ngamma=rational\n";
    CHECK_THROWS_AS(parse("[model]\nb=2\ngamma=rational\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[proof]\nnu=1\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[proof]\nN=3\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[proof]\nrstar=0\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[proof]\nN=10\nK=20\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[proof]\nnu=abc\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[proof]\nN=4.5\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[proof]\ncolour=red\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[extra]\nx=1\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "alpha=2\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[finder]\nseed_method=bisect\n"), ConfigError);
    CHECK_THROWS_AS(parse(model + "[sweep]\nsigma=0:1\n"), ConfigError);
    CHECK_THROWS_AS(parse("sigma=1\n" + model), ConfigError);
    CHECK_THROWS_AS(parse("[model\nsigma=1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[model]\nsigma=0.5\nb=-1\ngamma=rational\n"), ConfigError);
    CHECK_THROWS_AS(parse("[model]\nsigma=0.5\nd=0\nb=1\ngamma=rational\n"), ConfigError);
    CHECK_THROWS_AS(parse("[model]\nsigma=0.5\nb=1\ngamma=tanh\n"), ConfigError);
}

TEST_CASE("find and certify the homogeneous state") {
    RunConfig c = parse(kTrivial);
    c.out_dir = scratch("trivial").string();
    std::ostringstream out, err;
    REQUIRE(cmd_find(c, out, err) == kExitOk);
    const SeqPair U = load_candidate(default_candidate_path(c), c.params);
    CHECK(U.u.degree() == 8);
    CHECK(U.u.at(0) == Enclosure(1.0));
    CHECK(U.v.at(3) == Enclosure(0.0));

    std::ostringstream cout_;
    CHECK(cmd_certify(c, "", cout_, err) == kExitOk);
    CHECK(cout_.str().rfind("PROVED Y=", 0) == 0);
    const std::string first = slurp(fs::path(c.out_dir) / "certificate.json");
    CHECK(first.find("\"status\": \"PROVED\"") != std::string::npos);
    CHECK(first.find(sha256_hex(slurp(default_candidate_path(c)))) != std::string::npos);

    // identical inputs, identical certificate
    std::ostringstream again;
    CHECK(cmd_certify(c, "", again, err) == kExitOk);
    CHECK(slurp(fs::path(c.out_dir) / "certificate.json") == first);

    // a candidate on another domain is rejected
    RunConfig other = c;
    other.params.geom = Geometry(0.0, 3.0, 1.0001);
    CHECK_THROWS_AS(load_candidate(default_candidate_path(c), other.params), ConfigError);
}

TEST_CASE("unconverged find exits with 2") {
    RunConfig c = parse(kTrivial);
    c.out_dir = scratch("noconv").string();
    c.maxit = 0;
    c.seed_mode = 1;
    c.seed_amplitude = 0.5;
    c.seed_method = "newton";
    std::ostringstream out, err;
    CHECK(cmd_find(c, out, err) == kExitNoConvergence);
    CHECK_FALSE(fs::exists(default_candidate_path(c)));
}

TEST_CASE("a poor candidate is not proved") {
    RunConfig c = parse(kTrivial);
    c.out_dir = scratch("poor").string();
    fs::create_directories(c.out_dir);
    SeqPair U{GeoSeq::constant(c.params.geom, 1.0, 8), GeoSeq::constant(c.params.geom, 1.0, 8)};
    U.u[1] = Enclosure(0.2);
    save_geoseq(default_candidate_path(c), U);
    std::ostringstream out, err;
    CHECK(cmd_certify(c, "", out, err) == kExitNotProved);
    CHECK(out.str().rfind("FAILED_", 0) == 0);
}

TEST_CASE("sweep and render") {
    SUBCASE("empty grid") {
        RunConfig c = parse(kTrivial);
        c.out_dir = scratch("empty").string();
        std::ostringstream out, err;
        CHECK(cmd_sweep(c, out, err) == kExitOk);
        CHECK(slurp(fs::path(c.out_dir) / "index.csv") == "sigma,amplitude,converged,certificate_path,status\n");
        CHECK(out.str().find("converged=0 proved=0 failed=0") != std::string::npos);
        CHECK(cmd_render((fs::path(c.out_dir) / "index.csv").string(), c.out_dir, out, err) == kExitOk);
        CHECK(slurp(fs::path(c.out_dir) / "diagram.csv") == "sigma,amplitude,status\n");
    }
    SUBCASE("stable grid") {
        RunConfig c = parse(kTrivial);
        c.out_dir = scratch("stable").string();
        c.sigma_grid = {0.5, 1.0};
        c.modes = {1};
        c.amplitudes = {0.2};
        c.threads = 2;
        std::ostringstream out, err;
        CHECK(cmd_sweep(c, out, err) == kExitOk);
        const auto rows = read_index((fs::path(c.out_dir) / "index.csv").string());
        REQUIRE(rows.size() == 2);
        for (const auto& r : rows) {
            CHECK(r.converged);
            CHECK(r.amplitude == 0.0);
            CHECK(r.status == "PROVED");
            CHECK(fs::exists(fs::path(c.out_dir) / r.certificate_path));
        }
        CHECK(rows[1].sigma == 1.0);
        const std::string cert = slurp(fs::path(c.out_dir) / rows[1].certificate_path);
        CHECK(cert.find("\"sweep\"") != std::string::npos);
        CHECK(cert.find("\"amplitude\": 0.0") != std::string::npos);
        CHECK(fs::exists(fs::path(c.out_dir) / "points" / "point_0001.geoseq"));

        const std::string index = (fs::path(c.out_dir) / "index.csv").string();
        CHECK(cmd_render(index, c.out_dir, out, err) == kExitOk);
        const std::string svg = slurp(fs::path(c.out_dir) / "diagram.svg");
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("fill=\"black\"><title>sigma=1") != std::string::npos);
        CHECK(cmd_render(index, c.out_dir, out, err) == kExitOk);
        CHECK(slurp(fs::path(c.out_dir) / "diagram.svg") == svg);
    }
    SUBCASE("malformed index") {
        const fs::path dir = scratch("badindex");
        fs::create_directories(dir);
        std::ofstream(dir / "index.csv") << "sigma,amplitude\n1,2\n";
        std::ostringstream out, err;
        CHECK_THROWS_AS(cmd_render((dir / "index.csv").string(), dir.string(), out, err), ConfigError);
    }
}

TEST_CASE("render marks failed points hollow") {
    const std::string svg = render_svg({{0.1, 1.0, true, "c0.json", "PROVED"},
                                        {0.2, 2.0, true, "c1.json", "FAILED_DISC"},
                                        {0.3, 0.0, false, "", "UNCONVERGED"}});
    CHECK(svg.find("fill=\"none\"><title>sigma=0.2 amplitude=2 FAILED_DISC") != std::string::npos);
    CHECK(svg.find("fill=\"black\"><title>sigma=0.1 amplitude=1 PROVED") != std::string::npos);
    CHECK(svg.find("UNCONVERGED") == std::string::npos);
}

TEST_CASE("command line exit codes") {
    const fs::path dir = scratch("exe");
    fs::create_directories(dir);
    std::ofstream(dir / "broken.ini") << "[model]\nsigma = zero\n";
    std::ofstream(dir / "trivial.ini") << kTrivial;
    const std::string out = " --out " + (dir / "out").string();
    CHECK(run_binary("find --config " + (dir / "broken.ini").string() + out) == 1);
    CHECK(run_binary("find --config " + (dir / "missing.ini").string() + out) == 1);
    CHECK(run_binary("frobnicate") == 1);
    CHECK(run_binary("find --config " + (dir / "trivial.ini").string() + out) == 0);
    CHECK(run_binary("certify --config " + (dir / "trivial.ini").string() + out) == 0);
    CHECK(fs::exists(dir / "out" / "certificate.json"));
    CHECK(run_binary("certify --config " + (dir / "trivial.ini").string() + " --input " + (dir / "trivial.ini").string() +
                     out) == 1);
    // CHEMOPROOF_OUT sits between --out and the config
    const std::string env = "CHEMOPROOF_OUT=" + (dir / "env").string() + " ";
    const int rc = std::system((env + CHEMOPROOF_BIN + " find --config " + (dir / "trivial.ini").string() +
                                " >/dev/null 2>&1").c_str());
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "env" / "candidate.geoseq"));
}
