#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const std::string out_file = "/tmp/latmscale_cli_test_" + std::to_string(counter++) + ".out";
    const std::string cmd =
        env + " " + std::string(LATMSCALE_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    r.out = slurp(out_file);
    std::remove(out_file.c_str());
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("coeffs: default regime passes all identity checks") {
    auto r = run("coeffs");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"defocusing\": true"));
    CHECK(contains(r.out, "\"all_checks_pass\": true"));
    CHECK(contains(r.out, "\"sigma\""));
}

TEST_CASE("coeffs: validation failures exit with code 1 and name the constraint") {
    auto pq = run("coeffs --p 2 --q 2");
    CHECK(pq.exit_code == 1);
    CHECK(contains(pq.out, "mu vanishes"));

    auto k0 = run("coeffs --kappa 0");
    CHECK(k0.exit_code == 1);
    CHECK(contains(k0.out, "alpha2 pole"));

    auto badtol = run("coeffs --tol-override no_such_tol=1");
    CHECK(badtol.exit_code == 1);
    CHECK(contains(badtol.out, "unknown tolerance"));
}

TEST_CASE("coeffs: an unreachable tolerance turns into a check failure (exit 2)") {
    auto r = run("coeffs --tol-override m_imag=1e-30");
    CHECK(r.exit_code == 2);
    CHECK(contains(r.out, "\"all_checks_pass\": false"));
}

TEST_CASE("determinism: identical invocations produce byte-identical output") {
    const std::string args = "coeffs --p 2.3 --q 0.9 --kappa 1.1";
    CHECK(run(args).out == run(args).out);
    const std::string conv = "convergence --r 0.31622776601683794 --N-list 8 16 32";
    CHECK(run(conv).out == run(conv).out);
}

TEST_CASE("convergence: slope lands in the window and zero input is undefined") {
    auto r = run("convergence --r 0.31622776601683794 --N-list 8 16 32 64");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "N,max_abs_residual,max_abs_u,rel_residual"));
    CHECK(contains(r.out, "# fitted_slope = "));

    auto zero = run("convergence --u0 0 --N-list 8 16 32");
    CHECK(zero.exit_code == 0);
    CHECK(contains(zero.out, "undefined"));

    auto few = run("convergence --N-list 8 16");
    CHECK(few.exit_code == 1);
}

TEST_CASE("convergence: residual insensitive to the slow-window extent at fixed N") {
    // the residual is dominated by the 1/N truncation near the soliton core,
    // not by how much of the tail the window samples
    auto narrow = run("convergence --r 0.31622776601683794 --N-list 16 24 32 --window 4");
    auto wide = run("convergence --r 0.31622776601683794 --N-list 16 24 32 --window 8");
    auto row_residual = [](const std::string& csv, const std::string& n) {
        const auto pos = csv.find("\n" + n + ",");
        REQUIRE(pos != std::string::npos);
        const auto a = csv.find(',', pos + 1);
        const auto b = csv.find(',', a + 1);
        return std::stod(csv.substr(a + 1, b - a - 1));
    };
    const double r_narrow = row_residual(narrow.out, "16");
    const double r_wide = row_residual(wide.out, "16");
    CHECK(std::abs(r_narrow - r_wide) < 0.1 * std::max(r_narrow, r_wide));
}

TEST_CASE("parallel sweep matches the sequential one byte for byte") {
    const std::string args = "convergence --r 0.31622776601683794 --N-list 8 16 32 64";
    auto seq = run(args, "LATMSCALE_THREADS=1");
    auto par = run(args, "LATMSCALE_THREADS=4");
    CHECK(seq.exit_code == 0);
    CHECK(seq.out == par.out);
}

TEST_CASE("soliton-validate: classification and checks") {
    auto dark = run("soliton-validate --A 0 --r 0.31622776601683794");
    CHECK(dark.exit_code == 0);
    CHECK(contains(dark.out, "\"classification\": \"dark\""));

    auto gray = run("soliton-validate --r 0.31622776601683794");
    CHECK(gray.exit_code == 0);
    CHECK(contains(gray.out, "\"classification\": \"gray\""));
    CHECK(contains(gray.out, "\"all_checks_pass\": true"));

    auto focusing = run("soliton-validate --rho1 0.2 --rho2 0.1");
    CHECK(focusing.exit_code == 1);
}

TEST_CASE("dispersion table") {
    auto r = run("dispersion --p 2 --q 1 --kappa-grid 0.1 3.0 25");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "kappa,omega,abs_linear_symbol"));
}

TEST_CASE("compare-continuous emits the chain and a passing slope") {
    auto r = run("compare-continuous");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"alpha1\": -2"));
    CHECK(contains(r.out, "\"rho1\": -3"));
    CHECK(contains(r.out, "\"rho2\": 6"));
    CHECK(contains(r.out, "\"slope_check_pass\": true"));

    auto csv = run("compare-continuous --format csv");
    CHECK(csv.exit_code == 0);
    CHECK(contains(csv.out, "epsilon,max_abs_pkdv_residual"));
}

TEST_CASE("series-dump") {
    auto r = run("series-dump --which TnTm --trunc 2");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"terms\""));
    CHECK(contains(r.out, "\"invN_power\": 2"));

    auto pretty = run("series-dump --which L0 --pretty");
    CHECK(pretty.exit_code == 0);
    CHECK(contains(pretty.out, "T[m] T[n]"));

    auto bad = run("series-dump --which L7");
    CHECK(bad.exit_code == 1);
}

TEST_CASE("config file drives a subcommand") {
    const std::string cfg = "/tmp/latmscale_cli_test.cfg";
    {
        std::ofstream f(cfg);
        f << "[coeffs]\np=2.5\nq=0.5\nkappa=1.2\n";
    }
    auto r = run("--config " + cfg + " coeffs");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"p\": 2.5"));
    CHECK(contains(r.out, "\"all_checks_pass\": true"));
    std::remove(cfg.c_str());
}

TEST_CASE("output file writing") {
    const std::string path = "/tmp/latmscale_cli_test_out.json";
    auto r = run("--out " + path + " coeffs");
    CHECK(r.exit_code == 0);
    CHECK(contains(slurp(path), "\"all_checks_pass\": true"));
    std::remove(path.c_str());
}
