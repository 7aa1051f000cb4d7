// End-to-end tests of the topoqubit-sim binary: exit-code contract,
// report/artifact format, determinism, and the schedule round trip. The
// binary path comes from the TQSIM_CLI_PATH compile definition (set by the
// build) or the environment variable of the same name.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    if (const char* env = std::getenv("TQSIM_CLI_PATH")) return env;
#ifdef TQSIM_CLI_PATH
    return TQSIM_CLI_PATH;
#else
    FAIL("TQSIM_CLI_PATH is not defined; build via CMake or export it");
    return {};
#endif
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
    REQUIRE(out.good());
}

fs::path scratch_dir() {
    static const fs::path root =
        fs::temp_directory_path() /
        ("tqsim_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(root);
    return root;
}

RunResult run_cli(const std::string& args) {
    const fs::path dir = scratch_dir();
    const fs::path out_file = dir / "stdout.txt";
    const fs::path err_file = dir / "stderr.txt";
    const std::string cmd = "\"" + cli_path() + "\" " + args + " > \"" +
                            out_file.string() + "\" 2> \"" +
                            err_file.string() + "\"";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

const std::string spectrum_ok = R"({
  "M_list": [2],
  "chi_x_rad_per_s": 1.0,
  "chi_y_rad_per_s": 1.0,
  "degeneracy_tol": 1e-9,
  "expected_ground_degeneracy": 2
})";

const std::string trotter_ok = R"({
  "M": 2,
  "drive": {
    "g": 0.0446,
    "E_J_rad_per_s": 1.0,
    "omega_rad_per_s": 10.0,
    "omega_c_rad_per_s": 11.0
  },
  "loops_k_list": [4, 2],
  "chi_T_total": 0.4,
  "seed": 20240901
})";

const std::string schedule_spec_ok = R"({
  "kind": "trotter",
  "M": 2,
  "drive": {
    "g": 0.0446,
    "E_J_rad_per_s": 1.0,
    "omega_rad_per_s": 10.0,
    "omega_c_rad_per_s": 11.0
  },
  "tau_s": 6.283185307179586,
  "cycles": 4,
  "seed": 7
})";

}  // namespace

TEST_CASE("passing run: exit 0, PASS line, versioned report with config hash",
          "[cli]") {
    const fs::path dir = scratch_dir() / "pass";
    fs::create_directories(dir);
    const fs::path cfg = dir / "spectrum.json";
    spit(cfg, spectrum_ok);

    const RunResult r = run_cli("spectrum --config \"" + cfg.string() +
                                "\" --out \"" + dir.string() + "\"");
    INFO(r.out << r.err);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("[PASS] spectrum:") != std::string::npos);
    REQUIRE(r.out.find("degeneracy=2") != std::string::npos);

    const std::string report = slurp(dir / "spectrum_report.json");
    REQUIRE(report.find("\"tool_version\": \"0.1.0\"") != std::string::npos);
    REQUIRE(report.find("\"config_fnv1a64\": \"") != std::string::npos);
    REQUIRE(report.find("\"pass\": true") != std::string::npos);
    const std::string csv = slurp(dir / "spectrum_levels.csv");
    REQUIRE(csv.find("tool_version=0.1.0") != std::string::npos);
    REQUIRE(csv.find("config_fnv1a64=") != std::string::npos);
    REQUIRE(csv.find("M,level,eigenvalue_rad_per_s") != std::string::npos);
}

TEST_CASE("threshold fail exits 1 with a FAIL line", "[cli]") {
    const fs::path dir = scratch_dir() / "fail";
    fs::create_directories(dir);
    const fs::path cfg = dir / "spectrum.json";
    spit(cfg, R"({
  "M_list": [2],
  "chi_x_rad_per_s": 1.0,
  "chi_y_rad_per_s": 1.0,
  "min_gap_rad_per_s": 100.0
})");
    const RunResult r = run_cli("spectrum --config \"" + cfg.string() +
                                "\" --out \"" + dir.string() + "\"");
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.out.find("[FAIL] spectrum:") != std::string::npos);
    REQUIRE(slurp(dir / "spectrum_report.json").find("\"pass\": false") !=
            std::string::npos);
}

TEST_CASE("malformed configs exit 2 and name the problem", "[cli]") {
    const fs::path dir = scratch_dir() / "bad";
    fs::create_directories(dir);

    SECTION("missing key") {
        const fs::path cfg = dir / "missing.json";
        spit(cfg, R"({ "M_list": [2], "chi_y_rad_per_s": 1.0 })");
        const RunResult r = run_cli("spectrum --config \"" + cfg.string() +
                                    "\" --out \"" + dir.string() + "\"");
        REQUIRE(r.exit_code == 2);
        REQUIRE(r.err.find("chi_x_rad_per_s") != std::string::npos);
    }
    SECTION("wrong type") {
        const fs::path cfg = dir / "type.json";
        spit(cfg, R"({ "M_list": [2], "chi_x_rad_per_s": "one",
                       "chi_y_rad_per_s": 1.0 })");
        const RunResult r = run_cli("spectrum --config \"" + cfg.string() +
                                    "\" --out \"" + dir.string() + "\"");
        REQUIRE(r.exit_code == 2);
        REQUIRE(r.err.find("chi_x_rad_per_s") != std::string::npos);
        REQUIRE(r.err.find("number") != std::string::npos);
    }
    SECTION("not JSON") {
        const fs::path cfg = dir / "not.json";
        spit(cfg, "this is not json\n");
        const RunResult r = run_cli("spectrum --config \"" + cfg.string() +
                                    "\" --out \"" + dir.string() + "\"");
        REQUIRE(r.exit_code == 2);
        REQUIRE(r.err.find("not valid JSON") != std::string::npos);
    }
    SECTION("missing file") {
        const RunResult r =
            run_cli("spectrum --config /no/such/file.json --out \"" +
                    dir.string() + "\"");
        REQUIRE(r.exit_code == 2);
    }
    SECTION("no subcommand") {
        const RunResult r = run_cli("");
        REQUIRE(r.exit_code == 2);
    }
    SECTION("help exits 0") {
        const RunResult r = run_cli("--help");
        REQUIRE(r.exit_code == 0);
        REQUIRE(r.out.find("spectrum") != std::string::npos);
        REQUIRE(r.out.find("schedule") != std::string::npos);
    }
}

TEST_CASE("guard violations exit 3", "[cli]") {
    const fs::path dir = scratch_dir() / "guard";
    fs::create_directories(dir);
    const fs::path cfg = dir / "m4.json";
    spit(cfg, R"({ "M_list": [4], "chi_x_rad_per_s": 1.0,
                   "chi_y_rad_per_s": 1.0 })");
    const RunResult r = run_cli("spectrum --config \"" + cfg.string() +
                                "\" --out \"" + dir.string() + "\"");
    REQUIRE(r.exit_code == 3);
    REQUIRE(r.err.find("GUARD VIOLATION") != std::string::npos);
}

TEST_CASE("reruns are byte-identical", "[cli]") {
    const fs::path dir = scratch_dir() / "det";
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    const fs::path cfg = dir / "trotter.json";
    spit(cfg, trotter_ok);

    const RunResult ra = run_cli("trotter --config \"" + cfg.string() +
                                 "\" --out \"" + (dir / "a").string() + "\"");
    const RunResult rb = run_cli("trotter --config \"" + cfg.string() +
                                 "\" --out \"" + (dir / "b").string() + "\"");
    INFO(ra.out << ra.err);
    REQUIRE(ra.exit_code == 0);
    REQUIRE(rb.exit_code == 0);
    REQUIRE(slurp(dir / "a" / "trotter_report.json") ==
            slurp(dir / "b" / "trotter_report.json"));
    REQUIRE(slurp(dir / "a" / "trotter_ladder.csv") ==
            slurp(dir / "b" / "trotter_ladder.csv"));
    REQUIRE(!slurp(dir / "a" / "trotter_report.json").empty());
}

TEST_CASE("schedule compile -> validate round trip", "[cli]") {
    const fs::path dir = scratch_dir() / "sched";
    fs::create_directories(dir);
    const fs::path spec = dir / "spec.json";
    spit(spec, schedule_spec_ok);
    const fs::path out1 = dir / "sched1.json";
    const fs::path out2 = dir / "sched2.json";

    const RunResult c1 = run_cli("schedule compile --spec \"" + spec.string() +
                                 "\" --out \"" + out1.string() + "\"");
    const RunResult c2 = run_cli("schedule compile --spec \"" + spec.string() +
                                 "\" --out \"" + out2.string() + "\"");
    INFO(c1.out << c1.err);
    REQUIRE(c1.exit_code == 0);
    REQUIRE(c2.exit_code == 0);
    const std::string bytes = slurp(out1);
    REQUIRE(bytes == slurp(out2));
    REQUIRE(bytes.find("\"version\": \"1\"") != std::string::npos);
    REQUIRE(bytes.find("\"tool_version\": \"0.1.0\"") != std::string::npos);

    const RunResult v = run_cli("schedule validate --spec \"" +
                                out1.string() + "\"");
    REQUIRE(v.exit_code == 0);
    REQUIRE(v.out.find("canonical bytes") != std::string::npos);

    SECTION("corrupted schedule is rejected with exit 2") {
        std::string broken = bytes;
        const auto pos = broken.find("\"rowX:1\"");
        REQUIRE(pos != std::string::npos);
        broken.replace(pos, 8, "\"rowZ:1\"");
        const fs::path bad = dir / "broken.json";
        spit(bad, broken);
        const RunResult r =
            run_cli("schedule validate --spec \"" + bad.string() + "\"");
        REQUIRE(r.exit_code == 2);
    }
    SECTION("guard-violating compile spec exits 3") {
        std::string long_tau = schedule_spec_ok;
        const auto pos = long_tau.find("6.283185307179586");
        REQUIRE(pos != std::string::npos);
        long_tau.replace(pos, 17, "188.49555921538759");  // 30x base loop
        const fs::path bad = dir / "long_tau.json";
        spit(bad, long_tau);
        const RunResult r = run_cli("schedule compile --spec \"" +
                                    bad.string() + "\" --out \"" +
                                    (dir / "never.json").string() + "\"");
        REQUIRE(r.exit_code == 3);
    }
}

TEST_CASE("feasibility command reproduces the reference arithmetic", "[cli]") {
    const fs::path dir = scratch_dir() / "feas";
    fs::create_directories(dir);
    const fs::path cfg = dir / "feas.json";
    spit(cfg, R"({
  "Q": 1e6,
  "omega_c_rad_per_s": 3.14159265358979312e11,
  "gamma_s": 2e-6,
  "Omega_rad_per_s": 6.28318530717958648e7,
  "g": 0.01,
  "E_J_rad_per_s": 6.07706979523804192e10,
  "delta_over_beta": 10.0,
  "epsilon_nonuniformity": 0.2
})");
    const RunResult r = run_cli("feasibility --config \"" + cfg.string() +
                                "\" --out \"" + dir.string() + "\"");
    INFO(r.out << r.err);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("[PASS] feasibility:") != std::string::npos);
    const std::string report = slurp(dir / "feasibility_report.json");
    REQUIRE(report.find("\"tau_c_us\": 3.183") != std::string::npos);
    REQUIRE(report.find("\"beta_over_2pi_MHz\": 48.3") != std::string::npos);
    REQUIRE(!slurp(dir / "feasibility_report.txt").empty());
}
