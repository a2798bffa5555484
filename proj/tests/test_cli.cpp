#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "freebe/cli.hpp"
#include "freebe/io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using freebe::io::json;

namespace {

const fs::path kConfigs = FREEBE_CONFIGS_DIR;

struct Scratch {
    fs::path dir;
    Scratch() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("freebe_cli_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = dir / name;
        std::ofstream(p) << text;
        return p;
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FREEBE_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string args(const std::string& cmd, const fs::path& config, const fs::path& out, const std::string& extra = "") {
    return cmd + " --config " + config.string() + " --out " + out.string() + " " + extra;
}

}  // namespace

TEST(Cli, SolveScalar) {
    Scratch s;
    ASSERT_EQ(run_cli(args("solve", kConfigs / "solve_scalar.json", s.dir / "o")), 0);
    const json j = json::parse(slurp(s.dir / "o" / "solve.json"));
    EXPECT_NEAR(j["w"][0][0][0].get<double>(), 0.3819660112501051, 1e-10);
    EXPECT_EQ(j["w"][0][0][1].get<double>(), 0.0);
}

TEST(Cli, SolveMatrixCertified) {
    Scratch s;
    ASSERT_EQ(run_cli(args("solve", kConfigs / "solve_matrix.json", s.dir / "o")), 0);
    const json j = json::parse(slurp(s.dir / "o" / "solve.json"));
    EXPECT_TRUE(j["certified"].get<bool>());
}

TEST(Cli, MalformedJsonIsConfigError) {
    Scratch s;
    const auto cfg = s.write("bad.json", "{ \"model\": ");
    EXPECT_EQ(run_cli(args("solve", cfg, s.dir / "o")), 1);
    EXPECT_FALSE(fs::exists(s.dir / "o"));
}

TEST(Cli, UnknownKeyAndMissingFileAreConfigErrors) {
    Scratch s;
    const auto cfg = s.write("c.json", R"({"model": {"coeffs": [1.0], "family": {"base": [{"kind": "semicircular"}]}},
                                          "b": 3.0, "tolerance": 1})");
    EXPECT_EQ(run_cli(args("solve", cfg, s.dir / "o")), 1);
    EXPECT_EQ(run_cli(args("solve", s.dir / "missing.json", s.dir / "o")), 1);
    EXPECT_EQ(run_cli("--config x.json"), 1);
    const auto law = s.write("l.json", R"({"model": {"coeffs": [1.0], "family": {"base": [{"kind": "gamma"}]}}, "b": 3.0})");
    EXPECT_EQ(run_cli(args("solve", law, s.dir / "o")), 1);
}

TEST(Cli, SolveNoConvergence) {
    Scratch s;
    const auto cfg = s.write("c.json", R"({"model": {"coeffs": [1.0], "family": {"base": [{"kind": "semicircular"}]}},
                                          "b": 2.05, "solver": {"max_iter": 1}})");
    EXPECT_EQ(run_cli(args("solve", cfg, s.dir / "o")), 2);
}

TEST(Cli, CltRateSemicircularSelfTest) {
    Scratch s;
    ASSERT_EQ(run_cli(args("clt-rate", kConfigs / "clt_rate_semicircular.json", s.dir / "o", "--workers 2")), 0);
    std::ifstream in(s.dir / "o" / "rates.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "n,b_id,norm_b,diff,scaled,theta_norm,subord_resid");
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        ASSERT_EQ(cells.size(), 7u);
        EXPECT_LT(std::stod(cells[3]), 1e-9) << line;
        ++rows;
    }
    EXPECT_EQ(rows, 7 * 6);
}

TEST(Cli, CltRateBernoulliSlope) {
    Scratch s;
    ASSERT_EQ(run_cli(args("clt-rate", kConfigs / "clt_rate_bernoulli.json", s.dir / "o")), 0);
    const json j = json::parse(slurp(s.dir / "o" / "summary.json"));
    EXPECT_NEAR(j["slope"].get<double>(), -1.0, 0.15);
}

TEST(Cli, CltRateGridOutsideOmega) {
    Scratch s;
    const auto cfg = s.write("c.json", R"({"model": {"coeffs": [1.0], "family": {"base": [{"kind": "bernoulli"}]}},
                                          "n_list": [4, 8], "grid": {"scalar": [0.5]}})");
    EXPECT_EQ(run_cli(args("clt-rate", cfg, s.dir / "o")), 1);
    EXPECT_FALSE(fs::exists(s.dir / "o"));
}

TEST(Cli, PolyIdentityAtThree) {
    Scratch s;
    ASSERT_EQ(run_cli(args("poly", kConfigs / "poly_x1.json", s.dir / "o")), 0);
    const std::string csv = slurp(s.dir / "o" / "poly.csv");
    EXPECT_NE(csv.find("0.381966011250105"), std::string::npos) << csv;
}

TEST(Cli, DensityScSquare) {
    Scratch s;
    ASSERT_EQ(run_cli(args("density", kConfigs / "density_x1sq.json", s.dir / "o")), 0);
    const json j = json::parse(slurp(s.dir / "o" / "density_summary.json"));
    EXPECT_LT(j["sup_error"].get<double>(), 1e-2);
    EXPECT_TRUE(fs::exists(s.dir / "o" / "cdf.csv"));
}

TEST(Cli, CheckLinearization) {
    Scratch s;
    EXPECT_EQ(run_cli(args("check-linearization", kConfigs / "check_linearization.json", s.dir / "a")), 0);
    EXPECT_EQ(run_cli(args("check-linearization", kConfigs / "check_linearization_corrupt.json", s.dir / "b")), 3);
    const json j = json::parse(slurp(s.dir / "b" / "linearization.json"));
    EXPECT_GT(j["residual"].get<double>(), 1e-2);
}

TEST(Cli, DeterministicOutputs) {
    Scratch s;
    const auto cfg = s.write("mc.json", R"({"model": {"coeffs": [1.0], "family": {"base": [{"kind": "bernoulli"}]}},
                                           "n": 2, "b": [0.0, 3.0], "N": 80, "samples": 3})");
    ASSERT_EQ(run_cli(args("mc", cfg, s.dir / "a", "--seed 11 --workers 1")), 0);
    ASSERT_EQ(run_cli(args("mc", cfg, s.dir / "b", "--seed 11 --workers 3")), 0);
    EXPECT_EQ(slurp(s.dir / "a" / "mc.json"), slurp(s.dir / "b" / "mc.json"));
    ASSERT_EQ(run_cli(args("mc", cfg, s.dir / "c", "--seed 12")), 0);
    EXPECT_NE(slurp(s.dir / "a" / "mc.json"), slurp(s.dir / "c" / "mc.json"));
}

TEST(Cli, ExitCodeMapping) {
    using freebe::ErrorKind;
    EXPECT_EQ(freebe::cli::exit_code_for(ErrorKind::Config), 1);
    EXPECT_EQ(freebe::cli::exit_code_for(ErrorKind::DomainError), 1);
    EXPECT_EQ(freebe::cli::exit_code_for(ErrorKind::NoConvergence), 2);
    EXPECT_EQ(freebe::cli::exit_code_for(ErrorKind::Divergent), 2);
}

TEST(Io, FormatDoubleIsRoundTripAndLocaleFree) {
    EXPECT_EQ(freebe::io::format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(freebe::io::format_double(-2.5), "-2.5");
    const double v = 0.3819660112501051;
    EXPECT_EQ(std::stod(freebe::io::format_double(v)), v);
}
