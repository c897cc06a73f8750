#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ballistic/experiment.hpp"
#include "json.hpp"

using namespace ballistic;
namespace fs = std::filesystem;

namespace {

const std::string configs = BALLISTIC_CONFIG_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ballistic_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string write_config(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("ballistic_cfg_" + name + ".json");
    std::ofstream(p) << text;
    return p.string();
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream f(p);
    return nlohmann::json::parse(f);
}

int run(const std::string& cmd, const std::string& cfg, const fs::path& out) {
    std::ostringstream log, err;
    return run_command(cmd, cfg, out.string(), log, err);
}

}  // namespace

TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config(R"({"instance": "burgers1d", "grid": [32], "T": 0.5, "steps": 8,
        "initial": {"preset": "sine", "amplitude": 0.2}, "solver": {"method": "lbfgs", "max_iterations": 7}})");
    CHECK(c.instance == "burgers1d");
    CHECK(c.grid == std::vector<std::size_t>{32});
    CHECK(c.solver.method == AscentMethod::lbfgs);
    CHECK(c.solver.max_iterations == 7);
    CHECK(c.initial.amplitude == 0.2);

    const ExperimentConfig ode = parse_config(R"({"instance": "ode", "initial": {"values": [1, 2, 3]}})");
    CHECK(ode.atoms == 3);

    CHECK_THROWS_AS(parse_config(R"({"instance": "nope", "grid": [8]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"instance": "burgers1d", "grid": [8], "T": -1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"instance": "burgers1d", "grid": [8], "steps": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"instance": "burgers1d", "grid": [8], "colour": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"instance": "burgers1d"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"instance": "burgers1d", "grid": [8], "solver": {"method": "simplex"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1, 2"), ConfigError);
    for (const auto& entry : fs::directory_iterator(configs)) CHECK_NOTHROW(load_config(entry.path().string()));
}

TEST_CASE("initial data") {
    const ExperimentConfig c = parse_config(R"({"instance": "kdv", "grid": [16],
        "initial": {"fourier": [{"component": 0, "k": [2], "cos": 0.5, "sin": -0.25}]}})");
    const OperatorInstance inst = make_instance(c.instance, build_space(c));
    const VectorFieldd v = build_initial(inst, c.initial);
    const Eigen::ArrayXd x = inst.space->coordinate(0).array();
    CHECK((v.component(0).array() - (0.5 * (2 * x).cos() - 0.25 * (2 * x).sin())).abs().maxCoeff() <= 1e-15);
    CHECK((v.component(1).array() - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("solve writes the report, time series and fields") {
    const fs::path out = scratch("ode");
    CHECK(run("solve", configs + "/ode.json", out) == 0);
    const auto rep = read_json(out / "report.json");
    CHECK(rep["J"].get<double>() >= 0.999);
    CHECK(rep["J"].get<double>() <= 1.001);
    CHECK(rep["converged"].get<bool>());
    CHECK_FALSE(rep["bound"]["applies"].get<bool>());

    std::ifstream ts(out / "timeseries.csv");
    std::string header;
    std::getline(ts, header);
    CHECK(header == "t,K,feasibility_margin,J_contribution");
    int rows = 0;
    for (std::string line; std::getline(ts, line);) ++rows;
    CHECK(rows == 64);
    CHECK_FALSE(fs::exists(out / "fields.bin"));

    const std::string cfg = write_config("fields", R"({"instance": "burgers1d", "grid": [16], "T": 0.3, "steps": 4,
        "initial": {"preset": "sine", "amplitude": 0.1}, "diagnostics": {"dump_fields": true}})");
    const fs::path out2 = scratch("fields");
    CHECK(run("solve", cfg, out2) == 0);
    std::ifstream f(out2 / "fields.bin", std::ios::binary);
    char magic[8];
    f.read(magic, 8);
    CHECK(std::string(magic, 8) == "BALLISTC");
    // magic + count, then E: name, rank, 3 dims, 4 x 16 x 1 values; B: 5 x 16 x 1; v: 4 x 16 x 1
    const auto expect = 16 + (8 + 1 + 8 + 24 + 8 * 64) + (8 + 1 + 8 + 24 + 8 * 80) + (8 + 1 + 8 + 24 + 8 * 64);
    CHECK(fs::file_size(out2 / "fields.bin") == static_cast<std::uintmax_t>(expect));
}

TEST_CASE("solve is deterministic up to wall time") {
    const std::string cfg = write_config("det", R"({"instance": "burgers1d", "grid": [32], "T": 0.5, "steps": 8,
        "initial": {"preset": "sine", "amplitude": 0.3}})");
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    CHECK(run("solve", cfg, a) == 0);
    CHECK(run("solve", cfg, b) == 0);
    auto ja = read_json(a / "report.json"), jb = read_json(b / "report.json");
    ja.erase("wall_time");
    jb.erase("wall_time");
    CHECK(ja == jb);
}

TEST_CASE("consistency mode") {
    const fs::path out = scratch("tgc");
    CHECK(run("consistency", configs + "/taylor_green_consistency.json", out) == 0);
    const auto rep = read_json(out / "report.json");
    const double gap = rep["gap_ratio"].get<double>();
    CHECK(gap >= 1.0 - 1e-4);
    CHECK(gap <= 1.0 + 1e-6);

    const std::string bad = write_config("tg_long", R"({"instance": "euler2d", "grid": [32, 32], "T": 0.6, "steps": 8,
        "initial": {"preset": "taylor_green"}})");
    const fs::path out2 = scratch("tg_long");
    CHECK(run("consistency", bad, out2) == 3);
    CHECK_FALSE(fs::exists(out2));

    const std::string none = write_config("no_oracle", R"({"instance": "mhd2d", "grid": [16, 16], "T": 0.1, "steps": 4,
        "initial": {"preset": "random"}})");
    CHECK(run("consistency", none, scratch("no_oracle")) == 1);
}

TEST_CASE("verify mode") {
    auto statuses = [](const fs::path& p) {
        std::map<std::string, std::string> m;
        const auto doc = read_json(p / "verify.json");
        for (const auto& c : doc["checks"]) m[c["check"].get<std::string>()] = c["status"].get<std::string>();
        return m;
    };
    const fs::path e = scratch("verify_euler");
    CHECK(run("verify", configs + "/taylor_green.json", e) == 0);
    auto s = statuses(e);
    for (const char* k : {"adjoint", "conservativity", "PL(qI)", "trace_probe"}) CHECK(s[k] == "passed");

    const fs::path o = scratch("verify_ode");
    CHECK(run("verify", configs + "/ode.json", o) == 0);
    CHECK(statuses(o)["conservativity"] == "not claimed");

    const fs::path t = scratch("verify_tm");
    CHECK(run("verify", configs + "/template_matching.json", t) == 0);
    s = statuses(t);
    CHECK(s["PL(I)"] == "passed");
    CHECK(s["trace_probe"] == "not claimed");
}

TEST_CASE("sweep mode") {
    const std::string cfg = write_config("sweep", R"({"instance": "burgers1d", "grid": [32], "steps": 16,
        "initial": {"preset": "sine", "amplitude": 1.0}, "sweep": {"parameter": "T", "values": [0.2, 0.5]}})");
    const fs::path out = scratch("sweep");
    CHECK(run("sweep", cfg, out) == 0);
    std::ifstream f(out / "summary.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header.rfind("value,T,J,T_K0,gap_ratio,converged,flag_i,flag_ii,flag_iii", 0) == 0);
    int rows = 0;
    for (std::string line; std::getline(f, line);) {
        ++rows;
        CHECK(line.find(",1,0,0,0,1,") != std::string::npos);
    }
    CHECK(rows == 2);

    const std::string empty = write_config("sweep_empty", R"({"instance": "burgers1d", "grid": [32],
        "sweep": {"parameter": "T", "values": []}})");
    const fs::path out2 = scratch("sweep_empty");
    CHECK(run("sweep", empty, out2) == 1);
    CHECK_FALSE(fs::exists(out2));
}

TEST_CASE("configuration errors write nothing") {
    const fs::path out = scratch("malformed");
    CHECK(run("solve", write_config("malformed", "{\"instance\": "), out) == 1);
    CHECK(run("solve", write_config("unknown", R"({"instance": "navier", "grid": [8]})"), out) == 1);
    CHECK(run("solve", "/nonexistent/config.json", out) == 1);
    CHECK(run("launch", configs + "/ode.json", out) == 1);
    CHECK_FALSE(fs::exists(out));
}
