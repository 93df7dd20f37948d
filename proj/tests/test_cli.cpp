// SPDX-License-Identifier: Apache-2.0
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string output;
};

Result run(const std::string& args, const std::string& env = {}) {
    const std::string cmd = env + " \"" TANDEM_TAIL_CLI "\" " + args + " 2>&1";
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("tandem_tail_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

const std::string kQuick =
    " -s sim.horizon=300 -s sim.burn_in=20 -s sim.replicas=2 -s sim.batch_time=20"
    " -s fit.gumbel_block_time=5 -s fit.gumbel_blocks=20";

}  // namespace

TEST_CASE("analyze Set A and Set B") {
    const auto a = scratch("analyze_a");
    auto r = run("analyze -o " + a.string());
    REQUIRE(r.code == 0);
    const auto csv = slurp(a / "kernel_report.csv");
    CHECK(csv.find("3,1.7247448713915892,-1.5,BranchPoint") != std::string::npos);
    CHECK(fs::exists(a / "kernel_report.json"));
    CHECK(fs::exists(a / "manifest.ini"));

    const auto b = scratch("analyze_b");
    r = run("analyze --preset set-b -o " + b.string());
    REQUIRE(r.code == 0);
    CHECK(slurp(b / "kernel_report.csv").find("3,0.37142857142857") != std::string::npos);
    CHECK(slurp(b / "kernel_report.csv").find("SimplePole") != std::string::npos);
}

TEST_CASE("echoed manifest reproduces the run") {
    const auto a = scratch("echo");
    REQUIRE(run("analyze --preset set-b -s model.node3.c=4.5 -o " + a.string()).code == 0);
    const auto b = scratch("echo_again");
    REQUIRE(run("analyze -c " + (a / "manifest.ini").string() + " -o " + b.string()).code == 0);
    CHECK(slurp(a / "kernel_report.json") == slurp(b / "kernel_report.json"));
    CHECK(slurp(b / "kernel_report.csv").find("PoleAtBranch") != std::string::npos);
}

TEST_CASE("unstable manifest exits nonzero naming the inequality") {
    const auto r = run("analyze -s model.node3.c=3.4 -o " + scratch("unstable").string());
    CHECK(r.code == 3);
    CHECK(r.output.find("lambda3 + c2 < c3") != std::string::npos);
}

TEST_CASE("config errors report line and field") {
    const auto dir = scratch("badcfg");
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "bad.ini");
        out << "[sim]\nhorizon = 10\ndt = fast\n";
    }
    const auto r = run("analyze -c " + (dir / "bad.ini").string());
    CHECK(r.code == 2);
    CHECK(r.output.find("config:3: field 'sim.dt'") != std::string::npos);
    CHECK(run("frobnicate").code == 2);
}

TEST_CASE("zero horizon surfaces an empty window") {
    const auto r =
        run("simulate -s sim.horizon=0 -s sim.burn_in=0 -o " + scratch("empty").string());
    CHECK(r.code == 4);
    CHECK(r.output.find("empty") != std::string::npos);
}

TEST_CASE("simulate twice gives byte-identical outputs") {
    const auto a = scratch("sim_a");
    const auto b = scratch("sim_b");
    REQUIRE(run("simulate" + kQuick + " -o " + a.string()).code == 0);
    REQUIRE(run("simulate" + kQuick + " -s sim.threads=2 -o " + b.string()).code == 0);
    for (const char* f : {"ccdf_1.csv", "ccdf_2.csv", "ccdf_3.csv", "dependence_12.csv",
                          "dependence_23.csv", "dependence_13.csv", "simulation.json",
                          "kernel_report.csv"}) {
        REQUIRE_MESSAGE(fs::exists(a / f), f);
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
}

TEST_CASE("output directory from the environment") {
    const auto dir = scratch("env");
    const auto r = run("analyze", "TANDEM_TAIL_OUTPUT_DIR=" + dir.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "kernel_report.csv"));
}

TEST_CASE("verify writes the table and its exit code follows the rows") {
    const auto dir = scratch("verify");
    const auto r = run("verify" + kQuick + " -o " + dir.string());
    const auto table = slurp(dir / "verification.csv");
    REQUIRE(!table.empty());
    const bool all = table.find(",false\n") == std::string::npos;
    CHECK(r.code == (all ? 0 : 1));
    CHECK(fs::exists(dir / "verification.json"));

    const auto neg = scratch("verify_neg");
    const auto n = run("verify" + kQuick + " --inject-alpha3-scale 2 -o " + neg.string());
    CHECK(n.code == 1);
    const auto ntable = slurp(neg / "verification.csv");
    const auto pos = ntable.find("decay_rate.alpha3,");
    REQUIRE(pos != std::string::npos);
    CHECK(ntable.substr(pos, ntable.find('\n', pos) - pos).find(",false") != std::string::npos);

    const auto rep = run("report -o " + neg.string());
    CHECK(rep.code == 1);
    CHECK(rep.output.find("FAIL decay_rate.alpha3") != std::string::npos);
}
