// SPDX-License-Identifier: Apache-2.0
// tandem-tail: analyze | simulate | verify | report

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tandem_tail/config.hpp"
#include "tandem_tail/errors.hpp"
#include "tandem_tail/kernel.hpp"
#include "tandem_tail/pipeline.hpp"
#include "tandem_tail/report.hpp"

using namespace tandem;

namespace {

enum Exit : int {
    kOk = 0,
    kVerifyFailed = 1,
    kUsage = 2,
    kModel = 3,
    kRuntime = 4,
};

struct Common {
    std::string config_path;
    std::string preset = "set-a";
    std::vector<std::string> overrides;
    std::string output_dir;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config_path, "Manifest file");
    app->add_option("--preset", c.preset, "Built-in manifest when no --config is given")
        ->check(CLI::IsMember({"set-a", "set-b"}));
    app->add_option("-s,--set", c.overrides, "Field override, section.key=value (repeatable)");
    app->add_option("-o,--output-dir", c.output_dir, "Output directory");
}

config::RunManifest build_manifest(const Common& c) {
    config::RunManifest m;
    if (!c.config_path.empty()) {
        m = config::load(c.config_path);
    } else {
        m = c.preset == "set-b" ? config::set_b() : config::set_a();
    }
    for (const auto& o : c.overrides) config::apply_override(m, o);
    m.output_dir = c.output_dir.empty() ? config::effective_output_dir(m) : c.output_dir;
    return m;
}

void print_kernel(const kernel::KernelReport& r) {
    for (const auto& m : r.marginals) {
        std::printf("node %d  alpha %s  mu %s  %s\n", m.node, config::format_double(m.alpha).c_str(),
                    config::format_double(m.mu).c_str(), kernel::to_string(m.regime).c_str());
    }
    std::printf("z_max %s\n", config::format_double(r.geometry.z_max).c_str());
    if (r.geometry.z_star) std::printf("z_star %s\n", config::format_double(*r.geometry.z_star).c_str());
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

void print_rows(const pipeline::VerificationReport& rep) {
    for (const auto& r : rep.rows) {
        std::printf("%-4s %-42s predicted %-24s estimated %-24s tol %s\n", r.pass ? "PASS" : "FAIL",
                    r.quantity.c_str(), config::format_double(r.predicted).c_str(),
                    config::format_double(r.estimated).c_str(),
                    config::format_double(r.tolerance).c_str());
    }
}

int cmd_analyze(const Common& c) {
    const auto m = build_manifest(c);
    const auto model = validate(m.model, m.mode);
    const auto r = kernel::analyze(model);
    const auto hash = config::manifest_hash_hex(m);
    report::write_kernel_report(m.output_dir, r, hash);
    report::write_manifest(m.output_dir, m);
    print_kernel(r);
    return kOk;
}

int cmd_simulate(const Common& c) {
    const auto m = build_manifest(c);
    const auto p = pipeline::simulate(m, false);
    if (p.kernel) report::write_kernel_report(m.output_dir, *p.kernel, config::manifest_hash_hex(m));
    report::write_simulation(m.output_dir, p);
    report::write_manifest(m.output_dir, m);
    for (int k = 0; k < 3; ++k) {
        std::printf("regulator rate %d  %s +- %s\n", k + 1,
                    config::format_double(p.rates.rate[k]).c_str(),
                    config::format_double(p.rates.half_width[k]).c_str());
    }
    return kOk;
}

int cmd_verify(const Common& c, double alpha3_scale) {
    const auto m = build_manifest(c);
    const auto p = pipeline::simulate(m, true);
    pipeline::VerifyOptions opts;
    opts.alpha3_scale = alpha3_scale;
    const auto rep = pipeline::evaluate(p, opts);
    report::write_kernel_report(m.output_dir, *p.kernel, rep.manifest_hash);
    report::write_simulation(m.output_dir, p);
    report::write_verification(m.output_dir, rep);
    report::write_manifest(m.output_dir, m);
    print_rows(rep);
    return rep.all_pass() ? kOk : kVerifyFailed;
}

int cmd_report(const Common& c) {
    const std::string dir = c.output_dir.empty() ? build_manifest(c).output_dir : c.output_dir;
    const std::string path = dir + "/verification.csv";
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'; run verify first");
    std::string line;
    bool all = true;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("quantity,", 0) == 0) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 5) throw Error("malformed row in '" + path + "': " + line);
        const bool pass = f[4] == "true";
        all = all && pass;
        ++rows;
        std::printf("%-4s %-42s predicted %-24s estimated %-24s tol %s\n", pass ? "PASS" : "FAIL",
                    f[0].c_str(), f[1].c_str(), f[2].c_str(), f[3].c_str());
    }
    std::printf("%d rows, %s\n", rows, all && rows > 0 ? "all pass" : "some rows fail");
    return all && rows > 0 ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail asymptotics of a three-node Brownian tandem queue"};
    app.require_subcommand(1);
    app.set_version_flag("--version", config::kToolVersion);

    Common common;
    double alpha3_scale = 1.0;
    auto* analyze = app.add_subcommand("analyze", "Kernel predictions");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo stationary statistics");
    auto* verify = app.add_subcommand("verify", "Predictions against simulation");
    auto* report = app.add_subcommand("report", "Print a stored verification table");
    for (auto* sub : {analyze, simulate, verify, report}) add_common(sub, common);
    verify->add_option("--inject-alpha3-scale", alpha3_scale)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*analyze) return cmd_analyze(common);
        if (*simulate) return cmd_simulate(common);
        if (*verify) return cmd_verify(common, alpha3_scale);
        if (*report) return cmd_report(common);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const UnstableModel& e) {
        std::fprintf(stderr, "error: unstable model: %s\n", e.what());
        return kModel;
    } catch (const InvalidParameter& e) {
        std::fprintf(stderr, "error: invalid parameter: %s\n", e.what());
        return kModel;
    } catch (const UnsupportedModel& e) {
        std::fprintf(stderr, "error: unsupported model: %s\n", e.what());
        return kModel;
    } catch (const EmptyWindow& e) {
        std::fprintf(stderr, "error: empty window: %s\n", e.what());
        return kRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntime;
    }
    return kUsage;
}
