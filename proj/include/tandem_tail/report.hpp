// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tandem_tail/config.hpp"
#include "tandem_tail/kernel.hpp"
#include "tandem_tail/pipeline.hpp"

namespace tandem::report {

inline constexpr int kSchemaVersion = 1;

/// Minimal JSON emitter: objects, arrays, strings, %.17g numbers.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(double v);
    JsonWriter& value(long long v);
    JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
    JsonWriter& value(bool v);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v) { return value(std::string(v)); }
    JsonWriter& null();

    const std::string& str() const noexcept { return out_; }

private:
    void separate();

    std::string out_;
    std::vector<bool> first_;
    bool after_key_ = false;
};

std::string kernel_report_csv(const kernel::KernelReport& report, const std::string& hash);
std::string kernel_report_json(const kernel::KernelReport& report, const std::string& hash);
/// level,node,exceedance_probability
std::string ccdf_csv(const tails::Ccdf& ccdf, int node, const std::string& hash);
/// level,pair,denominator_node,ratio
std::string dependence_csv(const tails::DependenceProfile& profile, const std::string& hash);
std::string simulation_json(const pipeline::Products& products);
/// quantity,predicted,estimated,tolerance,pass
std::string verification_csv(const pipeline::VerificationReport& report);
std::string verification_json(const pipeline::VerificationReport& report);

/// Creates `dir` and writes `content` to dir/name.
void write_file(const std::string& dir, const std::string& name, const std::string& content);

void write_kernel_report(const std::string& dir, const kernel::KernelReport& report,
                         const std::string& hash);
/// ccdf_<node>.csv, dependence_<pair>.csv, simulation.json.
void write_simulation(const std::string& dir, const pipeline::Products& products);
void write_verification(const std::string& dir, const pipeline::VerificationReport& report);
/// Effective manifest as manifest.ini.
void write_manifest(const std::string& dir, const config::RunManifest& manifest);

}  // namespace tandem::report
