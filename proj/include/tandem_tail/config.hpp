// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tandem_tail/model.hpp"
#include "tandem_tail/sim.hpp"

namespace tandem::config {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "TANDEM_TAIL_OUTPUT_DIR";

struct FitSettings {
    double window_lower = 0.90;
    double window_upper = 0.999;
    std::vector<double> dependence_tail_probs{0.1, 0.03, 0.01, 0.003, 0.001};
    std::vector<double> factorization_tail_probs{1.0, 0.1, 0.03, 0.01};
    double factorization_target = 0.01;
    double gumbel_block_time = 1000.0;
    int gumbel_blocks = 50;

    bool operator==(const FitSettings&) const = default;
};

struct RunManifest {
    ModelParams model;
    StabilityMode mode = StabilityMode::Refined;
    /// Every field except grid, joint_max and boundary_weight, which
    /// resolved_sim() fills in.
    sim::SimConfig sim;
    /// Absent means 0.01 / min_k rate_bound(k).
    std::optional<double> grid_step;
    std::size_t grid_count = 2000;
    /// Absent means 10 / rate_bound(k) per node.
    std::optional<Vec3> joint_max;
    /// Absent means (0, 0, z0) of the boundary identity.
    std::optional<Vec3> boundary_weight;
    FitSettings fit;
    std::string output_dir = "out";
    std::string tool_version = kToolVersion;

    std::uint64_t master_seed() const noexcept { return sim.seed; }
};

bool operator==(const RunManifest& a, const RunManifest& b);

/// Parses the sectioned key = value format. Missing keys keep their defaults.
/// Throws ConfigError with line and field.
RunManifest parse(const std::string& text);
RunManifest load(const std::string& path);

/// Canonical text; parse(to_text(m)) == m.
std::string to_text(const RunManifest& manifest);
void save(const RunManifest& manifest, const std::string& path);

/// Applies "section.key=value" (e.g. "sim.horizon=1e5"). Throws ConfigError.
void apply_override(RunManifest& manifest, const std::string& assignment);

/// Output directory after the environment override.
std::string effective_output_dir(const RunManifest& manifest);

/// FNV-1a 64 of the canonical text minus the output directory and thread
/// count, neither of which changes any result.
std::uint64_t manifest_hash(const RunManifest& manifest);
std::string manifest_hash_hex(const RunManifest& manifest);

/// 2 (c_k - sum_{i<=k} lambda_i) / sum_{i<=k} sigma_i^2. Used only to size grids.
double rate_bound(const ModelParams& params, int node);

/// SimConfig with grid, joint range and boundary weight resolved.
sim::SimConfig resolved_sim(const RunManifest& manifest);

/// "%.17g".
std::string format_double(double x);

/// Built-in reference parameter sets.
RunManifest set_a();
RunManifest set_b();

}  // namespace tandem::config
