// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tandem_tail/config.hpp"
#include "tandem_tail/kernel.hpp"
#include "tandem_tail/sim.hpp"
#include "tandem_tail/tails.hpp"

namespace tandem::pipeline {

struct Products {
    config::RunManifest manifest;
    sim::SimConfig sim;
    std::optional<kernel::KernelReport> kernel;  ///< absent for weak-only models
    sim::StationaryAccumulator acc;
    sim::RegulatorEstimate rates;
    double boundary_transform = 0.0;             ///< node 2, at the resolved weight
    std::array<tails::Ccdf, 3> ccdf;
    std::array<std::optional<tails::TailFit>, 3> fits;
    std::array<tails::DependenceProfile, 3> dependence;
    std::vector<tails::FactorizationPoint> factorization;
    std::optional<double> gumbel_distance;       ///< node 1
    double sim_seconds = 0.0;
    double gumbel_seconds = 0.0;
};

/// Kernel analysis when the model supports it, simulation, and every tail
/// statistic. The Gumbel block run is optional. Throws as its stages do.
Products simulate(const config::RunManifest& manifest, bool with_gumbel);

struct Row {
    std::string quantity;
    double predicted = 0.0;
    double estimated = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::string manifest_hash;
    std::vector<Row> rows;

    bool all_pass() const noexcept;
    const Row* find(const std::string& quantity) const noexcept;
};

struct VerifyOptions {
    /// Multiplies the predicted node-3 decay rate. Anything but 1 is a
    /// negative control.
    double alpha3_scale = 1.0;
};

/// Rows compare kernel predictions with the simulated estimates. Tolerances
/// are relative for rates and decay rates and absolute otherwise.
VerificationReport evaluate(const Products& products, const VerifyOptions& options = {});

/// Dependence levels: tail quantiles of the denominator node at each tail
/// probability, dropping those the grid or the sample cannot resolve.
std::vector<double> dependence_levels(const tails::Ccdf& denominator,
                                      const std::vector<double>& tail_probs);

/// Ratios are nonincreasing over the last `count` resolvable levels and the
/// last one is below `limit`.
bool asymptotically_independent(const tails::DependenceProfile& profile, std::size_t count,
                                double limit);

}  // namespace tandem::pipeline
