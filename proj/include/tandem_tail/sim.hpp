// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tandem_tail/model.hpp"

// Node arguments are numbered 1..3; Vec3 arrays are indexed from 0.
namespace tandem::sim {

/// Strictly increasing levels at which exceedance mass is tracked.
/// Shared by every node and every pair so pairwise counts line up.
class LevelGrid {
public:
    LevelGrid() = default;
    explicit LevelGrid(std::vector<double> levels);

    /// Levels 0, step, 2 step, ..., (count - 1) step.
    static LevelGrid uniform(double step, std::size_t count);

    std::size_t size() const noexcept { return levels_.size(); }
    const std::vector<double>& levels() const noexcept { return levels_; }
    double operator[](std::size_t i) const { return levels_[i]; }

    /// Index of the largest level <= x, or -1 when x is below every level.
    std::ptrdiff_t bin_of(double x) const noexcept;

    /// Spacing of a uniform grid starting at 0; 0 otherwise.
    double step() const noexcept { return step_; }

    bool operator==(const LevelGrid& other) const noexcept { return levels_ == other.levels_; }

private:
    std::vector<double> levels_;
    double step_ = 0.0;  // > 0 when the grid is uniform from 0
};

struct SimConfig {
    double dt = 1e-3;
    double horizon = 1e4;
    double burn_in = 100.0;
    std::uint64_t seed = 20240611;
    int replicas = 1;
    LevelGrid grid = LevelGrid::uniform(0.02, 1000);
    int joint_bins = 48;
    Vec3 joint_max{};            ///< upper joint edge per node; 0 means grid maximum
    Vec3 boundary_weight{};      ///< w in sum exp(<w, L>) dY_k
    double batch_time = 1000.0;  ///< batch length for the regulator-rate error bars
    int threads = 0;             ///< 0 = hardware concurrency
};

/// Throws InvalidParameter on a malformed configuration.
void validate(const SimConfig& config);

struct State {
    Vec3 level{};
    Vec3 regulator{};
};

struct StepOutcome {
    State state;
    Vec3 regulator_increment{};
};

/// One Euler step followed by the node-by-node discrete reflection.
StepOutcome step(const State& state, const ValidatedModel& model, double dt,
                 const Vec3& gaussian_draws);

/// Pair order used throughout: (1,2), (2,3), (1,3).
inline constexpr std::array<std::array<int, 2>, 3> kPairs{{{1, 2}, {2, 3}, {1, 3}}};
/// Position of the unordered pair {i, j} in kPairs.
int pair_index(int i, int j);

struct BatchStats {
    std::uint64_t count = 0;
    Vec3 sum{};
    Vec3 sum_sq{};

    bool operator==(const BatchStats&) const = default;
};

/// Time-weighted stationary statistics. Occupation data are integer step
/// counts (exact, order-free merging); each step carries weight dt.
class StationaryAccumulator {
public:
    StationaryAccumulator() = default;
    StationaryAccumulator(LevelGrid grid, double dt, int joint_bins, const Vec3& joint_max,
                          const Vec3& boundary_weight);

    static StationaryAccumulator for_config(const SimConfig& config);

    /// One step of occupation at `level`.
    void record(const Vec3& level);
    /// Regulator increase `dy` observed with post-step state `level`.
    void record_regulation(const Vec3& level, const Vec3& dy);
    /// Regulator rates of one completed batch.
    void record_batch(const Vec3& rates);

    /// Adds other's statistics. Throws GridMismatch for incompatible layouts.
    void merge(const StationaryAccumulator& other);

    const LevelGrid& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }
    std::uint64_t steps() const noexcept { return steps_; }
    double window_length() const noexcept { return static_cast<double>(steps_) * dt_; }

    /// Steps with L_node >= grid[level].
    std::uint64_t exceedance_count(int node, std::size_t level) const;
    /// exceedance_count for every grid level.
    std::vector<std::uint64_t> exceedance_counts(int node) const;
    /// Steps with min(L_i, L_j) >= grid[level] for pair index `pair`.
    std::uint64_t pair_exceedance_count(int pair, std::size_t level) const;

    int joint_bins() const noexcept { return joint_bins_; }
    double joint_edge(int node, int index) const noexcept { return joint_width_[node - 1] * index; }
    const Vec3& joint_width() const noexcept { return joint_width_; }
    /// Steps with L_i >= joint_edge(i, edges[i]) for all i.
    std::uint64_t joint_exceedance_count(const std::array<int, 3>& edges) const;
    /// Steps with L_node >= joint_edge(node, edge), from the joint histogram.
    std::uint64_t joint_marginal_count(int node, int edge) const;

    const Vec3& regulator_total() const noexcept { return regulator_total_; }
    const Vec3& boundary_sum() const noexcept { return boundary_sum_; }
    const Vec3& boundary_weight() const noexcept { return boundary_weight_; }
    const BatchStats& batches() const noexcept { return batches_; }

    bool operator==(const StationaryAccumulator&) const = default;

private:
    std::size_t joint_cell(const Vec3& level) const noexcept;

    LevelGrid grid_;
    double dt_ = 0.0;
    std::uint64_t steps_ = 0;
    // bins_[node][k + 1] counts L in [grid[k], grid[k+1]); slot 0 is below grid[0].
    std::array<std::vector<std::uint64_t>, 3> bins_;
    std::array<std::vector<std::uint64_t>, 3> pair_bins_;
    int joint_bins_ = 0;
    Vec3 joint_width_{};
    std::vector<std::uint64_t> joint_cells_;
    Vec3 regulator_total_{};
    Vec3 boundary_weight_{};
    Vec3 boundary_sum_{};
    BatchStats batches_;
};

/// Seeds for replica r derive from (config.seed, r) through std::seed_seq.
StationaryAccumulator run_replica(const ValidatedModel& model, const SimConfig& config,
                                  int replica);

/// Folds replica accumulators in index order.
StationaryAccumulator merge_replicas(const std::vector<StationaryAccumulator>& replicas);

/// All replicas (concurrently when threads allow), merged in index order.
StationaryAccumulator run(const ValidatedModel& model, const SimConfig& config);

struct RegulatorEstimate {
    Vec3 rate{};
    Vec3 half_width{};  ///< 95% batch-means half width; 0 with fewer than 2 batches
};

/// regulator_total / window_length. Throws EmptyWindow.
Vec3 estimate_regulator_rates(const StationaryAccumulator& acc);
RegulatorEstimate estimate_regulator_rates_with_error(const StationaryAccumulator& acc);

/// sum exp(<w, L>) dY_node / window_length for the configured weight w.
double estimate_boundary_transform(const StationaryAccumulator& acc, int node);

/// Maxima of each node over consecutive blocks of `block_time`, after burn-in,
/// from the replica-0 random stream.
std::array<std::vector<double>, 3> block_maxima(const ValidatedModel& model,
                                                const SimConfig& config, double block_time,
                                                int n_blocks);

}  // namespace tandem::sim
