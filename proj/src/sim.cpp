// SPDX-License-Identifier: Apache-2.0
#include "tandem_tail/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <thread>
#include <utility>

#include "tandem_tail/errors.hpp"

namespace tandem::sim {

namespace {

constexpr std::uint32_t kStreamTag = 0x7a4de1u;

void check_node(int node) {
    if (node < 1 || node > 3) throw InvalidParameter("node must be 1, 2 or 3");
}

std::mt19937_64 replica_engine(std::uint64_t seed, int replica) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(replica),
                      kStreamTag};
    return std::mt19937_64(seq);
}

std::uint64_t step_count(double time, double dt) {
    return static_cast<std::uint64_t>(std::llround(time / dt));
}

// Per-step constants of the Euler recursion.
struct StepKernel {
    Vec3 drift_dt{};  // (lambda_i + c_{i-1} - c_i) dt
    Vec3 noise{};     // sigma_i sqrt(dt)

    StepKernel(const ValidatedModel& model, double dt) {
        const auto& m = model.params();
        const double root_dt = std::sqrt(dt);
        for (int i = 0; i < 3; ++i) {
            const double upstream = i == 0 ? 0.0 : m.c[i - 1];
            drift_dt[i] = (m.lambda[i] + upstream - m.c[i]) * dt;
            noise[i] = m.sigma[i] * root_dt;
        }
    }

    // Reflection runs node by node: node i only sees the regulator of i - 1.
    void advance(Vec3& level, Vec3& dy, const Vec3& g) const noexcept {
        double upstream_dy = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double tmp = level[i] + drift_dt[i] + noise[i] * g[i] - upstream_dy;
            const double push = tmp < 0.0 ? -tmp : 0.0;
            level[i] = tmp + push;
            dy[i] = push;
            upstream_dy = push;
        }
    }
};

}  // namespace

LevelGrid::LevelGrid(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw InvalidParameter("level grid must not be empty");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (!std::isfinite(levels_[i])) throw InvalidParameter("level grid must be finite");
        if (i > 0 && !(levels_[i] > levels_[i - 1])) {
            throw InvalidParameter("level grid must be strictly increasing");
        }
    }
}

LevelGrid LevelGrid::uniform(double step, std::size_t count) {
    if (!(step > 0.0) || count == 0) throw InvalidParameter("uniform grid needs step > 0, count > 0");
    std::vector<double> levels(count);
    for (std::size_t i = 0; i < count; ++i) levels[i] = step * static_cast<double>(i);
    LevelGrid g(std::move(levels));
    g.step_ = step;
    return g;
}

std::ptrdiff_t LevelGrid::bin_of(double x) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(levels_.size());
    if (step_ > 0.0) {
        if (x < 0.0) return -1;
        auto idx = static_cast<std::ptrdiff_t>(std::min(x / step_, static_cast<double>(n - 1)));
        // Guard the floor against rounding at exact multiples of the step.
        while (idx + 1 < n && levels_[idx + 1] <= x) ++idx;
        while (idx >= 0 && levels_[idx] > x) --idx;
        return idx;
    }
    const auto it = std::upper_bound(levels_.begin(), levels_.end(), x);
    return static_cast<std::ptrdiff_t>(it - levels_.begin()) - 1;
}

void validate(const SimConfig& c) {
    if (!(c.dt > 0.0 && c.dt <= 0.01)) throw InvalidParameter("dt must lie in (0, 0.01]");
    if (!(c.horizon >= 0.0) || !std::isfinite(c.horizon)) {
        throw InvalidParameter("horizon must be finite and >= 0");
    }
    if (!(c.burn_in >= 0.0)) throw InvalidParameter("burn_in must be >= 0");
    // burn_in == horizon is accepted and yields an empty window.
    if (c.burn_in > c.horizon) throw InvalidParameter("burn_in must not exceed horizon");
    if (c.replicas < 1) throw InvalidParameter("replicas must be >= 1");
    if (c.grid.size() == 0) throw InvalidParameter("level grid must not be empty");
    if (c.joint_bins < 1) throw InvalidParameter("joint_bins must be >= 1");
    for (double m : c.joint_max) {
        if (!(m >= 0.0)) throw InvalidParameter("joint_max must be >= 0");
    }
    if (!(c.batch_time > 0.0)) throw InvalidParameter("batch_time must be > 0");
    if (c.threads < 0) throw InvalidParameter("threads must be >= 0");
}

StepOutcome step(const State& state, const ValidatedModel& model, double dt, const Vec3& g) {
    for (double v : state.level) {
        if (!(v >= 0.0)) throw InvalidParameter("state levels must be >= 0");
    }
    StepOutcome out{state, {}};
    StepKernel(model, dt).advance(out.state.level, out.regulator_increment, g);
    for (int i = 0; i < 3; ++i) out.state.regulator[i] += out.regulator_increment[i];
    return out;
}

int pair_index(int i, int j) {
    if (i > j) std::swap(i, j);
    for (int k = 0; k < 3; ++k) {
        if (kPairs[k][0] == i && kPairs[k][1] == j) return k;
    }
    throw InvalidParameter("pair must consist of two distinct nodes in 1..3");
}

StationaryAccumulator::StationaryAccumulator(LevelGrid grid, double dt, int joint_bins,
                                             const Vec3& joint_max, const Vec3& boundary_weight)
    : grid_(std::move(grid)), dt_(dt), joint_bins_(joint_bins), boundary_weight_(boundary_weight) {
    for (auto& b : bins_) b.assign(grid_.size() + 1, 0);
    for (auto& b : pair_bins_) b.assign(grid_.size() + 1, 0);
    const double top = grid_[grid_.size() - 1];
    for (int i = 0; i < 3; ++i) {
        const double upper = joint_max[i] > 0.0 ? joint_max[i] : top;
        joint_width_[i] = upper > 0.0 ? upper / joint_bins_ : 1.0;
    }
    joint_cells_.assign(static_cast<std::size_t>(joint_bins_) * joint_bins_ * joint_bins_, 0);
}

StationaryAccumulator StationaryAccumulator::for_config(const SimConfig& config) {
    return StationaryAccumulator(config.grid, config.dt, config.joint_bins, config.joint_max,
                                 config.boundary_weight);
}

std::size_t StationaryAccumulator::joint_cell(const Vec3& level) const noexcept {
    std::size_t idx = 0;
    for (int i = 0; i < 3; ++i) {
        const double raw = level[i] / joint_width_[i];
        const auto b = raw >= joint_bins_ - 1 ? static_cast<std::size_t>(joint_bins_ - 1)
                                              : static_cast<std::size_t>(std::max(raw, 0.0));
        idx = idx * joint_bins_ + b;
    }
    return idx;
}

void StationaryAccumulator::record(const Vec3& level) {
    ++steps_;
    std::array<std::ptrdiff_t, 3> b{};
    for (int i = 0; i < 3; ++i) {
        b[i] = grid_.bin_of(level[i]);
        ++bins_[i][static_cast<std::size_t>(b[i] + 1)];
    }
    for (int k = 0; k < 3; ++k) {
        const auto m = std::min(b[kPairs[k][0] - 1], b[kPairs[k][1] - 1]);
        ++pair_bins_[k][static_cast<std::size_t>(m + 1)];
    }
    ++joint_cells_[joint_cell(level)];
}

void StationaryAccumulator::record_regulation(const Vec3& level, const Vec3& dy) {
    bool any = false;
    for (int i = 0; i < 3; ++i) {
        regulator_total_[i] += dy[i];
        any = any || dy[i] > 0.0;
    }
    if (!any) return;
    const double weight = std::exp(boundary_weight_[0] * level[0] + boundary_weight_[1] * level[1] +
                                   boundary_weight_[2] * level[2]);
    for (int i = 0; i < 3; ++i) boundary_sum_[i] += weight * dy[i];
}

void StationaryAccumulator::record_batch(const Vec3& rates) {
    ++batches_.count;
    for (int i = 0; i < 3; ++i) {
        batches_.sum[i] += rates[i];
        batches_.sum_sq[i] += rates[i] * rates[i];
    }
}

void StationaryAccumulator::merge(const StationaryAccumulator& o) {
    if (!(grid_ == o.grid_) || dt_ != o.dt_ || joint_bins_ != o.joint_bins_ ||
        joint_width_ != o.joint_width_ || boundary_weight_ != o.boundary_weight_) {
        throw GridMismatch("accumulators have different layouts and cannot be merged");
    }
    steps_ += o.steps_;
    for (int i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < bins_[i].size(); ++k) bins_[i][k] += o.bins_[i][k];
        for (std::size_t k = 0; k < pair_bins_[i].size(); ++k) pair_bins_[i][k] += o.pair_bins_[i][k];
        regulator_total_[i] += o.regulator_total_[i];
        boundary_sum_[i] += o.boundary_sum_[i];
        batches_.sum[i] += o.batches_.sum[i];
        batches_.sum_sq[i] += o.batches_.sum_sq[i];
    }
    batches_.count += o.batches_.count;
    for (std::size_t k = 0; k < joint_cells_.size(); ++k) joint_cells_[k] += o.joint_cells_[k];
}

std::uint64_t StationaryAccumulator::exceedance_count(int node, std::size_t level) const {
    check_node(node);
    if (level >= grid_.size()) throw InvalidParameter("level index out of range");
    const auto& b = bins_[node - 1];
    std::uint64_t total = 0;
    for (std::size_t k = level + 1; k < b.size(); ++k) total += b[k];
    return total;
}

std::vector<std::uint64_t> StationaryAccumulator::exceedance_counts(int node) const {
    check_node(node);
    const auto& b = bins_[node - 1];
    std::vector<std::uint64_t> out(grid_.size());
    std::uint64_t running = 0;
    for (std::size_t k = grid_.size(); k-- > 0;) {
        running += b[k + 1];
        out[k] = running;
    }
    return out;
}

std::uint64_t StationaryAccumulator::pair_exceedance_count(int pair, std::size_t level) const {
    if (pair < 0 || pair > 2) throw InvalidParameter("pair index must be 0, 1 or 2");
    if (level >= grid_.size()) throw InvalidParameter("level index out of range");
    const auto& b = pair_bins_[pair];
    std::uint64_t total = 0;
    for (std::size_t k = level + 1; k < b.size(); ++k) total += b[k];
    return total;
}

std::uint64_t StationaryAccumulator::joint_exceedance_count(const std::array<int, 3>& e) const {
    for (int v : e) {
        if (v < 0 || v >= joint_bins_) throw InvalidParameter("joint edge index out of range");
    }
    const auto n = static_cast<std::size_t>(joint_bins_);
    std::uint64_t total = 0;
    for (auto i = static_cast<std::size_t>(e[0]); i < n; ++i) {
        for (auto j = static_cast<std::size_t>(e[1]); j < n; ++j) {
            const std::size_t row = (i * n + j) * n;
            for (auto k = static_cast<std::size_t>(e[2]); k < n; ++k) total += joint_cells_[row + k];
        }
    }
    return total;
}

std::uint64_t StationaryAccumulator::joint_marginal_count(int node, int edge) const {
    check_node(node);
    std::array<int, 3> e{0, 0, 0};
    e[node - 1] = edge;
    return joint_exceedance_count(e);
}

StationaryAccumulator run_replica(const ValidatedModel& model, const SimConfig& config,
                                  int replica) {
    validate(config);
    auto acc = StationaryAccumulator::for_config(config);
    auto engine = replica_engine(config.seed, replica);
    boost::random::normal_distribution<double> normal;
    const StepKernel kernel(model, config.dt);

    const std::uint64_t total = step_count(config.horizon, config.dt);
    const std::uint64_t burn = std::min(total, step_count(config.burn_in, config.dt));
    const std::uint64_t batch_steps = std::max<std::uint64_t>(1, step_count(config.batch_time, config.dt));

    Vec3 level{};  // L(0) = 0
    Vec3 dy{};
    Vec3 g{};
    for (std::uint64_t n = 0; n < burn; ++n) {
        for (double& v : g) v = normal(engine);
        kernel.advance(level, dy, g);
    }
    Vec3 batch_dy{};
    std::uint64_t in_batch = 0;
    for (std::uint64_t n = burn; n < total; ++n) {
        for (double& v : g) v = normal(engine);
        kernel.advance(level, dy, g);
        acc.record(level);
        if (dy[0] > 0.0 || dy[1] > 0.0 || dy[2] > 0.0) {
            acc.record_regulation(level, dy);
            for (int i = 0; i < 3; ++i) batch_dy[i] += dy[i];
        }
        if (++in_batch == batch_steps) {
            const double span = static_cast<double>(batch_steps) * config.dt;
            acc.record_batch({batch_dy[0] / span, batch_dy[1] / span, batch_dy[2] / span});
            batch_dy = {};
            in_batch = 0;
        }
    }
    return acc;
}

StationaryAccumulator merge_replicas(const std::vector<StationaryAccumulator>& replicas) {
    if (replicas.empty()) throw InvalidParameter("no replicas to merge");
    StationaryAccumulator out = replicas.front();
    for (std::size_t r = 1; r < replicas.size(); ++r) out.merge(replicas[r]);
    return out;
}

StationaryAccumulator run(const ValidatedModel& model, const SimConfig& config) {
    validate(config);
    std::vector<StationaryAccumulator> results(static_cast<std::size_t>(config.replicas));
    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(config.replicas));
    if (workers <= 1) {
        for (int r = 0; r < config.replicas; ++r) results[r] = run_replica(model, config, r);
        return merge_replicas(results);
    }
    // Static round-robin assignment; each replica writes only its own slot.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int r = static_cast<int>(w); r < config.replicas; r += static_cast<int>(workers)) {
                    results[r] = run_replica(model, config, r);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return merge_replicas(results);
}

Vec3 estimate_regulator_rates(const StationaryAccumulator& acc) {
    if (acc.steps() == 0) throw EmptyWindow("empty accumulation window");
    const double t = acc.window_length();
    const auto& y = acc.regulator_total();
    return {y[0] / t, y[1] / t, y[2] / t};
}

RegulatorEstimate estimate_regulator_rates_with_error(const StationaryAccumulator& acc) {
    RegulatorEstimate out;
    out.rate = estimate_regulator_rates(acc);
    const auto& b = acc.batches();
    if (b.count >= 2) {
        const auto n = static_cast<double>(b.count);
        for (int i = 0; i < 3; ++i) {
            const double mean = b.sum[i] / n;
            const double var = std::max(0.0, (b.sum_sq[i] - n * mean * mean) / (n - 1.0));
            out.half_width[i] = 1.96 * std::sqrt(var / n);
        }
    }
    return out;
}

double estimate_boundary_transform(const StationaryAccumulator& acc, int node) {
    check_node(node);
    if (acc.steps() == 0) throw EmptyWindow("empty accumulation window");
    return acc.boundary_sum()[node - 1] / acc.window_length();
}

std::array<std::vector<double>, 3> block_maxima(const ValidatedModel& model,
                                                const SimConfig& config, double block_time,
                                                int n_blocks) {
    validate(config);
    if (!(block_time > 0.0) || n_blocks < 0) {
        throw InvalidParameter("block_time must be > 0 and n_blocks >= 0");
    }
    auto engine = replica_engine(config.seed, 0);
    boost::random::normal_distribution<double> normal;
    const StepKernel kernel(model, config.dt);
    const std::uint64_t burn = step_count(config.burn_in, config.dt);
    const std::uint64_t block_steps = std::max<std::uint64_t>(1, step_count(block_time, config.dt));

    Vec3 level{};
    Vec3 dy{};
    Vec3 g{};
    for (std::uint64_t n = 0; n < burn; ++n) {
        for (double& v : g) v = normal(engine);
        kernel.advance(level, dy, g);
    }
    std::array<std::vector<double>, 3> out;
    for (auto& v : out) v.reserve(static_cast<std::size_t>(n_blocks));
    for (int b = 0; b < n_blocks; ++b) {
        Vec3 best{};
        for (std::uint64_t n = 0; n < block_steps; ++n) {
            for (double& v : g) v = normal(engine);
            kernel.advance(level, dy, g);
            for (int i = 0; i < 3; ++i) best[i] = std::max(best[i], level[i]);
        }
        for (int i = 0; i < 3; ++i) out[i].push_back(best[i]);
    }
    return out;
}

}  // namespace tandem::sim
