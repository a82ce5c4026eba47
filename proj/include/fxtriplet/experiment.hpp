#pragma once

// Batch Monte Carlo and the analytics built on it. Every batch of a given
// config and seed uses the same per-path random streams, so batches run with
// different strategies or phi values are paired path by path.

#include "fxtriplet/config.hpp"
#include "fxtriplet/robust_solver.hpp"
#include "fxtriplet/simulator.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fxtriplet {

struct StrategySpec {
    enum class Kind { neutral, robust, illiquid_only };
    Kind kind = Kind::robust;
    double phi = 0.0;

    static StrategySpec parse(const std::string& name, double phi);
    std::string name() const;
};

/// Solver output and strategy object for one spec. Owns everything the
/// strategy references.
class PreparedStrategy {
public:
    static std::unique_ptr<PreparedStrategy> prepare(const RunConfig& config, const StrategySpec& spec,
                                                     ExecPolicy policy = ExecPolicy::parallel);

    const Strategy& strategy() const { return *strategy_; }
    const HSolution& solution() const { return *h_; }
    const RobustCorrection* correction() const { return h1_.get(); }
    /// Simulation config with the flow the strategy actually faces.
    const SimConfig& sim() const { return sim_; }

private:
    std::unique_ptr<HSolution> h_;
    std::unique_ptr<AuxiliaryFlow> aux_;
    std::unique_ptr<RobustCorrection> h1_;
    std::unique_ptr<Strategy> strategy_;
    SimConfig sim_;
};

/// Illiquid-only view of a config: no client flow in x and y.
RunConfig illiquid_only_config(const RunConfig& config);

struct PnLStats {
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;        // n - 1 normalisation
    double se_mean = 0.0;
    double median = 0.0;
    double p05 = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
    double p95 = 0.0;
};

/// Nearest-rank percentile of `sorted` (ascending), p in [0, 100].
double nearest_rank(const std::vector<double>& sorted, double p);
PnLStats pnl_stats(const std::vector<double>& values);

inline constexpr std::size_t kTrajectoryFields = 12;  // X Y Z q(3) nu(3) kappa(3)

/// Pointwise sums over paths of knot records, merged in a fixed order.
class TrajectoryAccumulator {
public:
    explicit TrajectoryAccumulator(std::size_t knots = 0);
    void add(const std::vector<StepRecord>& path);
    void merge(const TrajectoryAccumulator& other);

    std::size_t knots() const noexcept { return sum_.size(); }
    std::size_t count() const noexcept { return count_; }
    double mean(std::size_t knot, std::size_t field) const;
    double se(std::size_t knot, std::size_t field) const;
    const std::vector<double>& times() const noexcept { return t_; }

private:
    std::vector<double> t_;
    std::vector<std::array<double, kTrajectoryFields>> sum_;
    std::vector<std::array<double, kTrajectoryFields>> sumsq_;
    std::size_t count_ = 0;
};

const char* trajectory_field_name(std::size_t field) noexcept;

struct AggregateRow {
    double t = 0.0;
    std::array<double, kTrajectoryFields> mean{};
    std::array<double, kTrajectoryFields> se{};
};

std::vector<AggregateRow> trajectory_aggregates(const TrajectoryAccumulator& acc);

struct BatchOptions {
    ExecPolicy policy = ExecPolicy::parallel;
    bool aggregate = false;          // accumulate mean trajectories over all paths
    std::size_t record_paths = 0;    // keep full trajectories of the first K paths
    std::size_t block_size = 64;     // reduction block; fixes the summation order
};

struct BatchResult {
    std::string strategy;
    std::vector<PathResult> paths;
    std::vector<double> pnl_per_lot;
    PnLStats stats;
    std::optional<TrajectoryAccumulator> aggregate;
    std::vector<std::vector<StepRecord>> recorded;
    Inventory mean_terminal_q{};
    double mean_unwind_per_lot = 0.0;   // currency-1 units per lot
    double max_no_arbitrage_error = 0.0;
};

BatchResult run_batch(const SimConfig& sim, const Strategy& strategy, const BatchOptions& opt = {});
BatchResult run_batch(const RunConfig& config, const StrategySpec& spec, const BatchOptions& opt = {});

struct ImprovementStats {
    std::size_t count = 0;
    double mean_diff = 0.0;       // per lot, alt - base
    double se_diff = 0.0;
    std::vector<double> delta;    // (alt - base) / base per path
    double delta_mean = 0.0;
    double delta_std = 0.0;
    double delta_median = 0.0;
    double sharpe = 0.0;          // delta_mean / delta_std; NaN when undefined
    bool sharpe_defined = false;  // false when delta has zero variance
    double p_positive = 0.0;

    /// Fraction of paths with delta > x_percent / 100.
    double exceedance(double x_percent) const;
};

/// Paired comparison; throws std::invalid_argument on mismatched path counts.
ImprovementStats compare_strategies(const BatchResult& base, const BatchResult& alt);

/// Standard error of std(a) - std(b) for paired samples, by the delta method.
double paired_std_difference_se(const std::vector<double>& a, const std::vector<double>& b);

struct FrontierRow {
    double phi = 0.0;
    PnLStats stats;
    ImprovementStats improvement;  // against phi = 0
    double se_std_vs_prev = 0.0;   // paired SE of std(phi) - std(previous phi)
};

struct PhiSweepResult {
    std::vector<FrontierRow> rows;
};

/// One robust batch per phi plus the phi = 0 baseline, all on common random numbers.
PhiSweepResult phi_sweep(const RunConfig& config, const std::vector<double>& phi_grid,
                         const BatchOptions& opt = {});

struct PenaltyRow {
    double multiplier = 0.0;
    BatchResult batch;
};

/// Batches with alpha_k = m a_k, no client flow, robust strategy at `phi`.
std::vector<PenaltyRow> penalty_sweep(const RunConfig& config, const std::vector<double>& multipliers,
                                      double phi = 0.1, const BatchOptions& opt = {});

std::vector<double> default_phi_grid();
std::vector<double> default_alpha_grid();
std::vector<double> default_exceedance_grid();

/// Clamp the OpenMP team size; 0 leaves the runtime default.
void set_thread_count(int threads);
int max_threads();

}  // namespace fxtriplet
