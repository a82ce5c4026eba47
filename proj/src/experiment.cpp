#include "fxtriplet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fxtriplet {

StrategySpec StrategySpec::parse(const std::string& name, double phi)
{
    StrategySpec s;
    s.phi = phi;
    if (name == "neutral") {
        s.kind = Kind::neutral;
        s.phi = 0.0;
    } else if (name == "robust") {
        s.kind = Kind::robust;
    } else if (name == "illiquid-only") {
        s.kind = Kind::illiquid_only;
        s.phi = 0.0;
    } else {
        throw ParameterError("strategy", "expected neutral, robust or illiquid-only");
    }
    if (!(s.phi >= 0.0) || !std::isfinite(s.phi)) throw ParameterError("ambiguity.phi", "must be >= 0");
    return s;
}

std::string StrategySpec::name() const
{
    switch (kind) {
    case Kind::neutral: return "neutral";
    case Kind::robust: return "robust";
    case Kind::illiquid_only: return "illiquid-only";
    }
    return "?";
}

RunConfig illiquid_only_config(const RunConfig& config)
{
    RunConfig c = config;
    for (Pair k : {Pair::x, Pair::y}) {
        c.sim.flow[k].plus.lambda = 0.0;
        c.sim.flow[k].minus.lambda = 0.0;
    }
    return c;
}

std::unique_ptr<PreparedStrategy> PreparedStrategy::prepare(const RunConfig& config,
                                                            const StrategySpec& spec,
                                                            ExecPolicy policy)
{
    auto p = std::unique_ptr<PreparedStrategy>(new PreparedStrategy());
    const RunConfig cfg = spec.kind == StrategySpec::Kind::illiquid_only ? illiquid_only_config(config) : config;
    cfg.validate();
    p->sim_ = cfg.sim;
    const TimeGrid grid = cfg.sim.grid();
    p->h_ = std::make_unique<HSolution>(
        HSolution::solve(cfg.reference, cfg.sim.exec, cfg.sim.flow, grid));

    switch (spec.kind) {
    case StrategySpec::Kind::illiquid_only:
        p->strategy_ = std::make_unique<IlliquidOnlyStrategy>(*p->h_, cfg.sim.exec);
        break;
    case StrategySpec::Kind::neutral:
        p->strategy_ = std::make_unique<NeutralStrategy>(*p->h_, cfg.sim.exec);
        break;
    case StrategySpec::Kind::robust:
        if (spec.phi == 0.0) {
            // The truncated robust controls reduce to the neutral ones at phi = 0.
            p->strategy_ = std::make_unique<NeutralStrategy>(*p->h_, cfg.sim.exec);
        } else {
            p->aux_ = std::make_unique<AuxiliaryFlow>(AuxiliaryFlow::build(*p->h_, cfg.sim.flow));
            p->h1_ = std::make_unique<RobustCorrection>(
                RobustCorrection::compute(*p->aux_, cfg.reference, policy));
            p->strategy_ = std::make_unique<RobustStrategy>(*p->h_, *p->h1_, cfg.reference,
                                                            cfg.sim.exec, spec.phi);
        }
        break;
    }
    return p;
}

double nearest_rank(const std::vector<double>& sorted, double p)
{
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

PnLStats pnl_stats(const std::vector<double>& values)
{
    PnLStats s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.count);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
    s.se_mean = s.std / std::sqrt(static_cast<double>(s.count));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    s.median = nearest_rank(sorted, 50.0);
    s.p05 = nearest_rank(sorted, 5.0);
    s.p25 = nearest_rank(sorted, 25.0);
    s.p75 = nearest_rank(sorted, 75.0);
    s.p95 = nearest_rank(sorted, 95.0);
    return s;
}

TrajectoryAccumulator::TrajectoryAccumulator(std::size_t knots)
    : t_(knots, 0.0), sum_(knots), sumsq_(knots)
{
    for (auto& r : sum_) r.fill(0.0);
    for (auto& r : sumsq_) r.fill(0.0);
}

namespace {

std::array<double, kTrajectoryFields> record_fields(const StepRecord& r)
{
    return {r.x, r.y, r.z, r.q[0], r.q[1], r.q[2], r.speed[0], r.speed[1], r.speed[2],
            r.kappa[0], r.kappa[1], r.kappa[2]};
}

}  // namespace

void TrajectoryAccumulator::add(const std::vector<StepRecord>& path)
{
    if (path.size() != sum_.size()) throw std::invalid_argument("trajectory grid mismatch");
    for (std::size_t i = 0; i < path.size(); ++i) {
        t_[i] = path[i].t;
        const auto f = record_fields(path[i]);
        for (std::size_t j = 0; j < kTrajectoryFields; ++j) {
            sum_[i][j] += f[j];
            sumsq_[i][j] += f[j] * f[j];
        }
    }
    ++count_;
}

void TrajectoryAccumulator::merge(const TrajectoryAccumulator& other)
{
    if (other.count_ == 0) return;
    if (other.sum_.size() != sum_.size()) throw std::invalid_argument("trajectory grid mismatch");
    for (std::size_t i = 0; i < sum_.size(); ++i) {
        t_[i] = other.t_[i];
        for (std::size_t j = 0; j < kTrajectoryFields; ++j) {
            sum_[i][j] += other.sum_[i][j];
            sumsq_[i][j] += other.sumsq_[i][j];
        }
    }
    count_ += other.count_;
}

double TrajectoryAccumulator::mean(std::size_t knot, std::size_t field) const
{
    return count_ ? sum_.at(knot).at(field) / static_cast<double>(count_) : 0.0;
}

double TrajectoryAccumulator::se(std::size_t knot, std::size_t field) const
{
    if (count_ < 2) return 0.0;
    const double n = static_cast<double>(count_);
    const double m = sum_.at(knot).at(field) / n;
    const double var = std::max(0.0, (sumsq_[knot][field] - n * m * m) / (n - 1.0));
    return std::sqrt(var / n);
}

const char* trajectory_field_name(std::size_t field) noexcept
{
    static constexpr const char* names[kTrajectoryFields] = {
        "X", "Y", "Z", "q_x", "q_y", "q_z", "nu_x", "nu_y", "nu_z", "kappa_x", "kappa_y", "kappa_z"};
    return field < kTrajectoryFields ? names[field] : "?";
}

std::vector<AggregateRow> trajectory_aggregates(const TrajectoryAccumulator& acc)
{
    std::vector<AggregateRow> rows(acc.knots());
    for (std::size_t i = 0; i < acc.knots(); ++i) {
        rows[i].t = acc.times()[i];
        for (std::size_t j = 0; j < kTrajectoryFields; ++j) {
            rows[i].mean[j] = acc.mean(i, j);
            rows[i].se[j] = acc.se(i, j);
        }
    }
    return rows;
}

namespace {

struct BlockOutput {
    std::optional<TrajectoryAccumulator> acc;
    std::string error;
};

void run_block(const SimConfig& sim, const Strategy& strategy, const BatchOptions& opt,
               std::size_t block, std::size_t knots, BatchResult& out, BlockOutput& bo)
{
    const std::size_t lo = block * opt.block_size;
    const std::size_t hi = std::min(sim.n_paths, lo + opt.block_size);
    if (opt.aggregate) bo.acc.emplace(knots);
    std::vector<StepRecord> traj;
    for (std::size_t p = lo; p < hi; ++p) {
        const bool keep = p < opt.record_paths;
        const bool need = opt.aggregate || keep;
        out.paths[p] = run_path(sim, strategy, p, need ? &traj : nullptr);
        if (opt.aggregate) bo.acc->add(traj);
        if (keep) out.recorded[p] = traj;
    }
}

}  // namespace

BatchResult run_batch(const SimConfig& sim, const Strategy& strategy, const BatchOptions& opt)
{
    sim.validate();
    if (opt.block_size == 0) throw std::invalid_argument("block_size must be > 0");
    BatchResult out;
    out.strategy = strategy.name();
    out.paths.resize(sim.n_paths);
    out.recorded.resize(std::min(opt.record_paths, sim.n_paths));
    const std::size_t knots = sim.grid().knots();
    const std::size_t blocks = (sim.n_paths + opt.block_size - 1) / opt.block_size;
    std::vector<BlockOutput> bo(blocks);

    if (opt.policy == ExecPolicy::parallel) {
        const auto count = static_cast<long long>(blocks);
#pragma omp parallel for schedule(dynamic, 1)
        for (long long b = 0; b < count; ++b) {
            const auto s = static_cast<std::size_t>(b);
            try {
                run_block(sim, strategy, opt, s, knots, out, bo[s]);
            } catch (const std::exception& e) {
                bo[s].error = e.what();
            }
        }
    } else {
        for (std::size_t b = 0; b < blocks; ++b) {
            try {
                run_block(sim, strategy, opt, b, knots, out, bo[b]);
            } catch (const std::exception& e) {
                bo[b].error = e.what();
            }
        }
    }

    for (const BlockOutput& b : bo)
        if (!b.error.empty()) throw std::runtime_error(b.error);

    if (opt.aggregate) {
        out.aggregate.emplace(knots);
        for (const BlockOutput& b : bo) out.aggregate->merge(*b.acc);
    }

    const double divisor = pnl_divisor(sim.q0);
    out.pnl_per_lot.reserve(out.paths.size());
    double unwind = 0.0;
    for (const PathResult& r : out.paths) {
        out.pnl_per_lot.push_back(r.pnl_per_lot);
        for (std::size_t k = 0; k < 3; ++k) out.mean_terminal_q[k] += r.terminal_q[k];
        unwind += r.unwind * sim.lot_units / divisor;
        out.max_no_arbitrage_error = std::max(out.max_no_arbitrage_error, r.max_no_arbitrage_error);
    }
    const double n = static_cast<double>(out.paths.size());
    for (double& q : out.mean_terminal_q) q /= n;
    out.mean_unwind_per_lot = unwind / n;
    out.stats = pnl_stats(out.pnl_per_lot);
    return out;
}

BatchResult run_batch(const RunConfig& config, const StrategySpec& spec, const BatchOptions& opt)
{
    const auto prepared = PreparedStrategy::prepare(config, spec, opt.policy);
    BatchResult r = run_batch(prepared->sim(), prepared->strategy(), opt);
    r.strategy = spec.name();
    return r;
}

double ImprovementStats::exceedance(double x_percent) const
{
    if (delta.empty()) return 0.0;
    const double threshold = x_percent * 1e-2;
    std::size_t hits = 0;
    for (double d : delta)
        if (d > threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(delta.size());
}

ImprovementStats compare_strategies(const BatchResult& base, const BatchResult& alt)
{
    if (base.pnl_per_lot.size() != alt.pnl_per_lot.size())
        throw std::invalid_argument("compare_strategies: batches have different path counts");
    ImprovementStats s;
    s.count = base.pnl_per_lot.size();
    if (s.count == 0) return s;
    std::vector<double> diff(s.count);
    s.delta.resize(s.count);
    for (std::size_t i = 0; i < s.count; ++i) {
        diff[i] = alt.pnl_per_lot[i] - base.pnl_per_lot[i];
        s.delta[i] = diff[i] / base.pnl_per_lot[i];
    }
    const PnLStats d = pnl_stats(diff);
    s.mean_diff = d.mean;
    s.se_diff = d.se_mean;
    const PnLStats pct = pnl_stats(s.delta);
    s.delta_mean = pct.mean;
    s.delta_std = pct.std;
    s.delta_median = pct.median;
    s.sharpe_defined = pct.std > 0.0;
    s.sharpe = s.sharpe_defined ? pct.mean / pct.std : std::numeric_limits<double>::quiet_NaN();
    s.p_positive = s.exceedance(0.0);
    return s;
}

double paired_std_difference_se(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("paired samples required");
    const PnLStats sa = pnl_stats(a);
    const PnLStats sb = pnl_stats(b);
    if (sa.std == 0.0 || sb.std == 0.0) return 0.0;
    // Influence function of the standard deviation: ((v - mean)^2 - var) / (2 std).
    std::vector<double> infl(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ia = ((a[i] - sa.mean) * (a[i] - sa.mean) - sa.std * sa.std) / (2.0 * sa.std);
        const double ib = ((b[i] - sb.mean) * (b[i] - sb.mean) - sb.std * sb.std) / (2.0 * sb.std);
        infl[i] = ia - ib;
    }
    return pnl_stats(infl).se_mean;
}

PhiSweepResult phi_sweep(const RunConfig& config, const std::vector<double>& phi_grid,
                         const BatchOptions& opt)
{
    if (phi_grid.empty()) throw ParameterError("phi_grid", "must not be empty");
    for (double phi : phi_grid)
        if (!(phi >= 0.0) || !std::isfinite(phi)) throw ParameterError("phi_grid", "values must be >= 0");
    const BatchResult base = run_batch(config, StrategySpec{StrategySpec::Kind::robust, 0.0}, opt);
    PhiSweepResult out;
    std::vector<double> prev;
    for (double phi : phi_grid) {
        FrontierRow row;
        row.phi = phi;
        const BatchResult b = phi == 0.0 ? base
                                         : run_batch(config, StrategySpec{StrategySpec::Kind::robust, phi}, opt);
        row.stats = b.stats;
        row.improvement = compare_strategies(base, b);
        if (!prev.empty() && b.pnl_per_lot.size() > 1)
            row.se_std_vs_prev = paired_std_difference_se(b.pnl_per_lot, prev);
        prev = b.pnl_per_lot;
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::vector<PenaltyRow> penalty_sweep(const RunConfig& config, const std::vector<double>& multipliers,
                                      double phi, const BatchOptions& opt)
{
    std::vector<PenaltyRow> out;
    for (double m : multipliers) {
        if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError("alpha_grid", "multipliers must be > 0");
        RunConfig c = config;
        c.sim.flow = FlowParams::none();
        for (std::size_t k = 0; k < 3; ++k) c.sim.exec.alpha[k] = m * c.sim.exec.a[k];
        PenaltyRow row;
        row.multiplier = m;
        row.batch = run_batch(c, StrategySpec{StrategySpec::Kind::robust, phi}, opt);
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<double> default_phi_grid() { return {0, 0.1, 0.5, 1, 2, 4, 8, 16, 24, 32, 36, 40, 50}; }

std::vector<double> default_alpha_grid() { return {1.0, 2.5, 1e6}; }

std::vector<double> default_exceedance_grid()
{
    std::vector<double> g;
    for (int i = -100; i <= 100; ++i) g.push_back(0.002 * i);
    return g;
}

void set_thread_count(int threads)
{
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace fxtriplet
