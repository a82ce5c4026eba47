#include "fxtriplet/simulator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fxtriplet {

const char* fill_timing_name(FillTiming f) noexcept
{
    return f == FillTiming::pre_update ? "pre_update" : "post_update";
}

FillTiming parse_fill_timing(const std::string& s)
{
    if (s == "pre_update") return FillTiming::pre_update;
    if (s == "post_update") return FillTiming::post_update;
    throw ParameterError("simulation.fill_timing", "expected pre_update or post_update");
}

void SimConfig::validate(const std::string& prefix) const
{
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError(prefix + ".T", "must be > 0");
    try {
        (void)grid();
    } catch (const ParameterError& e) {
        throw ParameterError(prefix + ".dt", "must be > 0 and divide T");
    }
    if (n_paths < 1) throw ParameterError(prefix + ".n_paths", "must be >= 1");
    if (!(unwind_dt > 0.0) || !std::isfinite(unwind_dt))
        throw ParameterError(prefix + ".unwind_dt", "must be > 0");
    if (!(lot_units > 0.0)) throw ParameterError(prefix + ".lot_units", "must be > 0");
    for (Pair k : kPairs)
        if (!std::isfinite(q0[idx(k)]))
            throw ParameterError(prefix + ".q0." + pair_name(k), "must be finite");
    statistical.validate("triplet.statistical");
    exec.validate();
    flow.validate();
}

RobustControls NeutralStrategy::controls(std::size_t step, const PathState& s) const
{
    return robust_controls(h_.at_knot(step), nullptr, h_.reference(), exec_, s.x, s.y, s.q, 0.0);
}

RobustControls RobustStrategy::controls(std::size_t step, const PathState& s) const
{
    return robust_controls(h_.at_knot(step), &h1_.at_knot(step), reference_, exec_, s.x, s.y, s.q,
                           phi_);
}

RobustControls IlliquidOnlyStrategy::controls(std::size_t step, const PathState& s) const
{
    const HValues& h = h_.at_knot(step);
    RobustControls c;
    c.speed[idx(Pair::z)] = neutral_speed(exec_.a[idx(Pair::z)], h.h1[2], h.h2[2], s.q[2]);
    return c;
}

std::pair<double, double> correlate(double n1, double n2, double rho) noexcept
{
    return {n1, rho * n1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * n2};
}

void step_rates(PathState& s, const TripletParams& p, double dt, double zeta_x, double zeta_y) noexcept
{
    const double sq = std::sqrt(dt);
    s.x *= std::exp((p.mu_x - 0.5 * p.sigma_x * p.sigma_x) * dt + p.sigma_x * sq * zeta_x);
    s.y *= std::exp((p.mu_y - 0.5 * p.sigma_y * p.sigma_y) * dt + p.sigma_y * sq * zeta_y);
    s.z = s.x / s.y;
}

void sample_client_fills(Pair k, bool client_sells, const SideFlow& side, double dt,
                         CounterRng& rng, std::vector<ClientFill>& out)
{
    if (!(side.lambda > 0.0)) return;
    std::poisson_distribution<long> arrivals(side.lambda * dt);
    const long n = arrivals(rng);
    for (long i = 0; i < n; ++i) out.push_back({k, client_sells, side.size.sample(rng)});
}

void apply_broker_trade(PathState& s, const PerPair<double>& speed, const ExecutionParams& exec,
                        double dt) noexcept
{
    for (Pair k : kPairs) {
        const std::size_t i = idx(k);
        const double v = speed[i];
        s.q[i] -= v * dt;
        s.cash += marking_rate(s, k) * (1.0 - exec.a[i] * v) * v * dt;
    }
}

void apply_client_fill(PathState& s, const ClientFill& f, const ExecutionParams& exec) noexcept
{
    const std::size_t i = idx(f.pair);
    const double khat = marking_rate(s, f.pair);
    const double r = f.size;
    if (f.client_sells) {
        s.q[i] += r;
        s.cash -= khat * (1.0 - exec.c_plus[i] * r) * r;
        s.client_sells[i] += r;
    } else {
        s.q[i] -= r;
        s.cash += khat * (1.0 + exec.c_minus[i] * r) * r;
        s.client_buys[i] += r;
    }
}

double terminal_unwind(const PathState& s, const ExecutionParams& exec, double unwind_dt) noexcept
{
    double total = 0.0;
    for (Pair k : kPairs) {
        const std::size_t i = idx(k);
        const double q = s.q[i];
        total += q * std::max(marking_rate(s, k) * (1.0 - exec.a[i] * q / unwind_dt), 0.0);
    }
    return total;
}

double pnl_divisor(const Inventory& q0) noexcept
{
    const double d = std::abs(q0[idx(Pair::z)]);
    return d > 0.0 ? d : 1.0;
}

namespace {

StepRecord snapshot(const PathState& s)
{
    StepRecord r;
    r.t = s.t;
    r.x = s.x;
    r.y = s.y;
    r.z = s.z;
    r.q = s.q;
    r.speed = s.speed;
    r.kappa = {s.kappa.kappa_x, s.kappa.kappa_y, s.kappa.kappa_z};
    return r;
}

}  // namespace

PathResult run_path(const SimConfig& config, const Strategy& strategy, std::size_t path,
                    std::vector<StepRecord>* trajectory)
{
    const TimeGrid grid = config.grid();
    const std::size_t n = grid.steps();
    if (strategy.grid().steps() != n || strategy.grid().horizon() != grid.horizon())
        throw std::invalid_argument("run_path: strategy and simulation grids differ");
    const double dt = grid.dt();

    PathState s;
    s.x = config.statistical.x0;
    s.y = config.statistical.y0;
    s.z = s.x / s.y;
    s.q = config.q0;

    CounterRng normals(config.seed, path, StreamLabel::normals);
    std::array<CounterRng, 6> fill_rng{
        CounterRng(config.seed, path, fill_stream(0, true)), CounterRng(config.seed, path, fill_stream(0, false)),
        CounterRng(config.seed, path, fill_stream(1, true)), CounterRng(config.seed, path, fill_stream(1, false)),
        CounterRng(config.seed, path, fill_stream(2, true)), CounterRng(config.seed, path, fill_stream(2, false))};
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<ClientFill> fills;
    if (trajectory) {
        trajectory->clear();
        trajectory->reserve(n + 1);
    }

    PathResult result;
    for (std::size_t i = 0; i < n; ++i) {
        const RobustControls c = strategy.controls(i, s);
        for (double v : c.speed)
            if (!std::isfinite(v))
                throw std::runtime_error("strategy " + strategy.name() + " returned a non-finite speed on path " +
                                         std::to_string(path) + " at step " + std::to_string(i));
        s.speed = c.speed;
        s.kappa = c.kappa;
        if (trajectory) trajectory->push_back(snapshot(s));

        apply_broker_trade(s, s.speed, config.exec, dt);

        fills.clear();
        for (Pair k : kPairs) {
            const PairFlow& f = config.flow[k];
            sample_client_fills(k, true, f.plus, dt, fill_rng[2 * idx(k)], fills);
            sample_client_fills(k, false, f.minus, dt, fill_rng[2 * idx(k) + 1], fills);
        }
        const double n1 = gauss(normals);
        const double n2 = gauss(normals);
        const auto [zx, zy] = correlate(n1, n2, config.statistical.rho);

        if (config.fill_timing == FillTiming::pre_update) {
            for (const ClientFill& f : fills) apply_client_fill(s, f, config.exec);
            step_rates(s, config.statistical, dt, zx, zy);
        } else {
            step_rates(s, config.statistical, dt, zx, zy);
            for (const ClientFill& f : fills) apply_client_fill(s, f, config.exec);
        }
        s.t = grid.t(i + 1);
        const double err = std::abs(s.z - s.x / s.y) / s.z;
        if (err > result.max_no_arbitrage_error) result.max_no_arbitrage_error = err;
    }

    if (trajectory) {
        const RobustControls c = strategy.controls(n, s);
        s.speed = c.speed;
        s.kappa = c.kappa;
        trajectory->push_back(snapshot(s));
    }

    result.terminal_cash = s.cash;
    result.unwind = terminal_unwind(s, config.exec, config.unwind_dt);
    result.terminal_q = s.q;
    result.pnl_total = (result.terminal_cash + result.unwind) * config.lot_units;
    result.pnl_per_lot = result.pnl_total / pnl_divisor(config.q0);
    return result;
}

}  // namespace fxtriplet
