#pragma once

// Path simulation under the statistical measure. Each step of length dt:
//   1. the strategy sets speeds from time-t_i coefficients,
//   2. the broker trades those speeds over the step,
//   3. client orders arriving in the step are filled,
//   4. X and Y take an exact log-normal step and Z = X / Y.
// Cash is carried in rate x lot units; reported P&L is scaled by lot_units.

#include "fxtriplet/model.hpp"
#include "fxtriplet/neutral_solver.hpp"
#include "fxtriplet/rng.hpp"
#include "fxtriplet/robust_solver.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fxtriplet {

/// Whether client fills in a step use the rates before or after the step's rate update.
enum class FillTiming { pre_update, post_update };

const char* fill_timing_name(FillTiming f) noexcept;
FillTiming parse_fill_timing(const std::string& s);

struct SimConfig {
    double horizon = 1.0;
    double dt = 1e-3;
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    TripletParams statistical{};
    ExecutionParams exec{};
    FlowParams flow{};
    Inventory q0{};
    double unwind_dt = 1e-3;
    FillTiming fill_timing = FillTiming::pre_update;
    double lot_units = 1e6;  // base-currency units per lot

    TimeGrid grid() const { return TimeGrid::from_step(horizon, dt); }
    void validate(const std::string& prefix = "simulation") const;
};

struct PathState {
    double t = 0.0;
    double x = 1.0;
    double y = 1.0;
    double z = 1.0;
    Inventory q{};
    double cash = 0.0;              // rate x lots
    PerPair<double> client_buys{};  // cumulative J^- volume
    PerPair<double> client_sells{}; // cumulative J^+ volume
    PerPair<double> speed{};        // last applied speeds
    DriftAdjustment kappa{};        // last drift adjustment
};

struct StepRecord {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    Inventory q{};
    PerPair<double> speed{};
    PerPair<double> kappa{};
};

struct PathResult {
    double terminal_cash = 0.0;  // rate x lots, before unwind
    double unwind = 0.0;         // rate x lots
    Inventory terminal_q{};
    double pnl_total = 0.0;      // currency-1 units
    double pnl_per_lot = 0.0;
    double max_no_arbitrage_error = 0.0;  // max |Z - X/Y| / Z over the path
};

/// A strategy maps the state at knot i to speeds and (for robust strategies) drift adjustments.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual RobustControls controls(std::size_t step, const PathState& s) const = 0;
    virtual std::string name() const = 0;
    virtual const TimeGrid& grid() const = 0;
};

class NeutralStrategy : public Strategy {
public:
    NeutralStrategy(const HSolution& h, ExecutionParams exec) : h_(h), exec_(std::move(exec)) {}
    RobustControls controls(std::size_t step, const PathState& s) const override;
    std::string name() const override { return "neutral"; }
    const TimeGrid& grid() const override { return h_.grid(); }

private:
    const HSolution& h_;
    ExecutionParams exec_;
};

class RobustStrategy : public Strategy {
public:
    RobustStrategy(const HSolution& h, const RobustCorrection& h1, TripletParams reference,
                   ExecutionParams exec, double phi)
        : h_(h), h1_(h1), reference_(reference), exec_(std::move(exec)), phi_(phi)
    {
    }
    RobustControls controls(std::size_t step, const PathState& s) const override;
    std::string name() const override { return "robust"; }
    const TimeGrid& grid() const override { return h_.grid(); }
    double phi() const noexcept { return phi_; }

private:
    const HSolution& h_;
    const RobustCorrection& h1_;
    TripletParams reference_;
    ExecutionParams exec_;
    double phi_;
};

/// Trades only pair z at its neutral speed; x and y are never traded.
class IlliquidOnlyStrategy : public Strategy {
public:
    IlliquidOnlyStrategy(const HSolution& h, ExecutionParams exec) : h_(h), exec_(std::move(exec)) {}
    RobustControls controls(std::size_t step, const PathState& s) const override;
    std::string name() const override { return "illiquid-only"; }
    const TimeGrid& grid() const override { return h_.grid(); }

private:
    const HSolution& h_;
    ExecutionParams exec_;
};

/// (zeta_x, zeta_y) with correlation rho from two independent standard normals.
std::pair<double, double> correlate(double n1, double n2, double rho) noexcept;

/// Exact log-normal step of X and Y; Z is recomputed as X / Y.
void step_rates(PathState& s, const TripletParams& statistical, double dt, double zeta_x,
                double zeta_y) noexcept;

struct ClientFill {
    Pair pair = Pair::x;
    bool client_sells = false;  // J^+ : broker inventory goes up
    double size = 0.0;
};

/// Appends this step's arrivals on one side of pair k, drawn from `rng`.
void sample_client_fills(Pair k, bool client_sells, const SideFlow& side, double dt,
                         CounterRng& rng, std::vector<ClientFill>& out);

/// Marking rate of pair k: X for x and z (Y Z = X), Y for y.
inline double marking_rate(const PathState& s, Pair k) noexcept { return k == Pair::y ? s.y : s.x; }

void apply_broker_trade(PathState& s, const PerPair<double>& speed, const ExecutionParams& exec,
                        double dt) noexcept;
void apply_client_fill(PathState& s, const ClientFill& f, const ExecutionParams& exec) noexcept;

/// sum_k Q_T^k max(khat_T (1 - a_k Q_T^k / unwind_dt), 0), in rate x lots.
double terminal_unwind(const PathState& s, const ExecutionParams& exec, double unwind_dt) noexcept;

/// Divisor of the per-lot P&L: |Q^z_0|, or 1 when Q^z_0 = 0.
double pnl_divisor(const Inventory& q0) noexcept;

/// One path; deterministic in (config.seed, path). Appends knot records to
/// `trajectory` when non-null.
PathResult run_path(const SimConfig& config, const Strategy& strategy, std::size_t path,
                    std::vector<StepRecord>* trajectory = nullptr);

}  // namespace fxtriplet
