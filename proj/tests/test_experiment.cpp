#include "fxtriplet/config.hpp"
#include "fxtriplet/experiment.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace fxtriplet;

namespace {

RunConfig small_config(std::size_t paths)
{
    RunConfig c = default_config();
    c.sim.n_paths = paths;
    return c;
}

}  // namespace

TEST_CASE("summary statistics")
{
    const PnLStats s = pnl_stats({4.0, 1.0, 3.0, 2.0, 5.0});
    CHECK(s.count == 5);
    CHECK(s.mean == 3.0);
    CHECK(s.std == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
    CHECK(s.se_mean == doctest::Approx(std::sqrt(2.5 / 5)).epsilon(1e-15));
    CHECK(s.median == 3.0);
    CHECK(s.p05 == 1.0);
    CHECK(s.p95 == 5.0);

    const PnLStats one = pnl_stats({7.0});
    CHECK(one.mean == 7.0);
    CHECK(one.std == 0.0);
}

TEST_CASE("nearest-rank percentiles")
{
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(nearest_rank(v, 5.0) == 5.0);
    CHECK(nearest_rank(v, 50.0) == 50.0);
    CHECK(nearest_rank(v, 50.5) == 51.0);
    CHECK(nearest_rank(v, 0.0) == 1.0);
    CHECK(nearest_rank(v, 100.0) == 100.0);
    CHECK(nearest_rank({2.0, 9.0}, 50.0) == 2.0);
}

TEST_CASE("a strategy compared with itself improves nothing")
{
    const RunConfig c = small_config(40);
    const BatchResult a = run_batch(c, StrategySpec{StrategySpec::Kind::robust, 0.1});
    const BatchResult b = run_batch(c, StrategySpec{StrategySpec::Kind::robust, 0.1});
    const ImprovementStats s = compare_strategies(a, b);
    CHECK(s.mean_diff == 0.0);
    CHECK(s.se_diff == 0.0);
    for (double d : s.delta) CHECK(d == 0.0);
    CHECK_FALSE(s.sharpe_defined);
    CHECK(std::isnan(s.sharpe));
    CHECK(s.exceedance(0.0) == 0.0);

    BatchResult shorter = b;
    shorter.pnl_per_lot.pop_back();
    CHECK_THROWS_AS(compare_strategies(a, shorter), std::invalid_argument);
}

TEST_CASE("improvement statistics by hand")
{
    BatchResult base, alt;
    base.pnl_per_lot = {100.0, 200.0, 400.0, 50.0};
    alt.pnl_per_lot = {101.0, 198.0, 404.0, 50.5};
    const ImprovementStats s = compare_strategies(base, alt);
    const std::vector<double> want{0.01, -0.01, 0.01, 0.01};
    for (std::size_t i = 0; i < 4; ++i) CHECK(s.delta[i] == doctest::Approx(want[i]).epsilon(1e-12));
    CHECK(s.mean_diff == doctest::Approx((1.0 - 2.0 + 4.0 + 0.5) / 4));
    CHECK(s.delta_mean == doctest::Approx(0.005));
    CHECK(s.delta_std == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(s.sharpe == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.p_positive == 0.75);
    CHECK(s.exceedance(0.5) == 0.75);
    CHECK(s.exceedance(1.5) == 0.0);
    CHECK(s.delta_median == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("paired std difference standard error")
{
    const std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8};
    CHECK(paired_std_difference_se(a, a) == 0.0);
    std::vector<double> b = a;
    for (double& v : b) v *= 2.0;
    CHECK(paired_std_difference_se(a, b) > 0.0);
}

TEST_CASE("serial and parallel batches agree bitwise")
{
    const RunConfig c = small_config(130);
    BatchOptions serial;
    serial.policy = ExecPolicy::serial;
    serial.aggregate = true;
    BatchOptions parallel = serial;
    parallel.policy = ExecPolicy::parallel;
    const BatchResult a = run_batch(c, StrategySpec{StrategySpec::Kind::robust, 0.1}, serial);
    const BatchResult b = run_batch(c, StrategySpec{StrategySpec::Kind::robust, 0.1}, parallel);
    CHECK(a.pnl_per_lot == b.pnl_per_lot);
    CHECK(a.stats.mean == b.stats.mean);
    CHECK(a.stats.std == b.stats.std);
    REQUIRE(a.aggregate);
    REQUIRE(b.aggregate);
    for (std::size_t k = 0; k < a.aggregate->knots(); k += 97)
        for (std::size_t f = 0; f < kTrajectoryFields; ++f) CHECK(a.aggregate->mean(k, f) == b.aggregate->mean(k, f));
}

TEST_CASE("single-path aggregate equals the path")
{
    const RunConfig c = small_config(1);
    BatchOptions opt;
    opt.aggregate = true;
    opt.record_paths = 1;
    const BatchResult b = run_batch(c, StrategySpec{StrategySpec::Kind::robust, 0.1}, opt);
    REQUIRE(b.recorded.size() == 1);
    const auto& path = b.recorded.front();
    REQUIRE(b.aggregate->knots() == path.size());
    for (std::size_t k = 0; k < path.size(); k += 50) {
        CHECK(b.aggregate->mean(k, 0) == path[k].x);
        CHECK(b.aggregate->mean(k, 5) == path[k].q[2]);
        CHECK(b.aggregate->mean(k, 8) == path[k].speed[2]);
    }
}

TEST_CASE("a silent book with no inventory earns exactly zero")
{
    RunConfig c = small_config(1);
    c.sim.flow = FlowParams::none();
    c.sim.q0 = {0, 0, 0};
    const BatchResult b = run_batch(c, StrategySpec{StrategySpec::Kind::robust, 0.1});
    CHECK(b.stats.mean == 0.0);
    CHECK(b.stats.std == 0.0);
}

TEST_CASE("phi sweep")
{
    const RunConfig c = small_config(30);
    SUBCASE("baseline-only grid leaves Sharpe undefined")
    {
        const PhiSweepResult r = phi_sweep(c, {0.0});
        REQUIRE(r.rows.size() == 1);
        CHECK_FALSE(r.rows[0].improvement.sharpe_defined);
        CHECK(r.rows[0].improvement.mean_diff == 0.0);
    }
    SUBCASE("reproducible and consistent with single batches")
    {
        const PhiSweepResult a = phi_sweep(c, {0.0, 1.0});
        const PhiSweepResult b = phi_sweep(c, {0.0, 1.0});
        REQUIRE(a.rows.size() == 2);
        CHECK(a.rows[1].stats.mean == b.rows[1].stats.mean);
        CHECK(a.rows[1].improvement.sharpe == b.rows[1].improvement.sharpe);
        const BatchResult one = run_batch(c, StrategySpec{StrategySpec::Kind::robust, 1.0});
        CHECK(one.stats.mean == a.rows[1].stats.mean);
        const BatchResult zero = run_batch(c, StrategySpec{StrategySpec::Kind::neutral, 0.0});
        CHECK(zero.stats.mean == a.rows[0].stats.mean);
    }
}

TEST_CASE("penalty sweep removes client flow and scales alpha")
{
    const RunConfig c = small_config(8);
    const auto rows = penalty_sweep(c, {1.0, 1e6}, 0.1);
    REQUIRE(rows.size() == 2);
    // stronger terminal penalty leaves less to unwind
    CHECK(std::abs(rows[1].batch.mean_terminal_q[2]) < std::abs(rows[0].batch.mean_terminal_q[2]));
    CHECK(std::abs(rows[1].batch.mean_terminal_q[2]) <= 1e-3);
    CHECK(rows[0].batch.mean_unwind_per_lot > 0.0);
}

TEST_CASE("strategy names")
{
    CHECK(StrategySpec::parse("illiquid-only", 0.3).kind == StrategySpec::Kind::illiquid_only);
    CHECK(StrategySpec::parse("neutral", 0.3).phi == 0.0);
    CHECK(StrategySpec::parse("robust", 0.3).phi == 0.3);
    CHECK_THROWS_AS(StrategySpec::parse("greedy", 0.0), ParameterError);
}

TEST_CASE("default grids")
{
    const auto phi = default_phi_grid();
    CHECK(phi.front() == 0.0);
    CHECK(std::is_sorted(phi.begin(), phi.end()));
    const auto alpha = default_alpha_grid();
    CHECK(std::find(alpha.begin(), alpha.end(), 1.0) != alpha.end());
    CHECK(std::find(alpha.begin(), alpha.end(), 1e6) != alpha.end());
}
