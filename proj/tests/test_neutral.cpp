#include "fxtriplet/config.hpp"
#include "fxtriplet/neutral_solver.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fxtriplet;

namespace {

PairCoefficients coeffs(double a, double alpha, double mu, double gamma = 0.0, double horizon = 1.0)
{
    PairCoefficients c;
    c.a = a;
    c.alpha = alpha;
    c.mu = mu;
    c.gamma = gamma;
    c.horizon = horizon;
    return c;
}

std::vector<double> descending_grid(double horizon, int n)
{
    std::vector<double> t;
    for (int i = n; i >= 0; --i) t.push_back(horizon * i / n);
    return t;
}

}  // namespace

TEST_CASE("h2 terminal condition on both branches")
{
    for (double mu : {0.0, 1e-13, -6.491659e-4, 0.2})
        CHECK(solve_h2(coeffs(5e-8, 0.05, mu))(1.0) == 0.05);
}

TEST_CASE("h2 with zero drift against RK4")
{
    const PairCoefficients c = coeffs(5e-8, 0.05, 0.0);
    const double h = solve_h2(c)(0.0);
    CHECK(h == doctest::Approx(1.0 / (20.0 + 2e7)).epsilon(1e-14));
    CHECK(h == doctest::Approx(4.99999500e-8).epsilon(1e-8));
    const auto ref = oracle::CoefficientRk4{c}.solve({0.0});
    CHECK(oracle::rel_diff(h, ref[0][0], 0.0) <= 1e-10);
}

TEST_CASE("h2 with statistical drift against RK4 on 11 points")
{
    const PairCoefficients c = coeffs(5e-8, 0.05, -6.491659e-4);
    const auto times = descending_grid(1.0, 10);
    const auto ref = oracle::CoefficientRk4{c}.solve(times);
    const H2Evaluator h2 = solve_h2(c);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(oracle::rel_diff(h2(times[i]), ref[i][0], 0.0) <= 1e-10);
}

TEST_CASE("h1 closed form")
{
    SUBCASE("terminal value") { CHECK(solve_h1(coeffs(0.01, 1.0, 0.3, 2.0))(1.0) == 0.0); }
    SUBCASE("symmetric flow without drift vanishes")
    {
        const H1Evaluator h1 = solve_h1(coeffs(1e-7, 0.1, 0.0, 0.0));
        for (double t : {0.0, 0.25, 0.999, 1.0}) CHECK(h1(t) == 0.0);
    }
    SUBCASE("one-sided flow example")
    {
        const PairCoefficients c = coeffs(0.01, 1.0, 0.0, 1.0);
        const double v = solve_h1(c)(0.5);
        CHECK(v == doctest::Approx(1.0 / 51.0).epsilon(1e-14));
        const auto ref = oracle::CoefficientRk4{c}.solve({0.5});
        CHECK(oracle::rel_diff(v, ref[0][1], 0.0) <= 1e-10);
    }
}

TEST_CASE("closed forms agree with RK4 for random admissible parameters")
{
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const oracle::RandomProblem p = oracle::random_problem(rng, trial % 7 == 0);
        const TimeGrid grid(p.horizon, 100);
        const HSolution h = HSolution::solve(p.reference, p.exec, p.flow, grid);
        const auto times = descending_grid(p.horizon, 100);
        std::array<std::vector<oracle::CoefficientRk4::State>, 3> ref;
        for (Pair k : kPairs) ref[idx(k)] = oracle::CoefficientRk4{h.coefficients(k)}.solve(times);
        for (Pair k : kPairs) {
            double s2 = 0.0, s1 = 0.0;
            for (const auto& r : ref[idx(k)]) {
                s2 = std::max(s2, std::abs(r[0]));
                s1 = std::max(s1, std::abs(r[1]));
            }
            for (std::size_t j = 0; j < times.size(); ++j) {
                const std::size_t knot = grid.steps() - j;
                const HValues& v = h.at_knot(knot);
                CHECK(oracle::rel_diff(v.h2[idx(k)], ref[idx(k)][j][0], 1e-6 * s2) <= 1e-8);
                CHECK(oracle::rel_diff(v.h1[idx(k)], ref[idx(k)][j][1], 1e-6 * s1 + 1e-300) <= 1e-8);
            }
        }
        double sx = 0.0, sy = 0.0;
        for (std::size_t j = 0; j < times.size(); ++j) {
            sx = std::max(sx, std::abs(ref[0][j][2] + ref[2][j][2]));
            sy = std::max(sy, std::abs(ref[1][j][2]));
        }
        for (std::size_t j = 0; j < times.size(); ++j) {
            const HValues& v = h.at_knot(grid.steps() - j);
            CHECK(oracle::rel_diff(v.h0_x, ref[0][j][2] + ref[2][j][2], 1e-6 * sx + 1e-300) <= 1e-8);
            CHECK(oracle::rel_diff(v.h0_y, ref[1][j][2], 1e-6 * sy + 1e-300) <= 1e-8);
        }
    }
}

TEST_CASE("zero-drift branch is continuous")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const oracle::RandomProblem p = oracle::random_problem(rng, true);
        PairCoefficients c0 = pair_coefficients(Pair::x, p.reference, p.exec, p.flow, p.horizon);
        for (double mu : {1e-12, 1.01e-14, -1e-12}) {
            PairCoefficients c1 = c0;
            c1.mu = mu;
            for (double t : descending_grid(p.horizon, 50)) {
                const double a2 = solve_h2(c0)(t), b2 = solve_h2(c1)(t);
                CHECK(std::abs(a2 - b2) <= 1e-9 * std::abs(a2));
                // The drift feeds h1 through mu (1 - h1); over the horizon that source is
                // worth at most |mu| T, which can dominate a flow-driven h1 of ~1e-4.
                const double a1 = solve_h1(c0)(t), b1 = solve_h1(c1)(t);
                CHECK(std::abs(a1 - b1) <= 1e-9 * std::abs(a1) + std::abs(mu) * p.horizon);
            }
        }
    }
}

TEST_CASE("solver rejects degenerate pairs")
{
    const RunConfig c = default_config();
    const TimeGrid grid(1.0, 1000);
    ExecutionParams e = c.sim.exec;
    e.a[0] = 0.0;
    CHECK_THROWS_AS(HSolution::solve(c.reference, e, c.sim.flow, grid), ParameterError);

    TripletParams drifting = c.sim.statistical;
    e = c.sim.exec;
    e.alpha[1] = 0.0;
    CHECK_THROWS_AS(HSolution::solve(drifting, e, c.sim.flow, grid), ParameterError);

    e = c.sim.exec;
    drifting.mu_x = 10.0 * e.alpha[2] / e.a[2];
    CHECK_THROWS_AS(HSolution::solve(drifting, e, c.sim.flow, grid), ParameterError);

    CHECK_THROWS_AS(neutral_speed(0.0, 0.0, 1.0, 1.0), ParameterError);
}

TEST_CASE("h0 terminal and trivial cases")
{
    const RunConfig c = default_config();
    const HSolution h = HSolution::solve(c.reference, c.sim.exec, c.sim.flow, TimeGrid(1.0, 1000));
    CHECK(h.at_knot(1000).h0_x == 0.0);
    CHECK(h.at_knot(1000).h0_y == 0.0);
    CHECK(h.h0_x(1.0) == 0.0);

    const HSolution quiet = HSolution::solve(c.reference, c.sim.exec, FlowParams::none(), TimeGrid(1.0, 100));
    for (std::size_t i = 0; i <= 100; ++i) {
        CHECK(quiet.at_knot(i).h0_x == 0.0);
        CHECK(quiet.at_knot(i).h0_y == 0.0);
        for (double v : quiet.at_knot(i).h1) CHECK(v == 0.0);
    }
}

TEST_CASE("h0 at the study defaults against a graded trapezoid")
{
    const RunConfig c = default_config();
    const HSolution h = HSolution::solve(c.reference, c.sim.exec, c.sim.flow, TimeGrid(1.0, 1000));
    // tau = e^s - r concentrates nodes in the terminal layer of width r = a/alpha.
    auto graded = [&](Pair k, std::size_t n) {
        const PairCoefficients& p = h.coefficients(k);
        const double r = p.a / p.alpha;
        const double s0 = std::log(r), s1 = std::log(r + p.horizon);
        const double ds = (s1 - s0) / static_cast<double>(n);
        const H2Evaluator h2{p};
        const H1Evaluator h1{p};
        auto f = [&](double s) {
            const double tau = std::max(std::exp(s) - r, 0.0);
            const double t = p.horizon - tau;
            const double g1 = h1(t), g2 = h2(t);
            return std::exp(p.mu * tau) * (-p.psi + p.gamma * g1 + p.delta * g2 - g1 * g1 / (4.0 * p.a)) *
                   (tau + r);
        };
        double sum = 0.5 * (f(s0) + f(s1));
        for (std::size_t i = 1; i < n; ++i) sum += f(s0 + ds * static_cast<double>(i));
        return sum * ds;
    };
    auto oracle_h0 = [&](Pair k) {
        const double coarse = graded(k, 100000), fine = graded(k, 200000);
        return (4.0 * fine - coarse) / 3.0;
    };
    const double want_x = oracle_h0(Pair::x) + oracle_h0(Pair::z);
    const double want_y = oracle_h0(Pair::y);
    CHECK(oracle::rel_diff(h.at_knot(0).h0_x, want_x, 0.0) <= 1e-8);
    CHECK(oracle::rel_diff(h.at_knot(0).h0_y, want_y, 0.0) <= 1e-8);
    CHECK(oracle::rel_diff(h.h0_x(0.0), want_x, 0.0) <= 1e-8);
    CHECK(oracle::rel_diff(h.h0_y(0.0), want_y, 0.0) <= 1e-8);

    // Tightening the quadrature does not move the table.
    SimpsonOptions tight;
    tight.rel_tol = 1e-13;
    const HSolution fine = HSolution::solve(c.reference, c.sim.exec, c.sim.flow, TimeGrid(1.0, 1000), tight);
    for (std::size_t i = 0; i < 1000; i += 37) {
        CHECK(oracle::rel_diff(h.at_knot(i).h0_x, fine.at_knot(i).h0_x, 0.0) <= 1e-8);
        CHECK(oracle::rel_diff(h.at_knot(i).h0_y, fine.at_knot(i).h0_y, 0.0) <= 1e-8);
    }
}

TEST_CASE("tabulated knots equal exact evaluation")
{
    const RunConfig c = default_config();
    const HSolution h = HSolution::solve(c.sim.statistical, c.sim.exec, c.sim.flow, TimeGrid(1.0, 1000));
    for (std::size_t i : {0u, 1u, 500u, 999u, 1000u}) {
        const double t = h.grid().t(i);
        const HValues e = h.values(t);
        for (Pair k : kPairs) {
            CHECK(h.at_knot(i).h2[idx(k)] == e.h2[idx(k)]);
            CHECK(h.at_knot(i).h1[idx(k)] == e.h1[idx(k)]);
        }
        CHECK(oracle::rel_diff(h.at_knot(i).h0_x, e.h0_x, 1e-300) <= 1e-9);
        const HValues in = h.interpolate(t);
        CHECK(in.h2[2] == h.at_knot(i).h2[2]);
    }
    const HValues mid = h.interpolate(0.0005);
    CHECK(mid.h2[0] == doctest::Approx(0.5 * (h.at_knot(0).h2[0] + h.at_knot(1).h2[0])));
}

TEST_CASE("neutral speed")
{
    const RunConfig c = default_config();
    const HSolution h = HSolution::solve(c.reference, c.sim.exec, c.sim.flow, TimeGrid(1.0, 1000));
    CHECK(h.neutral_speed(Pair::x, 0.3, 0.0) == 0.0);

    // pair z at the defaults: h2(0) q / a with h2 from the RK4 oracle
    const auto ref = oracle::CoefficientRk4{h.coefficients(Pair::z)}.solve({0.0});
    const double want = (ref[0][1] + 2.0 * ref[0][0] * 200.0) / (2.0 * 1e-7);
    CHECK(oracle::rel_diff(h.neutral_speed(Pair::z, 0.0, 200.0), want, 0.0) <= 1e-8);

    // large penalty, no flow: TWAP
    const HSolution quiet = HSolution::solve(c.reference, c.sim.exec, FlowParams::none(), TimeGrid(1.0, 1000));
    CHECK(quiet.neutral_speed(Pair::z, 0.0, 200.0) == doctest::Approx(200.0).epsilon(1e-5));
    CHECK(quiet.neutral_speed(Pair::x, 0.5, -50.0) == doctest::Approx(-100.0).epsilon(1e-5));
}

TEST_CASE("large-penalty limit near the horizon")
{
    RunConfig c = default_config();
    FlowParams f = c.sim.flow;
    f[Pair::z].plus.lambda = 9.0;  // gamma = 9 * 10 - 6 * 10 = 30
    const HSolution h = HSolution::solve(c.reference, c.sim.exec, f, TimeGrid(1.0, 1000));
    const double gamma = f.gamma_minus(Pair::z);
    CHECK(gamma == 30.0);
    for (double tau : {0.05, 0.02, 0.01}) {
        const double t = 1.0 - tau;
        for (double q : {200.0, -80.0, 5.0}) {
            const double lead = twap_limit_speed(t, 1.0, q, gamma);
            CHECK(h.neutral_speed(Pair::z, t, q) == doctest::Approx(lead).epsilon(1e-3));
        }
    }
}

TEST_CASE("TWAP limit speed")
{
    CHECK(twap_limit_speed(0.0, 1.0, 200.0, 0.0) == 200.0);
    CHECK(twap_limit_speed(0.3, 1.0, 0.0, 0.0) == 0.0);
    CHECK(twap_limit_speed(0.75, 1.0, 100.0, 1.0) == 401.0);
    CHECK_THROWS_AS(twap_limit_speed(1.0, 1.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("H0 value and partials")
{
    const RunConfig c = default_config();
    SUBCASE("zero inventory without flow or drift")
    {
        const HSolution h = HSolution::solve(c.reference, c.sim.exec, FlowParams::none(), TimeGrid(1.0, 10));
        const H0Evaluation e = h.eval_H0(0.3, 0.7459, 0.7678, {0, 0, 0});
        CHECK(e.value == 0.0);
        CHECK(e.d_x == 0.0);
    }
    SUBCASE("terminal value")
    {
        const HSolution h = HSolution::solve(c.reference, c.sim.exec, c.sim.flow, TimeGrid(1.0, 10));
        const double x = 0.74, y = 0.77;
        const Inventory q{3.0, -2.0, 50.0};
        const auto& al = c.sim.exec.alpha;
        const double want = x * q[0] * (1 - al[0] * q[0]) + y * q[1] * (1 - al[1] * q[1]) +
                            x * q[2] * (1 - al[2] * q[2]);
        CHECK(h.eval_H0(1.0, x, y, q).value == doctest::Approx(want).epsilon(1e-15));
    }
    SUBCASE("partials by central differences")
    {
        const HSolution h = HSolution::solve(c.sim.statistical, c.sim.exec, c.sim.flow, TimeGrid(1.0, 10));
        const double x = 0.7459, y = 0.7678;
        const Inventory q{0.0, 0.0, 100.0};
        const double t = 0.5;
        const H0Evaluation e = h.eval_H0(t, x, y, q);
        const double step = 1e-4;
        for (std::size_t k = 0; k < 3; ++k) {
            Inventory up = q, dn = q;
            up[k] += step;
            dn[k] -= step;
            const double fd = (h.eval_H0(t, x, y, up).value - h.eval_H0(t, x, y, dn).value) / (2 * step);
            CHECK(oracle::rel_diff(e.d_q[k], fd, 1e-300) <= 1e-6);
        }
        const double fx = (h.eval_H0(t, x + 1e-6, y, q).value - h.eval_H0(t, x - 1e-6, y, q).value) / 2e-6;
        const double fy = (h.eval_H0(t, x, y + 1e-6, q).value - h.eval_H0(t, x, y - 1e-6, q).value) / 2e-6;
        CHECK(oracle::rel_diff(e.d_x, fx, 1e-300) <= 1e-6);
        CHECK(oracle::rel_diff(e.d_y, fy, 1e-12) <= 1e-6);
        // dq_z H0 = x (1 - h1_z - 2 h2_z q_z)
        const HValues v = h.values(t);
        CHECK(e.d_q[2] == doctest::Approx(x * (1 - v.h1[2] - 2 * v.h2[2] * q[2])).epsilon(1e-15));
    }
}

TEST_CASE("time grid")
{
    const TimeGrid g = TimeGrid::from_step(1.0, 1e-3);
    CHECK(g.steps() == 1000);
    CHECK(g.t(1000) == 1.0);
    CHECK(g.t(500) == 0.5);
    CHECK_THROWS_AS(TimeGrid::from_step(1.0, 0.3), ParameterError);
    CHECK_THROWS_AS(TimeGrid::from_step(1.0, 0.0), ParameterError);
}
