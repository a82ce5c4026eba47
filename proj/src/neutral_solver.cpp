#include "fxtriplet/neutral_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fxtriplet {

namespace {

// (x - 1 + e^{-x}) / x, accurate for small |x|.
double one_minus_phi1(double x)
{
    if (std::abs(x) < 0.1) {
        double term = 1.0;
        double sum = 0.0;
        for (int n = 1; n <= 14; ++n) {
            term *= x / static_cast<double>(n + 1);
            sum += (n % 2 ? term : -term);
        }
        return sum;
    }
    return 1.0 + std::expm1(-x) / x;
}

// (1 - e^{-mu tau}) / mu, equal to tau at mu = 0.
double decay_integral(double mu, double tau)
{
    return std::abs(mu) < kZeroDriftThreshold ? tau : -std::expm1(-mu * tau) / mu;
}

double penalty_ratio(const PairCoefficients& c)
{
    return c.alpha == 0.0 ? std::numeric_limits<double>::infinity() : c.a / c.alpha;
}

}  // namespace

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps)
{
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ParameterError("simulation.T", "must be a positive finite horizon");
    if (steps == 0) throw ParameterError("simulation.dt", "grid needs at least one step");
}

TimeGrid TimeGrid::from_step(double horizon, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("simulation.dt", "must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ParameterError("simulation.T", "must be a positive finite horizon");
    const double ratio = horizon / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * n)
        throw ParameterError("simulation.dt", "must divide the horizon T");
    return TimeGrid(horizon, static_cast<std::size_t>(n));
}

PairCoefficients pair_coefficients(Pair k, const TripletParams& reference,
                                   const ExecutionParams& exec, const FlowParams& flow,
                                   double horizon)
{
    PairCoefficients c;
    c.a = exec.a[idx(k)];
    c.alpha = exec.alpha[idx(k)];
    c.mu = reference.hat_drift(k);
    c.gamma = flow.gamma_minus(k);
    c.delta = flow.delta(k);
    c.psi = flow.psi(k, exec);
    c.horizon = horizon;
    return c;
}

double H2Evaluator::operator()(double t) const
{
    const double tau = c.horizon - t;
    if (tau == 0.0) return c.alpha;
    if (std::abs(c.mu) < kZeroDriftThreshold) return 1.0 / (1.0 / c.alpha + tau / c.a);
    // a mu / (1 - v e^{-mu tau}), v = 1 - (a/alpha) mu, with mu cancelled.
    const double r = penalty_ratio(c);
    if (std::isinf(r)) return 0.0;
    return c.a / (decay_integral(c.mu, tau) + r * std::exp(-c.mu * tau));
}

double H1Evaluator::operator()(double t) const
{
    const double tau = c.horizon - t;
    if (tau == 0.0) return 0.0;
    if (std::abs(c.mu) < kZeroDriftThreshold)
        return 2.0 * c.gamma * tau / (1.0 / c.alpha + tau / c.a);
    const double r = penalty_ratio(c);
    if (std::isinf(r)) return 0.0;
    // {(1 - 2a gamma) mu (t - T) + v (1 - e^{-mu tau})} / (1 - v e^{-mu tau}), divided through by mu.
    const double g = decay_integral(c.mu, tau);
    const double e = -std::expm1(-c.mu * tau);
    const double num = 2.0 * c.a * c.gamma * tau - tau * one_minus_phi1(c.mu * tau) - r * e;
    const double den = g + r * std::exp(-c.mu * tau);
    return num / den;
}

H2Evaluator solve_h2(const PairCoefficients& c)
{
    if (!(c.a > 0.0)) throw ParameterError("execution.a", "impact must be > 0 to solve for h2");
    if (c.alpha == 0.0 && std::abs(c.mu) >= kZeroDriftThreshold)
        throw ParameterError("execution.alpha", "alpha = 0 with nonzero drift has no solution");
    return H2Evaluator{c};
}

H1Evaluator solve_h1(const PairCoefficients& c)
{
    (void)solve_h2(c);
    if (!std::isfinite(c.gamma)) throw ParameterError("flow", "non-finite order flow moments");
    return H1Evaluator{c};
}

namespace {

template <class F>
double discounted_integral(const PairCoefficients& c, double from, double to, double anchor, F&& f,
                           const SimpsonOptions& opt, const char* label)
{
    return integrate_simpson(
        [&](double u) { return std::exp(c.mu * (u - anchor)) * f(u); }, from, to, opt, label);
}

H0Components h0_components_between(const PairCoefficients& c, double from, double to,
                                    const SimpsonOptions& opt)
{
    const H2Evaluator h2{c};
    const H1Evaluator h1{c};
    H0Components out;
    if (c.psi != 0.0)
        out.fee = -discounted_integral(c, from, to, from, [&](double) { return c.psi; }, opt,
                                       "h0 fee component");
    if (c.gamma != 0.0)
        out.drift = discounted_integral(c, from, to, from, [&](double u) { return c.gamma * h1(u); },
                                        opt, "h0 drift component");
    if (c.delta != 0.0)
        out.variance = discounted_integral(
            c, from, to, from, [&](double u) { return c.delta * h2(u); }, opt,
            "h0 variance component");
    out.impact = -discounted_integral(
        c, from, to, from,
        [&](double u) {
            const double v = h1(u);
            return v * v / (4.0 * c.a);
        },
        opt, "h0 impact component");
    return out;
}

}  // namespace

H0Components h0_components(const PairCoefficients& c, double t, const SimpsonOptions& opt)
{
    if (t >= c.horizon) return {};
    return h0_components_between(c, t, c.horizon, opt);
}

H0Evaluation eval_H0(const HValues& h, double x, double y, const Inventory& q)
{
    const double qx = q[0], qy = q[1], qz = q[2];
    H0Evaluation e;
    const double gx = qx + qz - h.h0_x - h.h1[0] * qx - h.h1[2] * qz - h.h2[0] * qx * qx -
                      h.h2[2] * qz * qz;
    const double gy = qy - h.h0_y - h.h1[1] * qy - h.h2[1] * qy * qy;
    e.value = x * gx + y * gy;
    e.d_x = gx;
    e.d_y = gy;
    e.d_q[0] = x * (1.0 - h.h1[0] - 2.0 * h.h2[0] * qx);
    e.d_q[1] = y * (1.0 - h.h1[1] - 2.0 * h.h2[1] * qy);
    e.d_q[2] = x * (1.0 - h.h1[2] - 2.0 * h.h2[2] * qz);
    return e;
}

double neutral_speed(double a, double h1, double h2, double q)
{
    if (!(a > 0.0)) throw ParameterError("execution.a", "frictionless pair has unbounded speed");
    return (h1 + 2.0 * h2 * q) / (2.0 * a);
}

double twap_limit_speed(double t, double horizon, double q, double gamma)
{
    if (!(t < horizon)) throw std::domain_error("twap_limit_speed: t must be < T");
    return q / (horizon - t) + gamma;
}

HSolution HSolution::solve(const TripletParams& reference, const ExecutionParams& exec,
                           const FlowParams& flow, const TimeGrid& grid, const SimpsonOptions& opt)
{
    reference.validate();
    exec.validate();
    flow.validate();
    const SolvabilityReport report = validate_solvability(reference, exec);
    if (!report.passed()) throw ParameterError("execution.alpha", "solvability condition fails:\n" + report.describe());

    HSolution s;
    s.reference_ = reference;
    s.grid_ = grid;
    s.opt_ = opt;
    for (Pair k : kPairs) {
        s.coeff_[idx(k)] = pair_coefficients(k, reference, exec, flow, grid.horizon());
        (void)solve_h1(s.coeff_[idx(k)]);
    }

    const std::size_t n = grid.steps();
    s.table_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = grid.t(i);
        for (Pair k : kPairs) {
            s.table_[i].h2[idx(k)] = s.h2(k, t);
            s.table_[i].h1[idx(k)] = s.h1(k, t);
        }
    }

    // h0 by backward accumulation over knot intervals:
    // I(t_i) = int_{t_i}^{t_{i+1}} e^{mu(u - t_i)} f(u) du + e^{mu dt} I(t_{i+1}).
    SimpsonOptions local = opt;
    local.initial_panels = std::max<std::size_t>(2, opt.initial_panels / n);
    double acc_x = 0.0;
    double acc_y = 0.0;
    const double mu_x = reference.mu_x;
    const double mu_y = reference.mu_y;
    s.table_[n].h0_x = 0.0;
    s.table_[n].h0_y = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const double a = grid.t(i);
        const double b = grid.t(i + 1);
        const double grow_x = std::exp(mu_x * (b - a));
        const double grow_y = std::exp(mu_y * (b - a));
        acc_x = h0_components_between(s.coeff_[0], a, b, local).sum() +
                h0_components_between(s.coeff_[2], a, b, local).sum() + grow_x * acc_x;
        acc_y = h0_components_between(s.coeff_[1], a, b, local).sum() + grow_y * acc_y;
        s.table_[i].h0_x = acc_x;
        s.table_[i].h0_y = acc_y;
    }
    return s;
}

double HSolution::h0_partial(bool x_group, double t) const
{
    const double horizon = grid_.horizon();
    if (t >= horizon) return 0.0;
    t = std::max(t, 0.0);
    const std::size_t n = grid_.steps();
    auto j = static_cast<std::size_t>(std::ceil(t / grid_.dt() - 1e-12));
    j = std::min(j, n);
    const double tj = grid_.t(j);
    const double tail = x_group ? table_[j].h0_x : table_[j].h0_y;
    if (tj <= t) return tail;
    SimpsonOptions local = opt_;
    local.initial_panels = std::max<std::size_t>(2, opt_.initial_panels / n);
    double head = 0.0;
    if (x_group) {
        head = h0_components_between(coeff_[0], t, tj, local).sum() +
               h0_components_between(coeff_[2], t, tj, local).sum();
    } else {
        head = h0_components_between(coeff_[1], t, tj, local).sum();
    }
    const double mu = x_group ? reference_.mu_x : reference_.mu_y;
    return head + std::exp(mu * (tj - t)) * tail;
}

double HSolution::h0_x(double t) const { return h0_partial(true, t); }
double HSolution::h0_y(double t) const { return h0_partial(false, t); }

HValues HSolution::values(double t) const
{
    HValues v;
    for (Pair k : kPairs) {
        v.h2[idx(k)] = h2(k, t);
        v.h1[idx(k)] = h1(k, t);
    }
    v.h0_x = h0_x(t);
    v.h0_y = h0_y(t);
    return v;
}

HValues HSolution::interpolate(double t) const
{
    const std::size_t n = grid_.steps();
    if (t <= 0.0) return table_.front();
    if (t >= grid_.horizon()) return table_.back();
    const double s = t / grid_.dt();
    const std::size_t i = std::min(static_cast<std::size_t>(s), n - 1);
    const double w = s - static_cast<double>(i);
    const HValues& lo = table_[i];
    const HValues& hi = table_[i + 1];
    HValues v;
    for (std::size_t k = 0; k < 3; ++k) {
        v.h2[k] = lo.h2[k] + w * (hi.h2[k] - lo.h2[k]);
        v.h1[k] = lo.h1[k] + w * (hi.h1[k] - lo.h1[k]);
    }
    v.h0_x = lo.h0_x + w * (hi.h0_x - lo.h0_x);
    v.h0_y = lo.h0_y + w * (hi.h0_y - lo.h0_y);
    return v;
}

double HSolution::neutral_speed(Pair k, double t, double q_k) const
{
    return fxtriplet::neutral_speed(coeff_[idx(k)].a, h1(k, t), h2(k, t), q_k);
}

}  // namespace fxtriplet
