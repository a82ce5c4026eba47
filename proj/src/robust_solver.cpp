#include "fxtriplet/robust_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fxtriplet {

double Poly1::operator()(double q) const noexcept
{
    return c[0] + q * (c[1] + q * (c[2] + q * (c[3] + q * c[4])));
}

double Poly1::derivative(double q) const noexcept
{
    return c[1] + q * (2.0 * c[2] + q * (3.0 * c[3] + q * 4.0 * c[4]));
}

namespace {

double ipow(double v, int n) noexcept
{
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= v;
    return r;
}

}  // namespace

double Poly2::operator()(double qx, double qz) const noexcept
{
    double sum = 0.0;
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; i + j <= 4; ++j) sum += c[i][j] * ipow(qx, i) * ipow(qz, j);
    return sum;
}

double Poly2::d_qx(double qx, double qz) const noexcept
{
    double sum = 0.0;
    for (int i = 1; i <= 4; ++i)
        for (int j = 0; i + j <= 4; ++j) sum += i * c[i][j] * ipow(qx, i - 1) * ipow(qz, j);
    return sum;
}

double Poly2::d_qz(double qx, double qz) const noexcept
{
    double sum = 0.0;
    for (int i = 0; i <= 3; ++i)
        for (int j = 1; i + j <= 4; ++j) sum += j * c[i][j] * ipow(qx, i) * ipow(qz, j - 1);
    return sum;
}

double Poly3::operator()(double qx, double qy, double qz) const noexcept
{
    double sum = 0.0;
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; i + j <= 2; ++j)
            for (int l = 0; l <= 2; ++l) sum += c[i][j][l] * ipow(qx, i) * ipow(qz, j) * ipow(qy, l);
    return sum;
}

double Poly3::d_qx(double qx, double qy, double qz) const noexcept
{
    double sum = 0.0;
    for (int i = 1; i <= 2; ++i)
        for (int j = 0; i + j <= 2; ++j)
            for (int l = 0; l <= 2; ++l)
                sum += i * c[i][j][l] * ipow(qx, i - 1) * ipow(qz, j) * ipow(qy, l);
    return sum;
}

double Poly3::d_qy(double qx, double qy, double qz) const noexcept
{
    double sum = 0.0;
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; i + j <= 2; ++j)
            for (int l = 1; l <= 2; ++l)
                sum += l * c[i][j][l] * ipow(qx, i) * ipow(qz, j) * ipow(qy, l - 1);
    return sum;
}

double Poly3::d_qz(double qx, double qy, double qz) const noexcept
{
    double sum = 0.0;
    for (int i = 0; i <= 1; ++i)
        for (int j = 1; i + j <= 2; ++j)
            for (int l = 0; l <= 2; ++l)
                sum += j * c[i][j][l] * ipow(qx, i) * ipow(qz, j - 1) * ipow(qy, l);
    return sum;
}

namespace {

// g(tau) = (e^{mu tau} - 1)/mu + a/alpha, so that h2/a = g'(tau)/g(tau).
// alpha = 0 forces h2 = 0 and D = 1, represented by g = 1.
double flow_g(const PairCoefficients& c, double tau)
{
    if (c.alpha == 0.0) return 1.0;
    const double growth = std::abs(c.mu) < kZeroDriftThreshold ? tau : std::expm1(c.mu * tau) / c.mu;
    return growth + c.a / c.alpha;
}

}  // namespace

AuxiliaryFlow AuxiliaryFlow::build(const HSolution& h, const FlowParams& flow,
                                   const SimpsonOptions& opt)
{
    flow.validate();
    AuxiliaryFlow out;
    out.h_ = &h;
    const TimeGrid& grid = h.grid();
    const std::size_t n = grid.steps();
    const double horizon = grid.horizon();
    SimpsonOptions local = opt;
    local.initial_panels = std::max<std::size_t>(2, opt.initial_panels / n);

    for (Pair k : kPairs) {
        const PairFlow& f = flow[k];
        auto& kap = out.kappa_[idx(k)];
        for (int j = 1; j <= 4; ++j) {
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            kap[j] = f.plus.lambda * f.plus.size.raw_moment(j) +
                     sign * f.minus.lambda * f.minus.size.raw_moment(j);
        }

        const PairCoefficients& c = h.coefficients(k);
        const H1Evaluator h1{c};
        PairTable& tab = out.table_[idx(k)];
        tab.g.resize(n + 1);
        for (auto& v : tab.s) v.assign(n + 1, 0.0);
        tab.beta.assign(n + 1, 0.0);
        for (std::size_t i = 0; i <= n; ++i) tab.g[i] = flow_g(c, horizon - grid.t(i));

        for (std::size_t i = 0; i < n; ++i) {
            const double lo = grid.t(i);
            const double hi = grid.t(i + 1);
            for (int j = 1; j <= 4; ++j) {
                double piece = hi - lo;
                if (c.alpha != 0.0) {
                    // In s = ln g, dtau = g ds / g'(tau) and g' = e^{mu tau} = 1 + mu (g - a/alpha),
                    // so the a/alpha layer at T no longer needs resolving in time.
                    const double r = c.a / c.alpha;
                    const double s_lo = std::log(flow_g(c, horizon - hi));
                    const double s_hi = std::log(flow_g(c, horizon - lo));
                    piece = integrate_simpson(
                        [&](double s) {
                            const double g = std::exp(s);
                            return std::exp((1.0 - j) * s) / (1.0 + c.mu * (g - r));
                        },
                        s_lo, s_hi, local, "auxiliary flow cumulant weight");
                }
                tab.s[j][i + 1] = tab.s[j][i] + piece;
            }
            const double bpiece = integrate_simpson(
                [&](double v) { return h1(v) / (2.0 * c.a * flow_g(c, horizon - v)); }, lo, hi,
                local, "auxiliary flow drift term");
            tab.beta[i + 1] = tab.beta[i] + bpiece;
        }
    }
    return out;
}

double AuxiliaryFlow::D(Pair k, double u, double t) const
{
    if (u < t) throw std::domain_error("AuxiliaryFlow::D requires u >= t");
    const PairCoefficients& c = h_->coefficients(k);
    const double horizon = h_->grid().horizon();
    return flow_g(c, horizon - u) / flow_g(c, horizon - t);
}

double AuxiliaryFlow::b(Pair k, double u, double t) const
{
    if (u < t) throw std::domain_error("AuxiliaryFlow::b requires u >= t");
    if (u == t) return 0.0;
    const PairCoefficients& c = h_->coefficients(k);
    const double horizon = h_->grid().horizon();
    const H1Evaluator h1{c};
    const double inner = integrate_simpson(
        [&](double s) { return h1(s) / (2.0 * c.a * flow_g(c, horizon - s)); }, t, u, {},
        "auxiliary flow drift term");
    return -flow_g(c, horizon - u) * inner;
}

double AuxiliaryFlow::D_knots(Pair k, std::size_t m, std::size_t i) const
{
    const PairTable& tab = table_[idx(k)];
    return tab.g[m] / tab.g[i];
}

double AuxiliaryFlow::b_knots(Pair k, std::size_t m, std::size_t i) const
{
    const PairTable& tab = table_[idx(k)];
    return -tab.g[m] * (tab.beta[m] - tab.beta[i]);
}

double AuxiliaryFlow::cumulant_knots(Pair k, int j, std::size_t m, std::size_t i) const
{
    if (j < 1 || j > 4) throw std::out_of_range("cumulant order must be 1..4");
    const PairTable& tab = table_[idx(k)];
    return kappa_[idx(k)][j] * ipow(tab.g[m], j) * (tab.s[j][m] - tab.s[j][i]);
}

double MomentPolynomials::moment(int n, double q) const noexcept
{
    double sum = 0.0;
    for (int j = n; j >= 0; --j) sum = sum * q + coeff[n][j];
    return sum;
}

MomentPolynomials moment_polynomials(const AuxiliaryFlow& flow, Pair k, std::size_t m,
                                     std::size_t start)
{
    static constexpr double binom[5][5] = {
        {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};

    const double d = flow.D_knots(k, m, start);
    const double b = flow.b_knots(k, m, start);
    const double k1 = flow.cumulant_knots(k, 1, m, start);
    const double k2 = flow.cumulant_knots(k, 2, m, start);
    const double k3 = flow.cumulant_knots(k, 3, m, start);
    const double k4 = flow.cumulant_knots(k, 4, m, start);

    // Raw moments of the jump part from its cumulants.
    const std::array<double, 5> mu{1.0, k1, k2 + k1 * k1, k3 + 3.0 * k2 * k1 + k1 * k1 * k1,
                                   k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 +
                                       k1 * k1 * k1 * k1};

    // E[(D q + b + M)^n] = sum_l C(n,l) mu_{n-l} sum_p C(l,p) D^p b^{l-p} q^p.
    MomentPolynomials out;
    for (int n = 0; n <= 4; ++n)
        for (int l = 0; l <= n; ++l)
            for (int p = 0; p <= l; ++p)
                out.coeff[n][p] += binom[n][l] * mu[n - l] * binom[l][p] * ipow(d, p) * ipow(b, l - p);
    return out;
}

MomentTrajectory propagate_moments(const AuxiliaryFlow& flow, Pair k, std::size_t start)
{
    const std::size_t n = flow.solution().grid().steps();
    if (start > n) throw std::out_of_range("propagate_moments: start knot beyond the grid");
    MomentTrajectory out;
    out.pair = k;
    out.start = start;
    out.by_knot.reserve(n - start + 1);
    for (std::size_t m = start; m <= n; ++m) {
        out.by_knot.push_back(moment_polynomials(flow, k, m, start));
        for (const auto& row : out.by_knot.back().coeff)
            for (double v : row)
                if (!std::isfinite(v))
                    throw std::runtime_error("propagate_moments: non-finite moment for pair " +
                                             std::string(pair_name(k)) + " at knot " +
                                             std::to_string(m));
    }
    return out;
}

H1Evaluation eval_H1(const RobustKnot& k, double x, double y, const Inventory& q)
{
    const double qx = q[0], qy = q[1], qz = q[2];
    H1Evaluation e;
    e.h11 = k.h11(qx, qz);
    e.h12 = k.h12(qy);
    e.h13 = k.h13(qx, qy, qz);
    e.value = e.h11 * x * x + e.h12 * y * y + e.h13 * x * y;
    e.d_x = 2.0 * e.h11 * x + e.h13 * y;
    e.d_y = 2.0 * e.h12 * y + e.h13 * x;
    e.d_q[0] = x * x * k.h11.d_qx(qx, qz) + x * y * k.h13.d_qx(qx, qy, qz);
    e.d_q[1] = y * y * k.h12.derivative(qy) + x * y * k.h13.d_qy(qx, qy, qz);
    e.d_q[2] = x * x * k.h11.d_qz(qx, qz) + x * y * k.h13.d_qz(qx, qy, qz);
    return e;
}

namespace {

struct ExpectedTerms {
    std::array<double, 3> first{};   // E[(1 - h1) Q - h2 Q^2]
    std::array<double, 5> second{};  // E[((1 - h1) Q - h2 Q^2)^2]
};

ExpectedTerms expected_terms(const MomentPolynomials& mp, double h1, double h2)
{
    const double s = 1.0 - h1;
    ExpectedTerms e;
    for (int j = 0; j <= 2; ++j) e.first[j] = s * mp.coeff[1][j] - h2 * mp.coeff[2][j];
    for (int j = 0; j <= 4; ++j)
        e.second[j] = s * s * mp.coeff[2][j] - 2.0 * s * h2 * mp.coeff[3][j] + h2 * h2 * mp.coeff[4][j];
    return e;
}

}  // namespace

RobustKnot compute_robust_knot(const AuxiliaryFlow& flow, const TripletParams& reference,
                               std::size_t start)
{
    const HSolution& h = flow.solution();
    const TimeGrid& grid = h.grid();
    const std::size_t n = grid.steps();
    RobustKnot out;
    if (start >= n) return out;

    const double sx = reference.sigma_x;
    const double sy = reference.sigma_y;
    const double cross = reference.rho * sx * sy;
    const double rate11 = 2.0 * reference.mu_x + sx * sx;
    const double rate12 = 2.0 * reference.mu_y + sy * sy;
    const double rate13 = reference.mu_x + reference.mu_y + cross;
    const std::vector<double> w = uniform_simpson_weights(n - start, grid.dt());
    const double t0 = grid.t(start);

    for (std::size_t m = start; m <= n; ++m) {
        const HValues& hv = h.at_knot(m);
        const ExpectedTerms ex =
            expected_terms(moment_polynomials(flow, Pair::x, m, start), hv.h1[0], hv.h2[0]);
        const ExpectedTerms ey =
            expected_terms(moment_polynomials(flow, Pair::y, m, start), hv.h1[1], hv.h2[1]);
        const ExpectedTerms ez =
            expected_terms(moment_polynomials(flow, Pair::z, m, start), hv.h1[2], hv.h2[2]);

        // E[d_x H0] over (q_x, q_z) and E[(d_x H0)^2].
        std::array<std::array<double, 3>, 3> gx{};
        Poly2 gx2;
        for (int a = 0; a <= 2; ++a) {
            gx[a][0] += ex.first[a];
            gx[0][a] += ez.first[a];
        }
        gx[0][0] -= hv.h0_x;
        for (int a = 0; a <= 4; ++a) {
            gx2.c[a][0] += ex.second[a];
            gx2.c[0][a] += ez.second[a];
        }
        gx2.c[0][0] += hv.h0_x * hv.h0_x;
        for (int a = 0; a <= 2; ++a) {
            for (int b = 0; b <= 2; ++b) gx2.c[a][b] += 2.0 * ex.first[a] * ez.first[b];
            gx2.c[a][0] -= 2.0 * hv.h0_x * ex.first[a];
            gx2.c[0][a] -= 2.0 * hv.h0_x * ez.first[a];
        }

        // E[d_y H0] over q_y and E[(d_y H0)^2].
        std::array<double, 3> gy{ey.first};
        gy[0] -= hv.h0_y;
        Poly1 gy2;
        for (int a = 0; a <= 4; ++a) gy2.c[a] = ey.second[a];
        for (int a = 0; a <= 2; ++a) gy2.c[a] -= 2.0 * hv.h0_y * ey.first[a];
        gy2.c[0] += hv.h0_y * hv.h0_y;

        const double lag = grid.t(m) - t0;
        const double wm = w[m - start];
        const double w11 = wm * std::exp(rate11 * lag) * 0.5 * sx * sx;
        const double w12 = wm * std::exp(rate12 * lag) * 0.5 * sy * sy;
        const double w13 = wm * std::exp(rate13 * lag) * cross;

        for (int a = 0; a <= 4; ++a)
            for (int b = 0; a + b <= 4; ++b) out.h11.c[a][b] -= w11 * gx2.c[a][b];
        for (int a = 0; a <= 4; ++a) out.h12.c[a] -= w12 * gy2.c[a];
        for (int a = 0; a <= 2; ++a)
            for (int b = 0; a + b <= 2; ++b)
                for (int l = 0; l <= 2; ++l) out.h13.c[a][b][l] -= w13 * gx[a][b] * gy[l];
    }
    return out;
}

RobustCorrection RobustCorrection::compute(const AuxiliaryFlow& flow,
                                           const TripletParams& reference, ExecPolicy policy)
{
    RobustCorrection out;
    out.grid_ = flow.solution().grid();
    const std::size_t knots = out.grid_.knots();
    out.knots_.resize(knots);
    if (policy == ExecPolicy::parallel) {
        // Knots are independent; each iteration writes only its own slot.
        const auto count = static_cast<long long>(knots);
#pragma omp parallel for schedule(dynamic, 8)
        for (long long i = 0; i < count; ++i) {
            const auto s = static_cast<std::size_t>(i);
            out.knots_[s] = compute_robust_knot(flow, reference, s);
        }
    } else {
        for (std::size_t i = 0; i < knots; ++i) out.knots_[i] = compute_robust_knot(flow, reference, i);
    }
    return out;
}

RobustKnot RobustCorrection::interpolate(double t) const
{
    const std::size_t n = grid_.steps();
    if (t <= 0.0) return knots_.front();
    if (t >= grid_.horizon()) return knots_.back();
    const double s = t / grid_.dt();
    const std::size_t i = std::min(static_cast<std::size_t>(s), n - 1);
    const double w = s - static_cast<double>(i);
    const RobustKnot& lo = knots_[i];
    const RobustKnot& hi = knots_[i + 1];
    RobustKnot out;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
            out.h11.c[a][b] = lo.h11.c[a][b] + w * (hi.h11.c[a][b] - lo.h11.c[a][b]);
    for (int a = 0; a < 5; ++a) out.h12.c[a] = lo.h12.c[a] + w * (hi.h12.c[a] - lo.h12.c[a]);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int l = 0; l < 3; ++l)
                out.h13.c[a][b][l] = lo.h13.c[a][b][l] + w * (hi.h13.c[a][b][l] - lo.h13.c[a][b][l]);
    return out;
}

double robust_speed(double a, double khat, double dq_H0, double dq_H1, double phi)
{
    if (!(khat > 0.0)) throw std::domain_error("robust_speed: marking rate must be > 0");
    if (!(a > 0.0)) throw ParameterError("execution.a", "frictionless pair has unbounded speed");
    return ((khat - dq_H0) - phi * dq_H1) / (2.0 * a * khat);
}

DriftAdjustment drift_adjustment(const TripletParams& reference, double x, double y,
                                 const H0Evaluation& h0, const H1Evaluation& h1, double phi)
{
    DriftAdjustment k;
    if (phi == 0.0) return k;
    const double vx = reference.sigma_x * x * (h0.d_x + phi * h1.d_x);
    const double vy = reference.sigma_y * y * (h0.d_y + phi * h1.d_y);
    k.kappa_x = -phi * (vx + reference.rho * vy);
    k.kappa_y = -phi * (reference.rho * vx + vy);
    k.kappa_z = reference.sigma_z > 0.0
                    ? (reference.sigma_x * k.kappa_x - reference.sigma_y * k.kappa_y) / reference.sigma_z
                    : 0.0;
    return k;
}

Prop6C prop6_C(double x, double y, const Inventory& q, const TripletParams& reference,
               const ExecutionParams& exec)
{
    const double xblock = exec.a[0] * x * q[0] * q[0] + exec.a[2] * x * q[2] * q[2];
    const double yblock = exec.a[1] * y * q[1] * q[1];
    Prop6C c;
    c.c_x = reference.sigma_x * xblock + reference.rho * reference.sigma_y * yblock;
    c.c_y = reference.rho * reference.sigma_x * xblock + reference.sigma_y * yblock;
    return c;
}

RobustControls robust_controls(const HValues& h, const RobustKnot* h1, const TripletParams& reference,
                               const ExecutionParams& exec, double x, double y, const Inventory& q,
                               double phi)
{
    RobustControls out;
    const bool robust = phi != 0.0 && h1 != nullptr;
    H1Evaluation e1;
    if (robust) e1 = eval_H1(*h1, x, y, q);
    for (Pair k : kPairs) {
        const std::size_t i = idx(k);
        const double khat = k == Pair::y ? y : x;
        // (khat - dq H0) / (2 a khat) written as the neutral speed so phi = 0 reproduces it exactly.
        double v = neutral_speed(exec.a[i], h.h1[i], h.h2[i], q[i]);
        if (robust) v -= phi * e1.d_q[i] / (2.0 * exec.a[i] * khat);
        out.speed[i] = v;
    }
    if (phi != 0.0) out.kappa = drift_adjustment(reference, x, y, eval_H0(h, x, y, q), e1, phi);
    return out;
}

}  // namespace fxtriplet
