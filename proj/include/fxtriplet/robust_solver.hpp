#pragma once

// First-order ambiguity correction H1 = H11 x^2 + H12 y^2 + H13 x y.
//
// Each Hij is an expectation over independent auxiliary inventories
//
//   dQ^k = -(h1_k + 2 h2_k Q^k) / (2 a_k) du + client jumps,
//
// whose law is affine in the start value q:  Q_u = D(u,t) q + b(u,t) + M(u,t)
// with M a weighted compound Poisson integral independent of q. Raw moments
// of Q_u are therefore polynomials in q, and so is every Hij.

#include "fxtriplet/model.hpp"
#include "fxtriplet/neutral_solver.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace fxtriplet {

/// Univariate polynomial of degree <= 4.
struct Poly1 {
    std::array<double, 5> c{};
    double operator()(double q) const noexcept;
    double derivative(double q) const noexcept;
};

/// Bivariate polynomial in (q_x, q_z), total degree <= 4; c[i][j] multiplies q_x^i q_z^j.
struct Poly2 {
    std::array<std::array<double, 5>, 5> c{};
    double operator()(double qx, double qz) const noexcept;
    double d_qx(double qx, double qz) const noexcept;
    double d_qz(double qx, double qz) const noexcept;
};

/// Degree <= 2 in the (q_x, q_z) block times degree <= 2 in q_y;
/// c[i][j][l] multiplies q_x^i q_z^j q_y^l with i + j <= 2.
struct Poly3 {
    std::array<std::array<std::array<double, 3>, 3>, 3> c{};
    double operator()(double qx, double qy, double qz) const noexcept;
    double d_qx(double qx, double qy, double qz) const noexcept;
    double d_qy(double qx, double qy, double qz) const noexcept;
    double d_qz(double qx, double qy, double qz) const noexcept;
};

/// Flow of the auxiliary inventories. D and the cumulants of M are tabulated
/// on the solution grid through g(tau) = (e^{mu tau} - 1)/mu + a/alpha, for
/// which D(u,t) = g(T-u) / g(T-t).
class AuxiliaryFlow {
public:
    static AuxiliaryFlow build(const HSolution& h, const FlowParams& flow,
                               const SimpsonOptions& opt = {});

    const HSolution& solution() const noexcept { return *h_; }

    /// exp(-int_t^u h2/a ds), exact.
    double D(Pair k, double u, double t) const;
    /// -int_t^u D(u,s) h1(s)/(2a) ds by adaptive Simpson.
    double b(Pair k, double u, double t) const;

    // Grid versions, start knot i <= end knot m.
    double D_knots(Pair k, std::size_t m, std::size_t i) const;
    double b_knots(Pair k, std::size_t m, std::size_t i) const;
    /// j-th cumulant (j = 1..4) of the jump part M(u_m, t_i).
    double cumulant_knots(Pair k, int j, std::size_t m, std::size_t i) const;

    /// lambda+ E[xi+^j] + (-1)^j lambda- E[xi-^j], j = 0..4 (entry 0 unused).
    const std::array<double, 5>& jump_cumulant_rates(Pair k) const noexcept
    {
        return kappa_[idx(k)];
    }

private:
    struct PairTable {
        std::vector<double> g;                   // g(T - t_i)
        std::array<std::vector<double>, 5> s;    // s[j][i] = int_0^{t_i} g(T-v)^{-j} dv
        std::vector<double> beta;                // int_0^{t_i} h1/(2 a g(T-v)) dv
    };

    const HSolution* h_ = nullptr;
    PerPair<std::array<double, 5>> kappa_{};
    PerPair<PairTable> table_{};
};

/// Raw moments m_0..m_4 of Q^k_{u_m} started at (t_i, q), as polynomials in q:
/// m_n(q) = sum_j coeff[n][j] q^j.
struct MomentPolynomials {
    std::array<std::array<double, 5>, 5> coeff{};
    double moment(int n, double q) const noexcept;
};

struct MomentTrajectory {
    Pair pair = Pair::x;
    std::size_t start = 0;                 // knot index of t
    std::vector<MomentPolynomials> by_knot;  // entry m - start for knot m

    const MomentPolynomials& at(std::size_t m) const { return by_knot.at(m - start); }
};

MomentPolynomials moment_polynomials(const AuxiliaryFlow& flow, Pair k, std::size_t m,
                                     std::size_t start);
MomentTrajectory propagate_moments(const AuxiliaryFlow& flow, Pair k, std::size_t start);

/// H11, H12, H13 at one knot.
struct RobustKnot {
    Poly2 h11;
    Poly1 h12;
    Poly3 h13;
};

struct H1Evaluation {
    double h11 = 0.0;
    double h12 = 0.0;
    double h13 = 0.0;
    double value = 0.0;
    double d_x = 0.0;     // 2 H11 x + H13 y
    double d_y = 0.0;     // 2 H12 y + H13 x
    Inventory d_q{};
};

H1Evaluation eval_H1(const RobustKnot& k, double x, double y, const Inventory& q);

enum class ExecPolicy { serial, parallel };

/// Hij at knot `start`, with the outer time integral by composite Simpson on the grid.
RobustKnot compute_robust_knot(const AuxiliaryFlow& flow, const TripletParams& reference,
                               std::size_t start);

class RobustCorrection {
public:
    static RobustCorrection compute(const AuxiliaryFlow& flow, const TripletParams& reference,
                                    ExecPolicy policy = ExecPolicy::parallel);

    const TimeGrid& grid() const noexcept { return grid_; }
    const RobustKnot& at_knot(std::size_t i) const { return knots_.at(i); }
    std::size_t size() const noexcept { return knots_.size(); }
    /// Coefficient-wise linear interpolation between knots.
    RobustKnot interpolate(double t) const;

    H1Evaluation eval(double t, double x, double y, const Inventory& q) const
    {
        return eval_H1(interpolate(t), x, y, q);
    }

private:
    TimeGrid grid_{};
    std::vector<RobustKnot> knots_;
};

/// [(khat - dq_H0) - phi dq_H1] / (2 a khat); khat must be > 0.
double robust_speed(double a, double khat, double dq_H0, double dq_H1, double phi);

struct DriftAdjustment {
    double kappa_x = 0.0;
    double kappa_y = 0.0;
    double kappa_z = 0.0;  // (sigma_x kappa_x - sigma_y kappa_y) / sigma_z
};

/// -phi [[1, rho], [rho, 1]] (sigma_x x (dH0_x + phi dH1_x), sigma_y y (dH0_y + phi dH1_y)).
DriftAdjustment drift_adjustment(const TripletParams& reference, double x, double y,
                                 const H0Evaluation& h0, const H1Evaluation& h1, double phi);

struct Prop6C {
    double c_x = 0.0;
    double c_y = 0.0;
};

/// Near-horizon cross-effect coefficients of the robust speed.
Prop6C prop6_C(double x, double y, const Inventory& q, const TripletParams& reference,
               const ExecutionParams& exec);

/// Speeds and drift adjustments of the truncated robust controls at one state.
struct RobustControls {
    PerPair<double> speed{};
    DriftAdjustment kappa{};
};

RobustControls robust_controls(const HValues& h, const RobustKnot* h1, const TripletParams& reference,
                               const ExecutionParams& exec, double x, double y, const Inventory& q,
                               double phi);

}  // namespace fxtriplet
