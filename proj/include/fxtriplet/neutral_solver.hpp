#pragma once

// Ambiguity-neutral value function
//
//   H0(t, x, y, q) = x (q_x + q_z) + y q_y - h0_x x - h0_y y
//                    - h1_x x q_x - h1_y y q_y - h1_z x q_z
//                    - h2_x x q_x^2 - h2_y y q_y^2 - h2_z x q_z^2
//
// h2 and h1 are closed forms of their Riccati / linear ODEs; h0 is a sum of
// four quadratures per pair. Pair z is marked with X, so its coefficient
// functions use mu_x and its h0 contribution is carried by h0_x.

#include "fxtriplet/model.hpp"
#include "fxtriplet/quadrature.hpp"

#include <cstddef>
#include <vector>

namespace fxtriplet {

/// Uniform grid t_i = T i / n, i = 0..n.
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double horizon, std::size_t steps);
    /// Throws ParameterError unless dt divides horizon.
    static TimeGrid from_step(double horizon, double dt);

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t knots() const noexcept { return steps_ + 1; }
    double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
    double t(std::size_t i) const noexcept
    {
        return i == steps_ ? horizon_ : horizon_ * static_cast<double>(i) / static_cast<double>(steps_);
    }

private:
    double horizon_ = 1.0;
    std::size_t steps_ = 1;
};

/// Constants that enter the coefficient ODEs of one pair.
struct PairCoefficients {
    double a = 0.0;
    double alpha = 0.0;
    double mu = 0.0;        // drift of the marking rate
    double gamma = 0.0;     // lambda+ theta+ - lambda- theta-
    double delta = 0.0;     // lambda+ eta+ + lambda- eta-
    double psi = 0.0;       // fee income rate
    double horizon = 1.0;
};

PairCoefficients pair_coefficients(Pair k, const TripletParams& reference,
                                   const ExecutionParams& exec, const FlowParams& flow,
                                   double horizon);

/// |mu| below this selects the mu = 0 branch of the closed forms.
inline constexpr double kZeroDriftThreshold = 1e-14;

struct H2Evaluator {
    PairCoefficients c;
    double operator()(double t) const;
};

struct H1Evaluator {
    PairCoefficients c;
    double operator()(double t) const;
};

H2Evaluator solve_h2(const PairCoefficients& c);
H1Evaluator solve_h1(const PairCoefficients& c);

/// The four quadrature components of one pair's contribution to h0 at time t.
struct H0Components {
    double fee = 0.0;        // -int e^{mu(u-t)} psi
    double drift = 0.0;      //  int e^{mu(u-t)} gamma h1
    double variance = 0.0;   //  int e^{mu(u-t)} delta h2
    double impact = 0.0;     // -int e^{mu(u-t)} h1^2 / (4a)
    double sum() const noexcept { return fee + drift + variance + impact; }
};

H0Components h0_components(const PairCoefficients& c, double t, const SimpsonOptions& opt = {});

struct H0Evaluation {
    double value = 0.0;
    double d_x = 0.0;
    double d_y = 0.0;
    Inventory d_q{};
};

/// Coefficient values at one instant.
struct HValues {
    PerPair<double> h2{};
    PerPair<double> h1{};
    double h0_x = 0.0;
    double h0_y = 0.0;
};

H0Evaluation eval_H0(const HValues& h, double x, double y, const Inventory& q);

/// (h1 + 2 h2 q) / (2a); a must be > 0.
double neutral_speed(double a, double h1, double h2, double q);

/// Leading-order large-penalty speed q / (T - t) + gamma; requires t < T.
double twap_limit_speed(double t, double horizon, double q, double gamma);

class HSolution {
public:
    /// Throws ParameterError when a_k <= 0, when alpha_k = 0 with nonzero drift,
    /// or when the solvability condition fails.
    static HSolution solve(const TripletParams& reference, const ExecutionParams& exec,
                           const FlowParams& flow, const TimeGrid& grid,
                           const SimpsonOptions& opt = {});

    const TimeGrid& grid() const noexcept { return grid_; }
    const PairCoefficients& coefficients(Pair k) const noexcept { return coeff_[idx(k)]; }
    const TripletParams& reference() const noexcept { return reference_; }

    // Exact evaluation at arbitrary t in [0, T].
    double h2(Pair k, double t) const { return H2Evaluator{coeff_[idx(k)]}(t); }
    double h1(Pair k, double t) const { return H1Evaluator{coeff_[idx(k)]}(t); }
    double h0_x(double t) const;
    double h0_y(double t) const;
    HValues values(double t) const;

    // Tabulated values at knot i (exact there).
    const HValues& at_knot(std::size_t i) const { return table_.at(i); }
    /// Linear interpolation between knots.
    HValues interpolate(double t) const;

    H0Evaluation eval_H0(double t, double x, double y, const Inventory& q) const
    {
        return fxtriplet::eval_H0(values(t), x, y, q);
    }
    double neutral_speed(Pair k, double t, double q_k) const;

private:
    double h0_partial(bool x_group, double t) const;

    TripletParams reference_{};
    TimeGrid grid_{};
    SimpsonOptions opt_{};
    PerPair<PairCoefficients> coeff_{};
    std::vector<HValues> table_;
};

}  // namespace fxtriplet
