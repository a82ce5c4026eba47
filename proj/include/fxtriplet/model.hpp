#pragma once

// Parameter bundles for the currency triplet X = (2,1), Y = (3,1), Z = (2,3).
//
// Time is measured in hours, inventory in lots and rates in units of the
// quote currency. Z is never an independent state: Z = X / Y, so its drift
// and volatility are always derived from the (X, Y) parameters.

#include <array>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fxtriplet {

enum class Pair : std::size_t { x = 0, y = 1, z = 2 };

inline constexpr std::array<Pair, 3> kPairs{Pair::x, Pair::y, Pair::z};

template <class T>
using PerPair = std::array<T, 3>;

constexpr std::size_t idx(Pair k) noexcept { return static_cast<std::size_t>(k); }

const char* pair_name(Pair k) noexcept;

/// Signed inventory per pair, in lots.
using Inventory = PerPair<double>;

/// Raised for invalid parameters. `field()` carries a dotted path such as
/// `triplet.rho` so configuration errors can point at the offending entry.
class ParameterError : public std::invalid_argument {
public:
    ParameterError(std::string field, const std::string& what);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct ZParams {
    double mu_z;
    double sigma_z;
};

/// mu_z = mu_x - mu_y + sigma_y^2 - rho sigma_x sigma_y and
/// sigma_z = sqrt(sigma_x^2 + sigma_y^2 - 2 rho sigma_x sigma_y).
ZParams derive_z_params(double mu_x, double mu_y, double sigma_x, double sigma_y, double rho);

struct TripletParams {
    double mu_x = 0.0;
    double mu_y = 0.0;
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    double rho = 0.0;
    double mu_z = 0.0;     // derived
    double sigma_z = 0.0;  // derived
    double x0 = 1.0;
    double y0 = 1.0;
    double z0 = 1.0;       // derived, x0 / y0

    /// Validating constructor; fills the derived z fields.
    static TripletParams make(double mu_x, double mu_y, double sigma_x, double sigma_y, double rho,
                              double x0, double y0);

    /// Drift of the rate that marks pair k to currency 1 (X for x and z, Y for y).
    double hat_drift(Pair k) const noexcept { return k == Pair::y ? mu_y : mu_x; }
    double hat_sigma(Pair k) const noexcept { return k == Pair::y ? sigma_y : sigma_x; }

    /// Throws ParameterError (field prefix `prefix`) if an invariant is broken.
    void validate(const std::string& prefix = "triplet") const;
};

struct ExecutionParams {
    PerPair<double> a{};        // temporary impact per unit speed
    PerPair<double> c_plus{};   // fee on client sells
    PerPair<double> c_minus{};  // fee on client buys
    PerPair<double> alpha{};    // terminal inventory penalty

    void validate(const std::string& prefix = "execution") const;
};

/// Law of a client order size. Exponential is the default; `constant` gives
/// deterministic sizes.
class JumpSizeLaw {
public:
    enum class Kind { exponential, constant };

    JumpSizeLaw() = default;
    static JumpSizeLaw exponential(double mean);
    static JumpSizeLaw constant(double size);

    Kind kind() const noexcept { return kind_; }
    double mean() const noexcept { return mean_; }

    /// Raw moment E[xi^n] for n = 1..4.
    double raw_moment(int n) const;

    template <class Rng>
    double sample(Rng& rng) const
    {
        if (kind_ == Kind::constant) return mean_;
        std::exponential_distribution<double> d(1.0 / mean_);
        return d(rng);
    }

private:
    Kind kind_ = Kind::exponential;
    double mean_ = 1.0;
};

struct SideFlow {
    double lambda = 0.0;  // arrivals per hour
    JumpSizeLaw size{};
};

/// `plus` are client sells (broker inventory goes up), `minus` client buys.
struct PairFlow {
    SideFlow plus{};
    SideFlow minus{};
};

struct FlowParams {
    PerPair<PairFlow> pairs{};

    const PairFlow& operator[](Pair k) const noexcept { return pairs[idx(k)]; }
    PairFlow& operator[](Pair k) noexcept { return pairs[idx(k)]; }

    double gamma_minus(Pair k) const;  // lambda+ theta+ - lambda- theta-
    double delta(Pair k) const;        // lambda+ eta+ + lambda- eta-
    double psi(Pair k, const ExecutionParams& exec) const;

    bool has_flow(Pair k) const noexcept;
    void validate(const std::string& prefix = "flow") const;

    /// Zero arrivals on every side of every pair.
    static FlowParams none();
};

struct AmbiguityParams {
    double phi = 0.0;
    void validate(const std::string& prefix = "ambiguity") const;
};

struct SolvabilityEntry {
    enum class Status { ok, violated, degenerate };
    Pair pair;
    Status status;
    double drift;  // mu of the marking rate
    double bound;  // alpha / a (infinite when a = 0)
};

struct SolvabilityReport {
    PerPair<SolvabilityEntry> entries{};
    bool passed() const noexcept;
    std::vector<Pair> violated() const;
    std::string describe() const;
};

/// Closed-form solvability check |mu_hat(k)| < alpha_k / a_k for each pair.
SolvabilityReport validate_solvability(const TripletParams& params, const ExecutionParams& exec);

}  // namespace fxtriplet
