#include "fxtriplet/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fxtriplet {

namespace {

void require_finite(double v, const std::string& field)
{
    if (!std::isfinite(v)) throw ParameterError(field, "must be finite");
}

void require_nonnegative(double v, const std::string& field)
{
    require_finite(v, field);
    if (v < 0.0) throw ParameterError(field, "must be >= 0");
}

}  // namespace

const char* pair_name(Pair k) noexcept
{
    switch (k) {
    case Pair::x: return "x";
    case Pair::y: return "y";
    case Pair::z: return "z";
    }
    return "?";
}

ParameterError::ParameterError(std::string field, const std::string& what)
    : std::invalid_argument(field + ": " + what), field_(std::move(field))
{
}

ZParams derive_z_params(double mu_x, double mu_y, double sigma_x, double sigma_y, double rho)
{
    require_finite(mu_x, "mu_x");
    require_finite(mu_y, "mu_y");
    require_finite(sigma_x, "sigma_x");
    require_finite(sigma_y, "sigma_y");
    require_finite(rho, "rho");
    if (sigma_x <= 0.0) throw ParameterError("sigma_x", "must be > 0");
    if (sigma_y <= 0.0) throw ParameterError("sigma_y", "must be > 0");
    if (std::abs(rho) > 1.0) throw ParameterError("rho", "must lie in [-1, 1]");

    const double cross = rho * sigma_x * sigma_y;
    ZParams out{};
    out.mu_z = mu_x - mu_y + sigma_y * sigma_y - cross;
    // Clamp the rounding residue at rho = 1, sigma_x = sigma_y.
    const double var = sigma_x * sigma_x + sigma_y * sigma_y - 2.0 * cross;
    out.sigma_z = std::sqrt(std::max(var, 0.0));
    return out;
}

TripletParams TripletParams::make(double mu_x, double mu_y, double sigma_x, double sigma_y,
                                  double rho, double x0, double y0)
{
    TripletParams p;
    p.mu_x = mu_x;
    p.mu_y = mu_y;
    p.sigma_x = sigma_x;
    p.sigma_y = sigma_y;
    p.rho = rho;
    p.x0 = x0;
    p.y0 = y0;
    p.validate();
    const ZParams z = derive_z_params(mu_x, mu_y, sigma_x, sigma_y, rho);
    p.mu_z = z.mu_z;
    p.sigma_z = z.sigma_z;
    p.z0 = x0 / y0;
    return p;
}

void TripletParams::validate(const std::string& prefix) const
{
    try {
        (void)derive_z_params(mu_x, mu_y, sigma_x, sigma_y, rho);
    } catch (const ParameterError& e) {
        throw ParameterError(prefix + "." + e.field(),
                             std::string(e.what()).substr(e.field().size() + 2));
    }
    require_finite(x0, prefix + ".x0");
    require_finite(y0, prefix + ".y0");
    if (x0 <= 0.0) throw ParameterError(prefix + ".x0", "must be > 0");
    if (y0 <= 0.0) throw ParameterError(prefix + ".y0", "must be > 0");
}

void ExecutionParams::validate(const std::string& prefix) const
{
    for (Pair k : kPairs) {
        const std::string n = pair_name(k);
        require_nonnegative(a[idx(k)], prefix + ".a." + n);
        require_nonnegative(c_plus[idx(k)], prefix + ".c_plus." + n);
        require_nonnegative(c_minus[idx(k)], prefix + ".c_minus." + n);
        require_nonnegative(alpha[idx(k)], prefix + ".alpha." + n);
    }
}

JumpSizeLaw JumpSizeLaw::exponential(double mean)
{
    JumpSizeLaw law;
    law.kind_ = Kind::exponential;
    law.mean_ = mean;
    return law;
}

JumpSizeLaw JumpSizeLaw::constant(double size)
{
    JumpSizeLaw law;
    law.kind_ = Kind::constant;
    law.mean_ = size;
    return law;
}

double JumpSizeLaw::raw_moment(int n) const
{
    if (n < 0 || n > 4) throw std::out_of_range("jump size moments are available for n = 0..4");
    double m = 1.0;
    for (int i = 1; i <= n; ++i) {
        // exponential: E[xi^n] = n! theta^n
        m *= (kind_ == Kind::exponential ? static_cast<double>(i) : 1.0) * mean_;
    }
    return m;
}

double FlowParams::gamma_minus(Pair k) const
{
    const PairFlow& f = pairs[idx(k)];
    return f.plus.lambda * f.plus.size.raw_moment(1) - f.minus.lambda * f.minus.size.raw_moment(1);
}

double FlowParams::delta(Pair k) const
{
    const PairFlow& f = pairs[idx(k)];
    return f.plus.lambda * f.plus.size.raw_moment(2) + f.minus.lambda * f.minus.size.raw_moment(2);
}

double FlowParams::psi(Pair k, const ExecutionParams& exec) const
{
    const PairFlow& f = pairs[idx(k)];
    return exec.c_minus[idx(k)] * f.minus.lambda * f.minus.size.raw_moment(2) +
           exec.c_plus[idx(k)] * f.plus.lambda * f.plus.size.raw_moment(2);
}

bool FlowParams::has_flow(Pair k) const noexcept
{
    const PairFlow& f = pairs[idx(k)];
    return f.plus.lambda > 0.0 || f.minus.lambda > 0.0;
}

void FlowParams::validate(const std::string& prefix) const
{
    for (Pair k : kPairs) {
        const PairFlow& f = pairs[idx(k)];
        for (int s = 0; s < 2; ++s) {
            const SideFlow& side = s == 0 ? f.plus : f.minus;
            const std::string base =
                prefix + "." + pair_name(k) + (s == 0 ? ".lambda_plus" : ".lambda_minus");
            require_nonnegative(side.lambda, base);
            const std::string theta =
                prefix + "." + pair_name(k) + (s == 0 ? ".theta_plus" : ".theta_minus");
            require_finite(side.size.mean(), theta);
            if (side.lambda > 0.0 && side.size.mean() <= 0.0)
                throw ParameterError(theta, "must be > 0 when the arrival rate is positive");
            if (side.size.mean() < 0.0) throw ParameterError(theta, "must be >= 0");
        }
    }
}

FlowParams FlowParams::none()
{
    FlowParams f;
    for (PairFlow& p : f.pairs) {
        p.plus = {0.0, JumpSizeLaw::exponential(1.0)};
        p.minus = {0.0, JumpSizeLaw::exponential(1.0)};
    }
    return f;
}

void AmbiguityParams::validate(const std::string& prefix) const
{
    require_nonnegative(phi, prefix + ".phi");
}

bool SolvabilityReport::passed() const noexcept
{
    for (const auto& e : entries)
        if (e.status != SolvabilityEntry::Status::ok) return false;
    return true;
}

std::vector<Pair> SolvabilityReport::violated() const
{
    std::vector<Pair> out;
    for (const auto& e : entries)
        if (e.status == SolvabilityEntry::Status::violated) out.push_back(e.pair);
    return out;
}

std::string SolvabilityReport::describe() const
{
    std::ostringstream os;
    for (const auto& e : entries) {
        os << pair_name(e.pair) << ": ";
        switch (e.status) {
        case SolvabilityEntry::Status::ok: os << "ok"; break;
        case SolvabilityEntry::Status::violated:
            os << "violated (|mu| = " << std::abs(e.drift) << " >= alpha/a = " << e.bound << ")";
            break;
        case SolvabilityEntry::Status::degenerate: os << "degenerate (a = alpha = 0)"; break;
        }
        os << '\n';
    }
    return os.str();
}

SolvabilityReport validate_solvability(const TripletParams& params, const ExecutionParams& exec)
{
    SolvabilityReport r;
    for (Pair k : kPairs) {
        const double a = exec.a[idx(k)];
        const double alpha = exec.alpha[idx(k)];
        SolvabilityEntry e{k, SolvabilityEntry::Status::ok, params.hat_drift(k), 0.0};
        if (a == 0.0 && alpha == 0.0) {
            e.status = SolvabilityEntry::Status::degenerate;
            e.bound = std::numeric_limits<double>::quiet_NaN();
        } else {
            e.bound = a == 0.0 ? std::numeric_limits<double>::infinity() : alpha / a;
            if (!(std::abs(e.drift) < e.bound)) e.status = SolvabilityEntry::Status::violated;
        }
        r.entries[idx(k)] = e;
    }
    return r;
}

}  // namespace fxtriplet
