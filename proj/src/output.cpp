#include "fxtriplet/output.hpp"

#include "fxtriplet/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fxtriplet {

std::string fmt17(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fnv1a64_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string hash_file(const std::string& path) { return fnv1a64_hex(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << contents;
    if (!out) throw IoError("write failed for " + path);
}

std::string h_table_csv(const HSolution& h)
{
    std::ostringstream os;
    os << "t,h2_x,h2_y,h2_z,h1_x,h1_y,h1_z,h0_x,h0_y\n";
    for (std::size_t i = 0; i < h.grid().knots(); ++i) {
        const HValues& v = h.at_knot(i);
        os << fmt17(h.grid().t(i));
        for (double x : v.h2) os << ',' << fmt17(x);
        for (double x : v.h1) os << ',' << fmt17(x);
        os << ',' << fmt17(v.h0_x) << ',' << fmt17(v.h0_y) << '\n';
    }
    return os.str();
}

std::string h1_table_csv(const RobustCorrection& h1)
{
    std::ostringstream os;
    os << "t,component,qx_exp,qy_exp,qz_exp,coefficient\n";
    for (std::size_t i = 0; i < h1.size(); ++i) {
        const std::string t = fmt17(h1.grid().t(i));
        const RobustKnot& k = h1.at_knot(i);
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; a + b <= 4; ++b)
                os << t << ",H11," << a << ",0," << b << ',' << fmt17(k.h11.c[a][b]) << '\n';
        for (int l = 0; l <= 4; ++l) os << t << ",H12,0," << l << ",0," << fmt17(k.h12.c[l]) << '\n';
        for (int a = 0; a <= 2; ++a)
            for (int b = 0; a + b <= 2; ++b)
                for (int l = 0; l <= 2; ++l)
                    os << t << ",H13," << a << ',' << l << ',' << b << ',' << fmt17(k.h13.c[a][b][l]) << '\n';
    }
    return os.str();
}

std::string paths_csv(const BatchResult& b)
{
    std::ostringstream os;
    os << "path_id,pnl_per_lot,pnl_total,terminal_q_x,terminal_q_y,terminal_q_z,terminal_cash,unwind\n";
    for (std::size_t i = 0; i < b.paths.size(); ++i) {
        const PathResult& r = b.paths[i];
        os << i << ',' << fmt17(r.pnl_per_lot) << ',' << fmt17(r.pnl_total) << ','
           << fmt17(r.terminal_q[0]) << ',' << fmt17(r.terminal_q[1]) << ',' << fmt17(r.terminal_q[2])
           << ',' << fmt17(r.terminal_cash) << ',' << fmt17(r.unwind) << '\n';
    }
    return os.str();
}

std::string trajectories_csv(const BatchResult& b)
{
    std::ostringstream os;
    os << "path_id,t,X,Y,Z,q_x,q_y,q_z,nu_x,nu_y,nu_z,kappa_x,kappa_y,kappa_z\n";
    for (std::size_t p = 0; p < b.recorded.size(); ++p) {
        for (const StepRecord& r : b.recorded[p]) {
            os << p << ',' << fmt17(r.t) << ',' << fmt17(r.x) << ',' << fmt17(r.y) << ',' << fmt17(r.z);
            for (double v : r.q) os << ',' << fmt17(v);
            for (double v : r.speed) os << ',' << fmt17(v);
            for (double v : r.kappa) os << ',' << fmt17(v);
            os << '\n';
        }
    }
    return os.str();
}

std::string trajectories_mean_csv(const TrajectoryAccumulator& acc)
{
    std::ostringstream os;
    os << 't';
    for (std::size_t j = 0; j < kTrajectoryFields; ++j) os << ",mean_" << trajectory_field_name(j);
    for (std::size_t j = 0; j < kTrajectoryFields; ++j) os << ",se_" << trajectory_field_name(j);
    os << '\n';
    for (const AggregateRow& r : trajectory_aggregates(acc)) {
        os << fmt17(r.t);
        for (double v : r.mean) os << ',' << fmt17(v);
        for (double v : r.se) os << ',' << fmt17(v);
        os << '\n';
    }
    return os.str();
}

std::string frontier_csv(const PhiSweepResult& r)
{
    std::ostringstream os;
    os << "phi,mean,std,sharpe,se_mean,mean_diff,se_diff,median_delta,p_positive\n";
    for (const FrontierRow& row : r.rows) {
        os << fmt17(row.phi) << ',' << fmt17(row.stats.mean) << ',' << fmt17(row.stats.std) << ','
           << fmt17(row.improvement.sharpe) << ',' << fmt17(row.stats.se_mean) << ','
           << fmt17(row.improvement.mean_diff) << ',' << fmt17(row.improvement.se_diff) << ','
           << fmt17(row.improvement.delta_median) << ',' << fmt17(row.improvement.p_positive) << '\n';
    }
    return os.str();
}

std::string exceedance_csv(const PhiSweepResult& r, const std::vector<double>& x_percent)
{
    std::ostringstream os;
    os << "phi,x_percent,probability\n";
    for (const FrontierRow& row : r.rows) {
        if (row.phi == 0.0) continue;
        for (double x : x_percent)
            os << fmt17(row.phi) << ',' << fmt17(x) << ',' << fmt17(row.improvement.exceedance(x)) << '\n';
    }
    return os.str();
}

std::string penalty_csv(const std::vector<PenaltyRow>& rows)
{
    std::ostringstream os;
    os << "alpha_multiplier,mean,std,se_mean,mean_terminal_q_x,mean_terminal_q_y,mean_terminal_q_z,"
          "mean_unwind_per_lot\n";
    for (const PenaltyRow& r : rows) {
        const BatchResult& b = r.batch;
        os << fmt17(r.multiplier) << ',' << fmt17(b.stats.mean) << ',' << fmt17(b.stats.std) << ','
           << fmt17(b.stats.se_mean) << ',' << fmt17(b.mean_terminal_q[0]) << ','
           << fmt17(b.mean_terminal_q[1]) << ',' << fmt17(b.mean_terminal_q[2]) << ','
           << fmt17(b.mean_unwind_per_lot) << '\n';
    }
    return os.str();
}

nlohmann::json number_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json stats_json(const PnLStats& s)
{
    return {{"count", s.count},        {"mean", number_or_null(s.mean)},
            {"std", number_or_null(s.std)}, {"se_mean", number_or_null(s.se_mean)},
            {"median", number_or_null(s.median)}, {"p05", number_or_null(s.p05)},
            {"p25", number_or_null(s.p25)}, {"p75", number_or_null(s.p75)},
            {"p95", number_or_null(s.p95)}};
}

nlohmann::json improvement_json(const ImprovementStats& s)
{
    return {{"count", s.count},
            {"mean_diff_per_lot", number_or_null(s.mean_diff)},
            {"se_diff_per_lot", number_or_null(s.se_diff)},
            {"delta_mean", number_or_null(s.delta_mean)},
            {"delta_std", number_or_null(s.delta_std)},
            {"delta_median", number_or_null(s.delta_median)},
            {"sharpe", number_or_null(s.sharpe)},
            {"sharpe_defined", s.sharpe_defined},
            {"p_positive", number_or_null(s.p_positive)}};
}

}  // namespace fxtriplet
