#include "fxtriplet/config.hpp"

#include <fstream>
#include <set>

namespace fxtriplet {

using nlohmann::json;

RunConfig default_config()
{
    RunConfig c;
    c.reference = TripletParams::make(0.0, 0.0, 1.70e-3, 1.56e-3, 0.78, 0.7459, 0.7678);
    c.sim.statistical =
        TripletParams::make(-6.491659e-4, -3.155159e-4, 1.70e-3, 1.56e-3, 0.78, 0.7459, 0.7678);
    c.sim.exec.a = {5e-8, 1e-8, 1e-7};
    for (std::size_t i = 0; i < 3; ++i) {
        c.sim.exec.c_plus[i] = c.sim.exec.a[i] / 2.0;
        c.sim.exec.c_minus[i] = c.sim.exec.a[i] / 2.0;
        c.sim.exec.alpha[i] = c.sim.exec.a[i] * 1e6;
    }
    const PerPair<double> lambda{60.0, 90.0, 6.0};
    const PerPair<double> theta{2.0, 1.0, 10.0};
    for (Pair k : kPairs) {
        const std::size_t i = idx(k);
        c.sim.flow[k].plus = {lambda[i], JumpSizeLaw::exponential(theta[i])};
        c.sim.flow[k].minus = {lambda[i], JumpSizeLaw::exponential(theta[i])};
    }
    c.ambiguity.phi = 0.1;
    c.sim.horizon = 1.0;
    c.sim.dt = 1e-3;
    c.sim.n_paths = 10000;
    c.sim.seed = 1;
    c.sim.q0 = {0.0, 0.0, 200.0};
    c.sim.unwind_dt = 1e-3;
    return c;
}

void RunConfig::validate() const
{
    reference.validate("triplet");
    ambiguity.validate();
    sim.validate();
    if (reference.x0 != sim.statistical.x0 || reference.y0 != sim.statistical.y0)
        throw ParameterError("triplet.x0", "reference and statistical initial rates differ");
}

namespace {

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed)
{
    if (!obj.is_object()) throw ParameterError(path, "must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (allowed.count(it.key()) == 0) {
            const std::string field = path.empty() ? it.key() : path + "." + it.key();
            if (it.key() == "mu_z" || it.key() == "sigma_z" || it.key() == "z0")
                throw ParameterError(field, "is derived from the x and y parameters and cannot be set");
            throw ParameterError(field, "unknown configuration entry");
        }
    }
}

double read_number(const json& obj, const std::string& key, const std::string& path, double fallback)
{
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ParameterError(path + "." + key, "must be a number");
    return v.get<double>();
}

void read_pair_triple(const json& obj, const std::string& key, const std::string& path,
                      PerPair<double>& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string p = path + "." + key;
    reject_unknown(v, p, {"x", "y", "z"});
    for (Pair k : kPairs) out[idx(k)] = read_number(v, pair_name(k), p, out[idx(k)]);
}

}  // namespace

RunConfig parse_config(const json& j)
{
    RunConfig c = default_config();
    reject_unknown(j, "", {"triplet", "execution", "flow", "ambiguity", "simulation"});

    if (j.contains("triplet")) {
        const json& t = j.at("triplet");
        reject_unknown(t, "triplet",
                       {"mu_x", "mu_y", "sigma_x", "sigma_y", "rho", "x0", "y0", "statistical"});
        TripletParams& r = c.reference;
        r.mu_x = read_number(t, "mu_x", "triplet", r.mu_x);
        r.mu_y = read_number(t, "mu_y", "triplet", r.mu_y);
        r.sigma_x = read_number(t, "sigma_x", "triplet", r.sigma_x);
        r.sigma_y = read_number(t, "sigma_y", "triplet", r.sigma_y);
        r.rho = read_number(t, "rho", "triplet", r.rho);
        r.x0 = read_number(t, "x0", "triplet", r.x0);
        r.y0 = read_number(t, "y0", "triplet", r.y0);
        r.validate("triplet");
        r = TripletParams::make(r.mu_x, r.mu_y, r.sigma_x, r.sigma_y, r.rho, r.x0, r.y0);

        // The statistical measure shares volatilities and correlation unless overridden.
        TripletParams s = c.sim.statistical;
        s.sigma_x = r.sigma_x;
        s.sigma_y = r.sigma_y;
        s.rho = r.rho;
        if (t.contains("statistical")) {
            const json& st = t.at("statistical");
            reject_unknown(st, "triplet.statistical", {"mu_x", "mu_y", "sigma_x", "sigma_y", "rho"});
            s.mu_x = read_number(st, "mu_x", "triplet.statistical", s.mu_x);
            s.mu_y = read_number(st, "mu_y", "triplet.statistical", s.mu_y);
            s.sigma_x = read_number(st, "sigma_x", "triplet.statistical", s.sigma_x);
            s.sigma_y = read_number(st, "sigma_y", "triplet.statistical", s.sigma_y);
            s.rho = read_number(st, "rho", "triplet.statistical", s.rho);
        }
        s.x0 = r.x0;
        s.y0 = r.y0;
        s.validate("triplet.statistical");
        c.sim.statistical = TripletParams::make(s.mu_x, s.mu_y, s.sigma_x, s.sigma_y, s.rho, s.x0, s.y0);
    }

    if (j.contains("execution")) {
        const json& e = j.at("execution");
        reject_unknown(e, "execution", {"a", "c_plus", "c_minus", "alpha"});
        read_pair_triple(e, "a", "execution", c.sim.exec.a);
        read_pair_triple(e, "c_plus", "execution", c.sim.exec.c_plus);
        read_pair_triple(e, "c_minus", "execution", c.sim.exec.c_minus);
        read_pair_triple(e, "alpha", "execution", c.sim.exec.alpha);
    }

    if (j.contains("flow")) {
        const json& f = j.at("flow");
        reject_unknown(f, "flow", {"x", "y", "z"});
        for (Pair k : kPairs) {
            if (!f.contains(pair_name(k))) continue;
            const std::string p = std::string("flow.") + pair_name(k);
            const json& side = f.at(pair_name(k));
            reject_unknown(side, p,
                           {"lambda_plus", "lambda_minus", "theta_plus", "theta_minus", "size_law"});
            PairFlow& pf = c.sim.flow[k];
            std::string law = pf.plus.size.kind() == JumpSizeLaw::Kind::constant ? "constant" : "exponential";
            if (side.contains("size_law")) {
                if (!side.at("size_law").is_string())
                    throw ParameterError(p + ".size_law", "must be a string");
                law = side.at("size_law").get<std::string>();
                if (law != "exponential" && law != "constant")
                    throw ParameterError(p + ".size_law", "expected exponential or constant");
            }
            auto make = [&](double mean) {
                return law == "constant" ? JumpSizeLaw::constant(mean) : JumpSizeLaw::exponential(mean);
            };
            pf.plus.lambda = read_number(side, "lambda_plus", p, pf.plus.lambda);
            pf.minus.lambda = read_number(side, "lambda_minus", p, pf.minus.lambda);
            pf.plus.size = make(read_number(side, "theta_plus", p, pf.plus.size.mean()));
            pf.minus.size = make(read_number(side, "theta_minus", p, pf.minus.size.mean()));
        }
    }

    if (j.contains("ambiguity")) {
        const json& a = j.at("ambiguity");
        reject_unknown(a, "ambiguity", {"phi"});
        c.ambiguity.phi = read_number(a, "phi", "ambiguity", c.ambiguity.phi);
    }

    if (j.contains("simulation")) {
        const json& s = j.at("simulation");
        reject_unknown(s, "simulation",
                       {"T", "dt", "n_paths", "seed", "q0", "unwind_dt", "fill_timing", "lot_units"});
        SimConfig& sc = c.sim;
        sc.horizon = read_number(s, "T", "simulation", sc.horizon);
        sc.dt = read_number(s, "dt", "simulation", sc.dt);
        if (s.contains("n_paths")) {
            const json& v = s.at("n_paths");
            if (!v.is_number_integer() || v.get<long long>() < 1)
                throw ParameterError("simulation.n_paths", "must be a positive integer");
            sc.n_paths = v.get<std::size_t>();
        }
        if (s.contains("seed")) {
            const json& v = s.at("seed");
            if (!v.is_number_integer() || v.get<long long>() < 0)
                throw ParameterError("simulation.seed", "must be a non-negative integer");
            sc.seed = v.get<std::uint64_t>();
        }
        read_pair_triple(s, "q0", "simulation", sc.q0);
        sc.unwind_dt = read_number(s, "unwind_dt", "simulation", sc.unwind_dt);
        sc.lot_units = read_number(s, "lot_units", "simulation", sc.lot_units);
        if (s.contains("fill_timing")) {
            if (!s.at("fill_timing").is_string())
                throw ParameterError("simulation.fill_timing", "must be a string");
            sc.fill_timing = parse_fill_timing(s.at("fill_timing").get<std::string>());
        }
    }

    c.validate();
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParameterError("config", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

json config_to_json(const RunConfig& c)
{
    auto triple = [](const PerPair<double>& v) { return json{{"x", v[0]}, {"y", v[1]}, {"z", v[2]}}; };
    json flow = json::object();
    for (Pair k : kPairs) {
        const PairFlow& f = c.sim.flow[k];
        flow[pair_name(k)] = {
            {"lambda_plus", f.plus.lambda},
            {"lambda_minus", f.minus.lambda},
            {"theta_plus", f.plus.size.mean()},
            {"theta_minus", f.minus.size.mean()},
            {"size_law", f.plus.size.kind() == JumpSizeLaw::Kind::constant ? "constant" : "exponential"}};
    }
    const TripletParams& r = c.reference;
    const TripletParams& s = c.sim.statistical;
    return json{
        {"triplet",
         {{"mu_x", r.mu_x},
          {"mu_y", r.mu_y},
          {"sigma_x", r.sigma_x},
          {"sigma_y", r.sigma_y},
          {"rho", r.rho},
          {"x0", r.x0},
          {"y0", r.y0},
          {"statistical",
           {{"mu_x", s.mu_x}, {"mu_y", s.mu_y}, {"sigma_x", s.sigma_x}, {"sigma_y", s.sigma_y}, {"rho", s.rho}}}}},
        {"execution",
         {{"a", triple(c.sim.exec.a)},
          {"c_plus", triple(c.sim.exec.c_plus)},
          {"c_minus", triple(c.sim.exec.c_minus)},
          {"alpha", triple(c.sim.exec.alpha)}}},
        {"flow", flow},
        {"ambiguity", {{"phi", c.ambiguity.phi}}},
        {"simulation",
         {{"T", c.sim.horizon},
          {"dt", c.sim.dt},
          {"n_paths", c.sim.n_paths},
          {"seed", c.sim.seed},
          {"q0", triple(c.sim.q0)},
          {"unwind_dt", c.sim.unwind_dt},
          {"fill_timing", fill_timing_name(c.sim.fill_timing)},
          {"lot_units", c.sim.lot_units}}}};
}

}  // namespace fxtriplet
