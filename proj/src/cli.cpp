#include "fxtriplet/cli.hpp"

#include "fxtriplet/config.hpp"
#include "fxtriplet/experiment.hpp"
#include "fxtriplet/output.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

namespace fxtriplet {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CommandOptions {
    std::string command;
    std::string config_path;
    bool robust = false;
    std::string strategy = "robust";
    std::optional<double> phi;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::size_t record = 0;
    std::string phi_grid;
    std::string alpha_grid;
    std::string out;
    std::string from_manifest;
};

using OutputFiles = std::vector<std::pair<std::string, std::string>>;

std::vector<double> parse_grid(const std::string& text, const std::string& field)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParameterError(field, "cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw ParameterError(field, "must list at least one value");
    return out;
}

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json options_json(const CommandOptions& o)
{
    return {{"command", o.command},       {"robust", o.robust},         {"strategy", o.strategy},
            {"record_trajectories", o.record}, {"phi_grid", o.phi_grid}, {"alpha_grid", o.alpha_grid}};
}

OutputFiles cmd_solve(const RunConfig& cfg, const CommandOptions& o)
{
    const SolvabilityReport report = validate_solvability(cfg.reference, cfg.sim.exec);
    std::cout << "solvability:\n" << report.describe();
    const HSolution h = HSolution::solve(cfg.reference, cfg.sim.exec, cfg.sim.flow, cfg.sim.grid());
    OutputFiles files{{"h_table.csv", h_table_csv(h)}};
    if (o.robust) {
        const AuxiliaryFlow aux = AuxiliaryFlow::build(h, cfg.sim.flow);
        const RobustCorrection h1 = RobustCorrection::compute(aux, cfg.reference);
        files.emplace_back("h1_table.csv", h1_table_csv(h1));
    }
    return files;
}

OutputFiles cmd_simulate(const RunConfig& cfg, const CommandOptions& o)
{
    const StrategySpec spec = StrategySpec::parse(o.strategy, cfg.ambiguity.phi);
    if (spec.kind == StrategySpec::Kind::illiquid_only && (cfg.sim.q0[0] != 0.0 || cfg.sim.q0[1] != 0.0))
        std::cerr << "warning: illiquid-only strategy never trades x or y; their initial inventories "
                     "are carried to the terminal unwind\n";
    BatchOptions opt;
    opt.aggregate = true;
    opt.record_paths = o.record;
    const BatchResult b = run_batch(cfg, spec, opt);

    json summary = {{"strategy", spec.name()},
                    {"phi", spec.phi},
                    {"n_paths", cfg.sim.n_paths},
                    {"seed", cfg.sim.seed},
                    {"pnl_per_lot", stats_json(b.stats)},
                    {"mean_terminal_q", {{"x", b.mean_terminal_q[0]}, {"y", b.mean_terminal_q[1]}, {"z", b.mean_terminal_q[2]}}},
                    {"mean_unwind_per_lot", number_or_null(b.mean_unwind_per_lot)},
                    {"max_no_arbitrage_error", b.max_no_arbitrage_error}};
    std::cout << spec.name() << " phi=" << fmt17(spec.phi) << " paths=" << cfg.sim.n_paths
              << " mean=" << fmt17(b.stats.mean) << " std=" << fmt17(b.stats.std) << '\n';

    OutputFiles files{{"paths.csv", paths_csv(b)}, {"trajectories_mean.csv", trajectories_mean_csv(*b.aggregate)}};
    if (o.record > 0) files.emplace_back("trajectories.csv", trajectories_csv(b));
    files.emplace_back("summary.json", summary.dump(2) + "\n");
    return files;
}

OutputFiles cmd_sweep(const RunConfig& cfg, const CommandOptions& o)
{
    const bool both = o.phi_grid.empty() && o.alpha_grid.empty();
    OutputFiles files;
    json summary = json::object();

    if (both || !o.phi_grid.empty()) {
        const std::vector<double> grid = o.phi_grid.empty() ? default_phi_grid() : parse_grid(o.phi_grid, "phi_grid");
        const PhiSweepResult r = phi_sweep(cfg, grid);
        files.emplace_back("frontier.csv", frontier_csv(r));
        files.emplace_back("exceedance.csv", exceedance_csv(r, default_exceedance_grid()));
        json rows = json::array();
        const FrontierRow* best_mean = nullptr;
        const FrontierRow* best_sharpe = nullptr;
        for (const FrontierRow& row : r.rows) {
            rows.push_back({{"phi", row.phi}, {"pnl_per_lot", stats_json(row.stats)},
                            {"improvement", improvement_json(row.improvement)}});
            if (!best_mean || row.stats.mean > best_mean->stats.mean) best_mean = &row;
            if (row.improvement.sharpe_defined &&
                (!best_sharpe || row.improvement.sharpe > best_sharpe->improvement.sharpe))
                best_sharpe = &row;
        }
        summary["frontier"] = rows;
        summary["phi_of_max_mean"] = best_mean->phi;
        summary["phi_of_max_sharpe"] = best_sharpe ? json(best_sharpe->phi) : json(nullptr);
        summary["max_sharpe"] = best_sharpe ? json(best_sharpe->improvement.sharpe) : json(nullptr);
    }

    if (both || !o.alpha_grid.empty()) {
        const std::vector<double> grid =
            o.alpha_grid.empty() ? default_alpha_grid() : parse_grid(o.alpha_grid, "alpha_grid");
        BatchOptions opt;
        opt.aggregate = true;
        const std::vector<PenaltyRow> rows = penalty_sweep(cfg, grid, cfg.ambiguity.phi, opt);
        files.emplace_back("penalty.csv", penalty_csv(rows));
        json bundles = json::array();
        for (const PenaltyRow& r : rows) {
            files.emplace_back("trajectories_mean_alpha_" + fmt17(r.multiplier) + ".csv",
                               trajectories_mean_csv(*r.batch.aggregate));
            bundles.push_back({{"alpha_multiplier", r.multiplier},
                               {"pnl_per_lot", stats_json(r.batch.stats)},
                               {"mean_unwind_per_lot", r.batch.mean_unwind_per_lot}});
        }
        summary["penalty"] = bundles;
        if (rows.size() >= 2) {
            // Mean P&L gap between the largest and smallest penalty.
            auto lo = rows.begin();
            auto hi = rows.begin();
            for (auto it = rows.begin(); it != rows.end(); ++it) {
                if (it->multiplier < lo->multiplier) lo = it;
                if (it->multiplier > hi->multiplier) hi = it;
            }
            summary["implied_unwind_cost_per_lot"] = hi->batch.stats.mean - lo->batch.stats.mean;
        }
    }
    files.emplace_back("summary.json", summary.dump(2) + "\n");
    return files;
}

fs::path resolve_out_dir(const std::string& flag)
{
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("FXTRIPLET_OUT"); env && *env) return env;
    return "out";
}

int execute(CommandOptions o)
{
    const std::string started = utc_now();
    RunConfig cfg;
    json expected_outputs;
    if (!o.from_manifest.empty()) {
        json m;
        try {
            m = json::parse(read_text_file(o.from_manifest));
        } catch (const json::parse_error& e) {
            throw ParameterError("manifest", std::string("malformed JSON: ") + e.what());
        }
        if (!m.contains("config") || !m.contains("options") || !m.contains("outputs"))
            throw ParameterError("manifest", "missing config, options or outputs");
        cfg = parse_config(m.at("config"));
        const json& opts = m.at("options");
        o.command = opts.at("command").get<std::string>();
        o.robust = opts.at("robust").get<bool>();
        o.strategy = opts.at("strategy").get<std::string>();
        o.record = opts.at("record_trajectories").get<std::size_t>();
        o.phi_grid = opts.at("phi_grid").get<std::string>();
        o.alpha_grid = opts.at("alpha_grid").get<std::string>();
        expected_outputs = m.at("outputs");
    } else {
        cfg = o.config_path.empty() ? default_config() : load_config(o.config_path);
        if (o.paths) cfg.sim.n_paths = *o.paths;
        if (o.seed) cfg.sim.seed = *o.seed;
        if (o.phi) cfg.ambiguity.phi = *o.phi;
        cfg.validate();
    }

    OutputFiles files;
    if (o.command == "solve") {
        files = cmd_solve(cfg, o);
    } else if (o.command == "simulate") {
        files = cmd_simulate(cfg, o);
    } else if (o.command == "sweep") {
        files = cmd_sweep(cfg, o);
    } else {
        throw ParameterError("command", "unknown command " + o.command);
    }

    const fs::path dir = resolve_out_dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    json outputs = json::array();
    for (const auto& [name, contents] : files) {
        write_text_file((dir / name).string(), contents);
        outputs.push_back({{"file", name}, {"fnv1a64", hash_file((dir / name).string())}});
    }
    const json manifest = {{"tool", "fxtriplet"},
                           {"version", kToolVersion},
                           {"command", o.command},
                           {"options", options_json(o)},
                           {"seed", cfg.sim.seed},
                           {"config", config_to_json(cfg)},
                           {"started_at", started},
                           {"finished_at", utc_now()},
                           {"outputs", outputs}};
    write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << "wrote " << files.size() << " files to " << dir.string() << '\n';

    if (!o.from_manifest.empty() && expected_outputs != outputs) {
        for (const json& e : expected_outputs) {
            bool found = false;
            for (const json& a : outputs)
                if (a.at("file") == e.at("file")) found = a.at("fnv1a64") == e.at("fnv1a64");
            if (!found) std::cerr << "mismatch: " << e.at("file").get<std::string>() << '\n';
        }
        return kExitManifestMismatch;
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv)
{
    CLI::App app{"Optimal and robust liquidation in an FX currency triplet"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    CommandOptions o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON configuration file (defaults to the built-in study setup)");
        sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", o.out, "Output directory (falls back to $FXTRIPLET_OUT, then ./out)");
        sub->add_option("--from-manifest", o.from_manifest, "Re-run from a manifest and verify output hashes");
        sub->add_option("--seed", o.seed, "Master seed");
        sub->add_option("--paths", o.paths, "Number of simulated paths")->check(CLI::PositiveNumber);
    };

    CLI::App* solve = app.add_subcommand("solve", "Tabulate the value-function coefficients");
    common(solve);
    solve->add_flag("--robust", o.robust, "Also tabulate the ambiguity correction H1");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of one strategy");
    common(simulate);
    simulate->add_option("--strategy", o.strategy, "neutral | robust | illiquid-only")
        ->check(CLI::IsMember({"neutral", "robust", "illiquid-only"}));
    simulate->add_option("--phi", o.phi, "Ambiguity aversion (overrides ambiguity.phi)")->check(CLI::NonNegativeNumber);
    simulate->add_option("--record-trajectories", o.record, "Keep full trajectories of the first K paths");

    CLI::App* sweep = app.add_subcommand("sweep", "Ambiguity frontier and penalty sensitivity");
    common(sweep);
    sweep->add_option("--phi-grid", o.phi_grid, "Comma-separated phi values");
    sweep->add_option("--alpha-grid", o.alpha_grid, "Comma-separated alpha/a multipliers");
    sweep->add_option("--phi", o.phi, "Ambiguity aversion of the penalty sweep")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    o.command = app.get_subcommands().front()->get_name();

    try {
        set_thread_count(o.threads);
        return execute(o);
    } catch (const ParameterError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace fxtriplet
