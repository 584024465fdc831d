// gvm: simulation, sweep, analysis and graph-check front end.

#include "gvm/errors.hpp"
#include "gvm/io.hpp"
#include "gvm/pipeline.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kUsage = 1, kRuntime = 2 };

struct CommonFlags {
    std::string config;
    std::string out = "out";
    std::string run_id;
    std::optional<std::string> seed;
    std::optional<std::string> bins;
    std::optional<std::string> max_lag;
    std::vector<std::string> sets;
};

struct SimFlags {
    std::optional<std::string> n, k, q, f, transient, measure, field;
};

void add_common(CLI::App* cmd, CommonFlags& c)
{
    cmd->add_option("--config", c.config, "INI config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output root")->capture_default_str();
    cmd->add_option("--run-id", c.run_id, "directory name under --out (default: timestamped)");
    cmd->add_option("--seed", c.seed, "root seed");
    cmd->add_option("--bins", c.bins, "histogram bins");
    cmd->add_option("--max-lag", c.max_lag, "largest autocorrelation lag (0: T-2)");
    cmd->add_option("--set", c.sets, "override, section.key=value (repeatable)");
}

void add_sim(CLI::App* cmd, SimFlags& s)
{
    cmd->add_option("--n", s.n, "number of agents");
    cmd->add_option("--k", s.k, "mean degree");
    cmd->add_option("--q", s.q, "noise parameter");
    cmd->add_option("--f", s.f, "contrarian fraction");
    cmd->add_option("--transient", s.transient, "discarded MCS");
    cmd->add_option("--measure", s.measure, "recorded MCS");
    cmd->add_option("--field", s.field, "contrarian field: frozen|running");
}

gvm::ProjectConfig resolve(const CommonFlags& c, const SimFlags* s)
{
    gvm::ProjectConfig cfg = c.config.empty() ? gvm::ProjectConfig{} : gvm::load_config(c.config);
    for (const auto& a : c.sets)
        gvm::apply_override(cfg, a);
    auto put = [&](const std::optional<std::string>& v, const char* key) {
        if (v)
            gvm::apply_override(cfg, std::string(key) + "=" + *v);
    };
    put(c.seed, "simulation.seed");
    put(c.bins, "analysis.bins");
    put(c.max_lag, "analysis.max_lag");
    if (s) {
        put(s->n, "simulation.n");
        put(s->k, "simulation.mean_degree");
        put(s->q, "simulation.q");
        put(s->f, "simulation.f");
        put(s->transient, "simulation.transient_mcs");
        put(s->measure, "simulation.measure_mcs");
        put(s->field, "simulation.contrarian_field");
    }
    return cfg;
}

std::filesystem::path run_dir(const CommonFlags& c, const char* prefix)
{
    return std::filesystem::path(c.out) / (c.run_id.empty() ? gvm::timestamped_id(prefix) : c.run_id);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Global-vote market model: simulate, sweep and analyze return series"};
    app.require_subcommand(1);

    CommonFlags run_common;
    SimFlags run_sim;
    auto* run = app.add_subcommand("run", "one simulation plus analysis");
    add_common(run, run_common);
    add_sim(run, run_sim);

    CommonFlags sweep_common;
    SimFlags sweep_sim;
    std::size_t workers = 1;
    auto* sweep = app.add_subcommand("sweep", "grid of simulations over mean degree, q and f");
    add_common(sweep, sweep_common);
    add_sim(sweep, sweep_sim);
    sweep->add_option("--workers", workers, "parallel cells")->check(CLI::PositiveNumber)->capture_default_str();

    CommonFlags an_common;
    std::string input;
    std::string format = "returns";
    gvm::ColumnSpec columns;
    std::string date_format = "iso";
    auto* analyze = app.add_subcommand("analyze", "analyze an existing returns or price CSV");
    add_common(analyze, an_common);
    analyze->add_option("input", input, "CSV file")->required()->check(CLI::ExistingFile);
    analyze->add_option("--format", format, "returns|prices")
        ->check(CLI::IsMember({"returns", "prices"}))
        ->capture_default_str();
    analyze->add_option("--date-col", columns.date_column, "date column for prices")->capture_default_str();
    analyze->add_option("--close-col", columns.close_column, "close column for prices")->capture_default_str();
    analyze->add_option("--date-format", date_format, "iso|mdy|dmy")->capture_default_str();

    gvm::GraphCheckOptions gc;
    std::string gc_out = "out";
    std::string gc_id;
    auto* graph = app.add_subcommand("graph-check", "degree distributions of generated graphs against Poisson");
    graph->add_option("--n", gc.n, "nodes per network")->capture_default_str();
    graph->add_option("--k", gc.mean_degrees, "mean degrees")->capture_default_str();
    graph->add_option("--networks", gc.networks, "networks pooled per degree")->capture_default_str();
    graph->add_option("--seed", gc.seed, "root seed")->capture_default_str();
    graph->add_option("--alpha", gc.alpha, "chi-square significance level")->capture_default_str();
    graph->add_flag("--edges", gc.edge_list, "also write the first edge list per degree");
    graph->add_option("--out", gc_out, "output root")->capture_default_str();
    graph->add_option("--run-id", gc_id, "directory name under --out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    std::filesystem::path dir;
    std::function<void()> job;
    try {
        if (*run) {
            const auto cfg = resolve(run_common, &run_sim);
            cfg.simulation.validate();
            dir = run_dir(run_common, "run");
            job = [cfg, dir] { gvm::run_single(cfg.simulation, cfg.analysis, dir); };
        } else if (*sweep) {
            const auto cfg = resolve(sweep_common, &sweep_sim);
            cfg.sweep.base.validate();
            gvm::resolve_cells(cfg.sweep, cfg.qc);
            dir = run_dir(sweep_common, "sweep");
            job = [cfg, dir, workers] {
                const auto manifest = gvm::run_sweep(cfg.sweep, cfg.qc, cfg.analysis, dir, workers);
                std::size_t failed = 0;
                for (const auto& cell : manifest["cells"])
                    failed += cell["status"] == "failed";
                if (failed > 0)
                    throw std::runtime_error(std::to_string(failed) + " sweep cell(s) failed, see manifest.json");
            };
        } else if (*analyze) {
            const auto cfg = resolve(an_common, nullptr);
            columns.date_format = gvm::date_format_from_string(date_format);
            dir = run_dir(an_common, "analyze");
            const auto fmt = format == "prices" ? gvm::InputFormat::Prices : gvm::InputFormat::Returns;
            job = [cfg, dir, fmt, input, columns] { gvm::analyze_file(input, fmt, columns, cfg.analysis, dir); };
        } else {
            dir = std::filesystem::path(gc_out) / (gc_id.empty() ? gvm::timestamped_id("graph") : gc_id);
            job = [gc, dir] {
                const auto out = gvm::graph_check(gc, dir);
                for (const auto& row : out["results"])
                    std::cout << "k=" << gvm::format_number(row["mean_degree"].get<double>())
                              << " realized=" << gvm::format_number(row["realized_mean_degree"].get<double>())
                              << " p=" << gvm::format_number(row["p_value"].get<double>())
                              << (row["pass"].get<bool>() ? " ok" : " FAIL") << '\n';
            };
        }
    } catch (const gvm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kUsage;
    }

    try {
        job();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    std::cout << dir.string() << '\n';
    return kOk;
}
