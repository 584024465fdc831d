#include "gvm/pipeline.hpp"

#include "gvm/errors.hpp"
#include "gvm/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

namespace gvm {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string to_string(NoiseMode mode)
{
    switch (mode) {
    case NoiseMode::AtQc:
        return "at_qc";
    case NoiseMode::BelowQc:
        return "below_qc";
    case NoiseMode::AboveQc:
        return "above_qc";
    case NoiseMode::Explicit:
        return "explicit";
    }
    return "unknown";
}

NoiseMode noise_mode_from_string(const std::string& name)
{
    if (name == "at_qc")
        return NoiseMode::AtQc;
    if (name == "below_qc")
        return NoiseMode::BelowQc;
    if (name == "above_qc")
        return NoiseMode::AboveQc;
    if (name == "explicit")
        return NoiseMode::Explicit;
    throw ConfigError("unknown noise_mode '" + name + "' (expected at_qc|below_qc|above_qc|explicit)");
}

namespace {

std::string strip(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text)
{
    const auto s = strip(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
    return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& text)
{
    const auto s = strip(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("'" + key + "': expected a nonnegative integer, got '" + text + "'");
    return v;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!strip(item).empty())
            items.push_back(strip(item));
    return items;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& text)
{
    std::vector<double> values;
    for (const auto& item : split_list(text))
        values.push_back(parse_real(key, item));
    return values;
}

void set_simulation_key(SimConfig& sim, const std::string& key, const std::string& value)
{
    const auto full = "simulation." + key;
    if (key == "n")
        sim.n = parse_count(full, value);
    else if (key == "mean_degree")
        sim.mean_degree = parse_real(full, value);
    else if (key == "q")
        sim.q = parse_real(full, value);
    else if (key == "f")
        sim.f = parse_real(full, value);
    else if (key == "transient_mcs")
        sim.transient_mcs = parse_count(full, value);
    else if (key == "measure_mcs")
        sim.measure_mcs = parse_count(full, value);
    else if (key == "seed")
        sim.seed = parse_count(full, value);
    else if (key == "contrarian_field") {
        try {
            sim.contrarian_field = contrarian_field_from_string(strip(value));
        } catch (const InvalidParameter& e) {
            throw ConfigError(e.what());
        }
    } else
        throw ConfigError("unknown key '" + full + "'");
}

void set_key(ProjectConfig& cfg, const std::string& section, const std::string& key, const std::string& value)
{
    if (section == "simulation") {
        set_simulation_key(cfg.simulation, key, value);
        set_simulation_key(cfg.sweep.base, key, value);
    } else if (section == "sweep") {
        const auto full = "sweep." + key;
        if (key == "mean_degrees")
            cfg.sweep.mean_degrees = parse_real_list(full, value);
        else if (key == "fractions")
            cfg.sweep.fractions = parse_real_list(full, value);
        else if (key == "noise_mode")
            cfg.sweep.noise_mode = noise_mode_from_string(strip(value));
        else if (key == "q_values")
            cfg.sweep.q_values = parse_real_list(full, value);
        else if (key == "replicas")
            cfg.sweep.replicas = parse_count(full, value);
        else
            throw ConfigError("unknown key '" + full + "'");
    } else if (section == "analysis") {
        const auto full = "analysis." + key;
        if (key == "bins")
            cfg.analysis.bins = parse_count(full, value);
        else if (key == "max_lag")
            cfg.analysis.max_lag = parse_count(full, value);
        else if (key == "acf_points")
            cfg.analysis.acf_points = parse_count(full, value);
        else if (key == "fits") {
            cfg.analysis.student_t = cfg.analysis.gaussian = cfg.analysis.exp_decay = false;
            cfg.analysis.binned_student_t = false;
            for (const auto& name : split_list(value)) {
                if (name == "student_t")
                    cfg.analysis.student_t = true;
                else if (name == "gaussian")
                    cfg.analysis.gaussian = true;
                else if (name == "exp_decay")
                    cfg.analysis.exp_decay = true;
                else if (name == "student_t_binned")
                    cfg.analysis.binned_student_t = true;
                else
                    throw ConfigError("unknown fit '" + name + "' in " + full);
            }
        } else
            throw ConfigError("unknown key '" + full + "'");
    } else if (section == "qc") {
        cfg.qc[parse_real("qc." + key, key)] = parse_real("qc." + key, value);
    } else {
        throw ConfigError("unknown section [" + section + "]");
    }
}

json fits_list(const AnalysisOptions& opt)
{
    json fits = json::array();
    if (opt.student_t)
        fits.push_back("student_t");
    if (opt.gaussian)
        fits.push_back("gaussian");
    if (opt.exp_decay)
        fits.push_back("exp_decay");
    if (opt.binned_student_t)
        fits.push_back("student_t_binned");
    return fits;
}

template <typename Writer>
void write_csv(const fs::path& path, Writer&& writer)
{
    std::ostringstream os;
    writer(os);
    write_text(path, os.str());
}

json fit_params(const FitReport& rep)
{
    json j = json::object();
    for (const auto& [k, v] : rep.params)
        j[k] = v;
    return j;
}

} // namespace

ProjectConfig load_config(const fs::path& path)
{
    if (!fs::exists(path))
        throw ConfigError("config file not found: " + path.string());
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ProjectConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty())
            throw ConfigError("key '" + section + "' outside a section");
        for (const auto& [key, value] : body)
            set_key(cfg, section, key, value.get_value<std::string>());
    }
    return cfg;
}

void apply_override(ProjectConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    set_key(cfg, strip(assignment.substr(0, dot)), strip(assignment.substr(dot + 1, eq - dot - 1)),
            assignment.substr(eq + 1));
}

json to_json(const AnalysisOptions& opt)
{
    return {{"bins", opt.bins}, {"max_lag", opt.max_lag}, {"acf_points", opt.acf_points}, {"fits", fits_list(opt)}};
}

json to_json(const SweepSpec& spec, const QcTable& qc)
{
    json qc_json = json::object();
    for (const auto& [k, v] : qc)
        qc_json[format_number(k)] = v;
    return {{"mean_degrees", spec.mean_degrees}, {"fractions", spec.fractions},
            {"noise_mode", to_string(spec.noise_mode)}, {"q_values", spec.q_values},
            {"replicas", spec.replicas}, {"base", to_json(spec.base)}, {"qc", qc_json}};
}

json analyze_series(const ReturnSeries& r, const AnalysisOptions& opt, const fs::path& dir, bool strict)
{
    fs::create_directories(dir);
    json summary;
    summary["returns"] = {{"count", r.size()}, {"skipped", r.skipped}, {"source", to_string(r.source)}};
    json skipped = json::object();
    json fits = json::object();

    // Runs one stage; in lenient mode a failure writes `placeholder` (if any)
    // and is recorded instead of propagated.
    auto stage = [&](const std::string& name, auto&& body, const char* placeholder_file = nullptr,
                     const char* placeholder_header = nullptr) {
        try {
            body();
        } catch (const std::exception& e) {
            if (strict)
                throw;
            skipped[name] = e.what();
            if (placeholder_file)
                write_text(dir / placeholder_file, std::string(placeholder_header) + "\n");
        }
    };

    write_csv(dir / "returns.csv", [&](std::ostream& os) { write_returns_csv(os, r); });

    stage("kurtosis", [&] { summary["kurtosis"] = kurtosis(r); });

    std::optional<AcfCurve> acf;
    stage(
        "acf",
        [&] {
            if (r.size() < 3)
                throw TooShortSeries("acf: need at least 3 returns");
            const auto max_lag = opt.max_lag > 0 ? opt.max_lag : static_cast<std::size_t>(r.size()) - 2;
            std::vector<std::size_t> lags{0};
            for (const auto lag : log_spaced_lags(max_lag, opt.acf_points))
                lags.push_back(lag);
            acf = abs_autocorrelation(r, lags);
            write_csv(dir / "acf.csv", [&](std::ostream& os) { write_acf_csv(os, *acf); });
        },
        "acf.csv", "tau,A");

    stage(
        "histogram",
        [&] {
            const auto h = histogram(r, opt.bins);
            write_csv(dir / "hist.csv", [&](std::ostream& os) { write_histogram_csv(os, h); });
        },
        "hist.csv", "bin_left,bin_right,density");

    stage(
        "ecdf",
        [&] {
            const auto e = ecdf(r);
            summary["ecdf_median"] = e.values[(e.values.size() - 1) / 2];
            write_csv(dir / "ecdf.csv", [&](std::ostream& os) { write_ecdf_csv(os, e); });
        },
        "ecdf.csv", "r,Phi");

    stage(
        "qq",
        [&] {
            const auto qq = qq_points(r);
            summary["qq_max_central_deviation"] = qq_max_central_deviation(qq);
            write_csv(dir / "qq.csv", [&](std::ostream& os) { write_qq_csv(os, qq); });
        },
        "qq.csv", "theoretical,sample");

    std::optional<FitReport> t_fit;
    std::optional<FitReport> g_fit;
    if (opt.student_t)
        stage("fit_student_t", [&] {
            t_fit = fit_student_t(r);
            write_json(dir / "fit_student_t.json", to_json(*t_fit));
            fits["student_t"] = fit_params(*t_fit);
        });
    if (opt.binned_student_t)
        stage("fit_student_t_binned", [&] {
            const auto rep = fit_student_t_binned(r, opt.bins);
            write_json(dir / "fit_student_t_binned.json", to_json(rep));
            fits["student_t_binned"] = fit_params(rep);
        });
    if (opt.gaussian)
        stage("fit_gaussian", [&] {
            g_fit = fit_gaussian(r);
            write_json(dir / "fit_gaussian.json", to_json(*g_fit));
            fits["gaussian"] = fit_params(*g_fit);
        });
    if (opt.exp_decay)
        stage("fit_exp", [&] {
            if (!acf)
                throw DegenerateSeries("fit_exp: no autocorrelation curve");
            const auto rep = fit_exp_decay(*acf);
            write_json(dir / "fit_exp.json", to_json(rep));
            fits["exp_decay"] = fit_params(rep);
        });

    // Density of |r| next to the folded model densities 2 S(|r|) and 2 g(|r|).
    stage(
        "folded_density",
        [&] {
            ReturnSeries folded{r.values.cwiseAbs(), 0, r.source};
            const auto h = histogram(folded, opt.bins);
            write_csv(dir / "folded_density.csv", [&](std::ostream& os) {
                os << "bin_left,bin_right,density,student_t,gaussian\n";
                for (Eigen::Index b = 0; b < h.densities.size(); ++b) {
                    const double c = 0.5 * (h.edges[b] + h.edges[b + 1]);
                    os << format_number(h.edges[b]) << ',' << format_number(h.edges[b + 1]) << ','
                       << format_number(h.densities[b]) << ','
                       << (t_fit ? format_number(2.0 * student_t_pdf(c, t_fit->param("nu"), t_fit->param("sigma")))
                                 : std::string())
                       << ','
                       << (g_fit ? format_number(2.0 * gaussian_pdf(c, g_fit->param("sigma"))) : std::string())
                       << '\n';
                }
            });
        },
        "folded_density.csv", "bin_left,bin_right,density,student_t,gaussian");

    summary["fits"] = fits;
    summary["skipped_stages"] = skipped;
    return summary;
}

json run_single(const SimConfig& sim, const AnalysisOptions& opt, const fs::path& dir)
{
    sim.validate();
    fs::create_directories(dir);
    const auto bundle = run_simulation(sim);
    write_csv(dir / "magnetization.csv", [&](std::ostream& os) { write_magnetization_csv(os, bundle.magnetization); });

    ReturnSeries r;
    if (bundle.magnetization.size() >= 2)
        r = log_returns(bundle.magnetization);

    json meta;
    meta["config"] = to_json(sim);
    meta["analysis"] = to_json(opt);
    meta["network"] = to_json(bundle.network_stats);
    meta["mean_abs_magnetization"] =
        bundle.magnetization.size() > 0 ? bundle.magnetization.cwiseAbs().mean() : 0.0;
    meta["summary"] = analyze_series(r, opt, dir, false);
    write_json(dir / "config.json", meta);
    return meta;
}

std::vector<SweepCell> resolve_cells(const SweepSpec& spec, const QcTable& qc)
{
    if (spec.mean_degrees.empty())
        throw ConfigError("sweep: empty mean_degrees list");
    if (spec.fractions.empty())
        throw ConfigError("sweep: empty fractions list");
    if (spec.replicas == 0)
        throw ConfigError("sweep: replicas must be at least 1");
    if (spec.noise_mode == NoiseMode::Explicit && spec.q_values.empty())
        throw ConfigError("sweep: explicit noise mode needs q_values");

    std::vector<SweepCell> cells;
    for (const double k : spec.mean_degrees) {
        std::vector<double> qs;
        if (spec.noise_mode == NoiseMode::Explicit) {
            qs = spec.q_values;
        } else {
            const auto qc_value = lookup_qc(qc, k);
            if (!qc_value)
                throw ConfigError(fmt::format("sweep: no q_c entry for mean degree {}", k));
            const double factor = spec.noise_mode == NoiseMode::BelowQc   ? 0.9
                                  : spec.noise_mode == NoiseMode::AboveQc ? 1.1
                                                                          : 1.0;
            qs = {*qc_value * factor};
        }
        for (const double q : qs)
            for (const double f : spec.fractions)
                for (std::size_t rep = 0; rep < spec.replicas; ++rep) {
                    SweepCell cell;
                    cell.index = cells.size();
                    cell.mean_degree = k;
                    cell.q = q;
                    cell.f = f;
                    cell.replica = rep;
                    cell.seed = derive_seed(spec.base.seed, cell.index);
                    cell.name = fmt::format("k{:.6g}_q{:.6g}_f{:.6g}_r{}", k, q, f, rep);
                    cells.push_back(std::move(cell));
                }
    }
    return cells;
}

json run_sweep(const SweepSpec& spec, const QcTable& qc, const AnalysisOptions& opt, const fs::path& dir,
               std::size_t workers)
{
    const auto cells = resolve_cells(spec, qc);
    for (const auto& cell : cells) {
        SimConfig c = spec.base;
        c.mean_degree = cell.mean_degree;
        c.q = cell.q;
        c.f = cell.f;
        c.validate();
    }
    fs::create_directories(dir);

    std::vector<std::string> errors(cells.size());
    std::vector<char> done(cells.size(), 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const auto& cell = cells[i];
            SimConfig c = spec.base;
            c.mean_degree = cell.mean_degree;
            c.q = cell.q;
            c.f = cell.f;
            c.seed = cell.seed;
            try {
                run_single(c, opt, dir / cell.name);
                done[i] = 1;
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, cells.size()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
    }

    json manifest;
    manifest["sweep"] = to_json(spec, qc);
    manifest["analysis"] = to_json(opt);
    json list = json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& cell = cells[i];
        json entry = {{"index", cell.index}, {"name", cell.name},       {"mean_degree", cell.mean_degree},
                      {"q", cell.q},         {"f", cell.f},             {"replica", cell.replica},
                      {"seed", cell.seed},   {"status", done[i] ? "done" : "failed"}};
        if (!done[i])
            entry["error"] = errors[i];
        list.push_back(std::move(entry));
    }
    manifest["cells"] = std::move(list);
    write_json(dir / "manifest.json", manifest);
    return manifest;
}

json analyze_file(const fs::path& input, InputFormat format, const ColumnSpec& columns, const AnalysisOptions& opt,
                  const fs::path& dir)
{
    json meta;
    ReturnSeries r;
    if (format == InputFormat::Returns) {
        r = read_returns_csv(input);
        meta["input"] = {{"path", input.filename().string()}, {"format", "returns"}};
    } else {
        const auto prices = parse_prices(input, columns);
        r = price_log_returns(prices);
        meta["input"] = {{"path", input.filename().string()},
                         {"format", "prices"},
                         {"symbol", prices.symbol},
                         {"closes", prices.size()},
                         {"gaps", prices.gaps}};
    }
    meta["analysis"] = to_json(opt);
    meta["summary"] = analyze_series(r, opt, dir, true);
    write_json(dir / "summary.json", meta);
    return meta;
}

json graph_check(const GraphCheckOptions& opt, const fs::path& dir)
{
    fs::create_directories(dir);
    std::ostringstream csv;
    csv << "mean_degree,k,count,p_empirical,p_poisson\n";
    json results = json::array();
    std::uint64_t counter = 0;
    for (const double mean_degree : opt.mean_degrees) {
        DegreeHistogram pooled;
        for (std::size_t j = 0; j < opt.networks; ++j) {
            const auto net = generate_er(opt.n, mean_degree, derive_seed(opt.seed, counter++));
            accumulate_degrees(pooled, net);
            if (j == 0 && opt.edge_list) {
                std::ostringstream edges;
                write_edge_list(edges, net);
                write_text(dir / fmt::format("edges_k{:.6g}.txt", mean_degree), edges.str());
            }
        }
        double total = 0.0;
        double weighted = 0.0;
        for (const auto& [k, count] : pooled) {
            total += static_cast<double>(count);
            weighted += static_cast<double>(k * count);
        }
        for (const auto& [k, count] : pooled)
            csv << format_number(mean_degree) << ',' << k << ',' << count << ','
                << format_number(static_cast<double>(count) / total) << ','
                << format_number(poisson_pmf(k, mean_degree)) << '\n';

        const double realized = weighted / total;
        const double rel_error = std::abs(realized - mean_degree) / mean_degree;
        const auto chi = poisson_chi_square(pooled, mean_degree);
        results.push_back({{"mean_degree", mean_degree},
                           {"realized_mean_degree", realized},
                           {"relative_error", rel_error},
                           {"chi_square", chi.statistic},
                           {"dof", chi.dof},
                           {"p_value", chi.p_value},
                           {"pass", chi.p_value >= opt.alpha && rel_error <= 0.01}});
    }
    write_text(dir / "degree_distribution.csv", csv.str());
    json out = {{"n", opt.n}, {"networks", opt.networks}, {"seed", opt.seed}, {"alpha", opt.alpha},
                {"results", results}};
    write_json(dir / "graph_check.json", out);
    return out;
}

std::string timestamped_id(const std::string& prefix)
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", &tm);
    return prefix + "-" + buf;
}

} // namespace gvm
