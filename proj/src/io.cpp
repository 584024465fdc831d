#include "gvm/io.hpp"

#include "gvm/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace gvm {

std::string format_number(double x)
{
    return fmt::format("{}", x);
}

void write_magnetization_csv(std::ostream& os, const Eigen::Ref<const Eigen::VectorXd>& m)
{
    os << "t,M\n";
    for (Eigen::Index t = 0; t < m.size(); ++t)
        os << t + 1 << ',' << format_number(m[t]) << '\n';
}

void write_returns_csv(std::ostream& os, const ReturnSeries& r)
{
    os << "t,r\n";
    for (Eigen::Index t = 0; t < r.size(); ++t)
        os << t + 1 << ',' << format_number(r.values[t]) << '\n';
}

void write_acf_csv(std::ostream& os, const AcfCurve& acf)
{
    os << "tau,A\n";
    for (std::size_t k = 0; k < acf.lags.size(); ++k)
        os << acf.lags[k] << ',' << format_number(acf.values[static_cast<Eigen::Index>(k)]) << '\n';
}

void write_histogram_csv(std::ostream& os, const Histogram& h)
{
    os << "bin_left,bin_right,density\n";
    for (Eigen::Index b = 0; b < h.densities.size(); ++b)
        os << format_number(h.edges[b]) << ',' << format_number(h.edges[b + 1]) << ','
           << format_number(h.densities[b]) << '\n';
}

void write_ecdf_csv(std::ostream& os, const Ecdf& e)
{
    os << "r,Phi\n";
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
        os << format_number(e.values[i]) << ',' << format_number(e.fractions[i]) << '\n';
}

void write_qq_csv(std::ostream& os, const QqPoints& qq)
{
    os << "theoretical,sample\n";
    for (Eigen::Index i = 0; i < qq.sample.size(); ++i)
        os << format_number(qq.theoretical[i]) << ',' << format_number(qq.sample[i]) << '\n';
}

ReturnSeries read_returns_csv(const std::filesystem::path& path, SeriesSource source)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open returns file " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("returns file is empty: " + path.string());

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            header.push_back(cell);
    }
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "r" || header[i] == "r\r")
            col = i;
    if (col == header.size())
        throw ParseError("returns file has no 'r' column: " + path.string());

    std::vector<double> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r")
            continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t i = 0; i <= col; ++i)
            if (!std::getline(ss, cell, ','))
                throw ParseError(fmt::format("{}:{}: missing 'r' field", path.string(), row));
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || !std::isfinite(v))
            throw ParseError(fmt::format("{}:{}: bad return value '{}'", path.string(), row, cell));
        values.push_back(v);
    }

    ReturnSeries r;
    r.source = source;
    r.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return r;
}

nlohmann::ordered_json to_json(const SimConfig& cfg)
{
    return {
        {"n", cfg.n},
        {"mean_degree", cfg.mean_degree},
        {"q", cfg.q},
        {"f", cfg.f},
        {"transient_mcs", cfg.transient_mcs},
        {"measure_mcs", cfg.measure_mcs},
        {"seed", cfg.seed},
        {"contrarian_field", to_string(cfg.contrarian_field)},
    };
}

nlohmann::ordered_json to_json(const NetworkStats& stats)
{
    return {{"realized_mean_degree", stats.realized_mean_degree}, {"edge_count", stats.edge_count}};
}

nlohmann::ordered_json to_json(const FitReport& rep)
{
    auto named = [](const std::vector<std::pair<std::string, double>>& items) {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [key, value] : items)
            j[key] = std::isfinite(value) ? nlohmann::ordered_json(value) : nlohmann::ordered_json(nullptr);
        return j;
    };
    nlohmann::ordered_json j;
    j["model"] = to_string(rep.model);
    j["method"] = rep.method;
    j["params"] = named(rep.params);
    j["std_errors"] = named(rep.std_errors);
    j[rep.goodness_name] = rep.goodness;
    j["n_samples"] = rep.n_samples;
    j["excluded"] = rep.excluded;
    if (rep.model == FitModel::StudentT) {
        j["iterations"] = rep.iterations;
        j["nu_at_bound"] = rep.at_bound;
    }
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j)
{
    write_text(path, j.dump(2) + "\n");
}

} // namespace gvm
