#include "gvm/measures.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gvm {

std::string to_string(SeriesSource source)
{
    return source == SeriesSource::Simulation ? "simulation" : "market-data";
}

ReturnSeries log_returns(const Eigen::Ref<const Eigen::VectorXd>& m_series)
{
    if (m_series.size() < 2)
        throw TooShortSeries("log_returns: need at least two values");

    ReturnSeries out;
    out.source = SeriesSource::Simulation;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(m_series.size() - 1));
    for (Eigen::Index t = 1; t < m_series.size(); ++t) {
        const double prev = std::abs(m_series[t - 1]);
        const double cur = std::abs(m_series[t]);
        if (prev > 0.0 && cur > 0.0)
            values.push_back(std::log(cur) - std::log(prev));
        else
            ++out.skipped;
    }
    out.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return out;
}

AcfCurve abs_autocorrelation(const ReturnSeries& r, std::span<const std::size_t> lags)
{
    const Eigen::Index T = r.size();
    for (const auto lag : lags)
        if (static_cast<Eigen::Index>(lag) + 2 > T)
            throw TooShortSeries("abs_autocorrelation: lag " + std::to_string(lag) + " needs at least " +
                                 std::to_string(lag + 2) + " returns");

    const Eigen::ArrayXd dev = r.values.array().abs() - r.values.array().abs().mean();
    const double denom = dev.square().sum();
    if (!(denom > 0.0))
        throw DegenerateSeries("abs_autocorrelation: |r| is constant");

    AcfCurve acf;
    acf.lags.assign(lags.begin(), lags.end());
    acf.values.resize(static_cast<Eigen::Index>(lags.size()));
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const auto tau = static_cast<Eigen::Index>(lags[k]);
        const Eigen::Index len = T - tau;
        acf.values[static_cast<Eigen::Index>(k)] = (dev.tail(len) * dev.head(len)).sum() / denom;
    }
    return acf;
}

AcfCurve abs_autocorrelation(const ReturnSeries& r, std::size_t max_lag)
{
    std::vector<std::size_t> lags(max_lag + 1);
    std::iota(lags.begin(), lags.end(), std::size_t{0});
    return abs_autocorrelation(r, lags);
}

std::vector<std::size_t> log_spaced_lags(std::size_t max_lag, std::size_t count)
{
    std::vector<std::size_t> lags;
    if (max_lag == 0 || count == 0)
        return lags;
    const double top = std::log(static_cast<double>(max_lag));
    for (std::size_t i = 0; i < count; ++i) {
        const double frac = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        const auto lag = static_cast<std::size_t>(std::llround(std::exp(frac * top)));
        const auto clamped = std::clamp<std::size_t>(lag, 1, max_lag);
        if (lags.empty() || clamped > lags.back())
            lags.push_back(clamped);
    }
    return lags;
}

Histogram histogram(const ReturnSeries& r, std::size_t bins)
{
    if (r.size() == 0)
        throw TooShortSeries("histogram: empty series");
    if (bins == 0)
        throw InvalidParameter("histogram: need at least one bin");

    double lo = r.values.minCoeff();
    double hi = r.values.maxCoeff();
    if (lo == hi) {
        lo -= 0.5 * static_cast<double>(bins);
        hi += 0.5 * static_cast<double>(bins);
    }
    const double width = (hi - lo) / static_cast<double>(bins);

    Histogram h;
    h.edges = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(bins) + 1, lo, hi);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bins));
    for (const double v : r.values) {
        auto b = static_cast<Eigen::Index>((v - lo) / width);
        b = std::clamp<Eigen::Index>(b, 0, static_cast<Eigen::Index>(bins) - 1);
        counts[b] += 1.0;
    }
    h.densities = counts / (static_cast<double>(r.size()) * width);
    return h;
}

Ecdf ecdf(const ReturnSeries& r)
{
    if (r.size() == 0)
        throw TooShortSeries("ecdf: empty series");
    Ecdf e;
    e.values = r.values;
    std::sort(e.values.begin(), e.values.end());
    const Eigen::Index T = r.size();
    e.fractions = Eigen::VectorXd::LinSpaced(T, 1.0, static_cast<double>(T)) / static_cast<double>(T);
    return e;
}

QqPoints qq_points(const ReturnSeries& r)
{
    const Eigen::Index T = r.size();
    if (T < 3)
        throw TooShortSeries("qq_points: need at least 3 values");
    const double mean = r.values.mean();
    const double sd = std::sqrt((r.values.array() - mean).square().mean());
    if (!(sd > 0.0))
        throw DegenerateSeries("qq_points: zero variance");

    QqPoints qq;
    qq.sample = (r.values.array() - mean) / sd;
    std::sort(qq.sample.begin(), qq.sample.end());
    qq.theoretical.resize(T);
    for (Eigen::Index i = 0; i < T; ++i)
        qq.theoretical[i] = Eigen::numext::ndtri((static_cast<double>(i) + 0.5) / static_cast<double>(T));
    return qq;
}

double qq_max_central_deviation(const QqPoints& qq, double fraction)
{
    const Eigen::Index T = qq.sample.size();
    const auto cut = static_cast<Eigen::Index>(std::floor(0.5 * (1.0 - fraction) * static_cast<double>(T)));
    const Eigen::Index len = T - 2 * cut;
    if (len <= 0)
        return 0.0;
    return (qq.theoretical.segment(cut, len) - qq.sample.segment(cut, len)).cwiseAbs().maxCoeff();
}

} // namespace gvm
