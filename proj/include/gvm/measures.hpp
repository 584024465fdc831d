#pragma once

#include "gvm/errors.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gvm {

enum class SeriesSource { Simulation, MarketData };

std::string to_string(SeriesSource source);

struct ReturnSeries {
    Eigen::VectorXd values;
    std::size_t skipped = 0; ///< returns dropped because |M| was zero at either end
    SeriesSource source = SeriesSource::Simulation;

    Eigen::Index size() const { return values.size(); }
};

struct AcfCurve {
    std::vector<std::size_t> lags;
    Eigen::VectorXd values;
};

struct Histogram {
    Eigen::VectorXd edges;     ///< bins + 1 edges
    Eigen::VectorXd densities; ///< integrates to one over the edges
};

struct Ecdf {
    Eigen::VectorXd values;    ///< sorted ascending
    Eigen::VectorXd fractions; ///< i / T, ties not merged
};

struct QqPoints {
    Eigen::VectorXd theoretical; ///< standard normal quantiles at (i - 0.5) / T
    Eigen::VectorXd sample;      ///< sorted standardized sample
};

/// r(t) = log|M(t)| - log|M(t-1)|. Pairs touching M = 0 are skipped and counted.
ReturnSeries log_returns(const Eigen::Ref<const Eigen::VectorXd>& m_series);

/// Central moment (1/T) sum (x - mean)^k.
template <typename Derived>
typename Derived::Scalar central_moment(const Eigen::DenseBase<Derived>& x, int k)
{
    using Scalar = typename Derived::Scalar;
    const auto centered = x.derived().array() - x.derived().mean();
    return centered.pow(Scalar(k)).mean();
}

/// Pearson kurtosis m4 / m2^2 (3 for a normal distribution).
template <typename Derived>
typename Derived::Scalar kurtosis(const Eigen::DenseBase<Derived>& x)
{
    using Scalar = typename Derived::Scalar;
    if (x.size() < 4)
        throw TooShortSeries("kurtosis: need at least 4 values");
    const auto centered = (x.derived().array() - x.derived().mean()).eval();
    const Scalar m2 = centered.square().mean();
    if (!(m2 > Scalar(0)))
        throw DegenerateSeries("kurtosis: zero variance");
    const Scalar m4 = centered.square().square().mean();
    return m4 / (m2 * m2);
}

inline double kurtosis(const ReturnSeries& r) { return kurtosis(r.values); }

/// Autocorrelation of |r| at the given lags. The mean of |r| and the
/// denominator run over all T terms; the numerator over T - lag terms.
/// Throws TooShortSeries if any lag > T - 2, DegenerateSeries if |r| is constant.
AcfCurve abs_autocorrelation(const ReturnSeries& r, std::span<const std::size_t> lags);

/// Lags 0..max_lag.
AcfCurve abs_autocorrelation(const ReturnSeries& r, std::size_t max_lag);

/// Distinct integer lags in [1, max_lag], roughly evenly spaced in log(lag).
std::vector<std::size_t> log_spaced_lags(std::size_t max_lag, std::size_t count);

/// Equal-width bins over [min, max]. A constant series gets unit-width bins
/// centred on its value.
Histogram histogram(const ReturnSeries& r, std::size_t bins);

Ecdf ecdf(const ReturnSeries& r);

QqPoints qq_points(const ReturnSeries& r);

/// max |theoretical - sample| over the central `fraction` of the points.
double qq_max_central_deviation(const QqPoints& qq, double fraction = 0.98);

} // namespace gvm
