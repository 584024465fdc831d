#pragma once

#include "gvm/errors.hpp"
#include "gvm/measures.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace gvm {

enum class FitModel { StudentT, Gaussian, ExpDecay };

std::string to_string(FitModel model);

struct FitReport {
    FitModel model = FitModel::Gaussian;
    /// Named parameters in a fixed order: (nu, sigma), (sigma) or (decay_rate, intercept).
    std::vector<std::pair<std::string, double>> params;
    std::vector<std::pair<std::string, double>> std_errors;
    std::string goodness_name; ///< "log_likelihood" or "residual_sum_squares"
    double goodness = 0.0;
    std::size_t n_samples = 0;
    std::size_t excluded = 0;
    std::string method; ///< "mle", "binned_lsq" or "log_linear_lsq"
    std::size_t iterations = 0;
    bool at_bound = false; ///< nu hit the upper search bound (near-Gaussian data)

    double param(const std::string& name) const;
    double std_error(const std::string& name) const;
};

template <typename Scalar>
Scalar log_beta(Scalar a, Scalar b)
{
    using std::lgamma;
    return lgamma(a) + lgamma(b) - lgamma(a + b);
}

/// B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b), via log-gamma.
template <typename Scalar>
Scalar beta_function(Scalar a, Scalar b)
{
    using std::exp;
    if (!(a > Scalar(0)) || !(b > Scalar(0)))
        throw DomainError("beta_function: arguments must be positive");
    return exp(log_beta(a, b));
}

/// Zero-mean Student's t density with nu degrees of freedom and scale sigma.
template <typename Scalar>
Scalar student_t_pdf(Scalar r, Scalar nu, Scalar sigma)
{
    using std::exp;
    using std::log;
    using std::log1p;
    if (!(nu > Scalar(0)) || !(sigma > Scalar(0)))
        throw DomainError("student_t_pdf: nu and sigma must be positive");
    const Scalar scale2 = nu * sigma * sigma;
    return exp(-Scalar(0.5) * log(scale2) - log_beta(nu / Scalar(2), Scalar(0.5)) -
               Scalar(0.5) * (nu + Scalar(1)) * log1p(r * r / scale2));
}

template <typename Scalar>
Scalar gaussian_pdf(Scalar r, Scalar sigma)
{
    using std::exp;
    using std::sqrt;
    if (!(sigma > Scalar(0)))
        throw DomainError("gaussian_pdf: sigma must be positive");
    const Scalar z = r / sigma;
    return exp(Scalar(-0.5) * z * z) / (sigma * sqrt(Scalar(2) * std::numbers::pi_v<Scalar>));
}

/// Mean per-sample Student's t log-likelihood and its derivatives in
/// (log nu, log sigma) coordinates.
struct StudentTLikelihood {
    double value = 0.0;
    Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
};

StudentTLikelihood student_t_loglik(const Eigen::Ref<const Eigen::VectorXd>& r, double log_nu, double log_sigma);

struct StudentTFitOptions {
    double gradient_tolerance = 1e-8; ///< on the mean log-likelihood gradient
    std::size_t max_iterations = 500;
    double max_nu = 1e6;
    double min_nu = 0.05;
};

/// Maximum likelihood (nu, sigma) with the location fixed at zero. Standard
/// errors from the observed information. Throws TooShortSeries below 50
/// samples, DegenerateSeries on zero variance, NonConvergence otherwise.
FitReport fit_student_t(const ReturnSeries& r, const StudentTFitOptions& options = {});

/// Least-squares fit of the density to a `bins`-bin histogram.
FitReport fit_student_t_binned(const ReturnSeries& r, std::size_t bins = 101);

/// sigma^2 = (1/T) sum r^2, standard error sigma / sqrt(2T).
FitReport fit_gaussian(const ReturnSeries& r);

/// Line fit of ln A(lag) against lag over positive lags with A > 0; the slope
/// is -decay_rate. Lag zero is ignored; non-positive points are excluded and counted.
FitReport fit_exp_decay(const AcfCurve& acf);

} // namespace gvm
