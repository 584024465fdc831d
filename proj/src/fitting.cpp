#include "gvm/fitting.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>
#include <unsupported/Eigen/SpecialFunctions>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <limits>

namespace gvm {

std::string to_string(FitModel model)
{
    switch (model) {
    case FitModel::StudentT:
        return "student_t";
    case FitModel::Gaussian:
        return "gaussian";
    case FitModel::ExpDecay:
        return "exp_decay";
    }
    return "unknown";
}

namespace {

double lookup(const std::vector<std::pair<std::string, double>>& items, const std::string& name)
{
    for (const auto& [key, value] : items)
        if (key == name)
            return value;
    throw InvalidParameter("FitReport has no entry '" + name + "'");
}

double sample_variance(const Eigen::VectorXd& x)
{
    return (x.array() - x.mean()).square().mean();
}

struct OptimResult {
    Eigen::Vector2d x;
    StudentTLikelihood at;
    std::size_t iterations = 0;
    bool converged = false;
    bool at_bound = false;
};

// Gradient with the log(nu) component dropped when nu sits on a bound and the
// likelihood still pushes outward.
Eigen::Vector2d projected_gradient(const Eigen::Vector2d& g, const Eigen::Vector2d& x, double lo, double hi,
                                   bool& on_bound)
{
    Eigen::Vector2d p = g;
    on_bound = false;
    if ((x[0] >= hi && g[0] > 0.0) || (x[0] <= lo && g[0] < 0.0)) {
        p[0] = 0.0;
        on_bound = true;
    }
    return p;
}

// Maximizes the mean log-likelihood: BFGS with Armijo backtracking, then
// Newton steps on the analytic Hessian once it is negative definite.
OptimResult maximize_student_t(const Eigen::VectorXd& r, Eigen::Vector2d x, const StudentTFitOptions& opt)
{
    const double lo = std::log(opt.min_nu);
    const double hi = std::log(opt.max_nu);
    constexpr double max_step = 2.0;

    OptimResult res;
    x[0] = std::clamp(x[0], lo, hi);
    auto cur = student_t_loglik(r, x[0], x[1]);
    Eigen::Matrix2d inv_hess = Eigen::Matrix2d::Identity(); // of the negative log-likelihood

    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it;
        bool on_bound = false;
        const Eigen::Vector2d g = projected_gradient(cur.gradient, x, lo, hi, on_bound);
        if (g.norm() < opt.gradient_tolerance) {
            res.converged = true;
            res.at_bound = on_bound;
            break;
        }

        Eigen::Vector2d dir;
        const Eigen::Matrix2d neg_h = -cur.hessian;
        Eigen::LLT<Eigen::Matrix2d> llt(neg_h);
        if (on_bound) {
            dir = Eigen::Vector2d(0.0, neg_h(1, 1) > 0.0 ? g[1] / neg_h(1, 1) : g[1]);
        } else if (llt.info() == Eigen::Success && g.norm() < 1e-3) {
            dir = llt.solve(g);
        } else {
            dir = inv_hess * g;
            if (dir.dot(g) <= 0.0) {
                inv_hess.setIdentity();
                dir = g;
            }
        }
        const double len = dir.cwiseAbs().maxCoeff();
        if (len > max_step)
            dir *= max_step / len;

        double step = 1.0;
        Eigen::Vector2d next;
        StudentTLikelihood trial;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            next = x + step * dir;
            next[0] = std::clamp(next[0], lo, hi);
            trial = student_t_loglik(r, next[0], next[1]);
            const bool armijo = trial.value >= cur.value + 1e-4 * g.dot(next - x);
            // Near the optimum the value change drops below double resolution;
            // fall back to requiring a smaller gradient.
            const bool flat = std::abs(trial.value - cur.value) <= 1e-14 * std::abs(cur.value) &&
                              trial.gradient.norm() < cur.gradient.norm();
            if (std::isfinite(trial.value) && (armijo || flat)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No ascent possible at floating-point resolution.
            res.converged = false;
            res.at_bound = on_bound;
            break;
        }

        const Eigen::Vector2d s = next - x;
        const Eigen::Vector2d y = -(trial.gradient - cur.gradient);
        const double sy = s.dot(y);
        if (sy > 1e-16) {
            const double rho = 1.0 / sy;
            const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
            inv_hess = (I - rho * s * y.transpose()) * inv_hess * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        x = next;
        cur = trial;
    }
    res.x = x;
    res.at = cur;
    return res;
}

} // namespace

double FitReport::param(const std::string& name) const { return lookup(params, name); }
double FitReport::std_error(const std::string& name) const { return lookup(std_errors, name); }

StudentTLikelihood student_t_loglik(const Eigen::Ref<const Eigen::VectorXd>& r, double log_nu, double log_sigma)
{
    using Eigen::numext::digamma;
    using Eigen::numext::polygamma;
    const double nu = std::exp(log_nu);
    const double sigma = std::exp(log_sigma);
    const double scale2 = nu * sigma * sigma;

    const Eigen::ArrayXd z = r.array().square() / scale2;
    const double mean_log1p = z.log1p().mean();
    const double mean_w = (z / (1.0 + z)).mean();
    const double mean_w2 = (z / (1.0 + z).square()).mean();

    const double half_nu = 0.5 * nu;
    const double half_nu1 = 0.5 * (nu + 1.0);
    const double psi_diff = digamma(half_nu1) - digamma(half_nu);
    const double trigamma_diff = polygamma(1.0, half_nu1) - polygamma(1.0, half_nu);

    StudentTLikelihood out;
    out.value = -0.5 * std::log(scale2) - log_beta(half_nu, 0.5) - half_nu1 * mean_log1p;
    out.gradient[0] = -0.5 + half_nu * psi_diff - half_nu * mean_log1p + half_nu1 * mean_w;
    out.gradient[1] = -1.0 + (nu + 1.0) * mean_w;
    out.hessian(0, 0) = half_nu * psi_diff + 0.25 * nu * nu * trigamma_diff - half_nu * mean_log1p + nu * mean_w -
                        half_nu1 * mean_w2;
    out.hessian(0, 1) = out.hessian(1, 0) = nu * mean_w - (nu + 1.0) * mean_w2;
    out.hessian(1, 1) = -2.0 * (nu + 1.0) * mean_w2;
    return out;
}

FitReport fit_student_t(const ReturnSeries& r, const StudentTFitOptions& options)
{
    if (r.size() < 50)
        throw TooShortSeries("fit_student_t: need at least 50 returns");
    const double var = sample_variance(r.values);
    if (!(var > 0.0))
        throw DegenerateSeries("fit_student_t: zero variance");

    const double k = kurtosis(r.values);
    const double nu_moment = k > 3.0 ? std::max(4.5, 6.0 / (k - 3.0) + 4.0) : 30.0;
    const std::array<double, 4> starts = {nu_moment, 2.5, 10.0, 50.0};

    OptimResult best;
    best.at.value = -std::numeric_limits<double>::infinity();
    std::size_t total_iterations = 0;
    for (const double nu0 : starts) {
        const double sigma0 = nu0 > 2.0 ? std::sqrt(var * (nu0 - 2.0) / nu0) : 0.5 * std::sqrt(var);
        auto res = maximize_student_t(r.values, Eigen::Vector2d(std::log(nu0), std::log(sigma0)), options);
        total_iterations += res.iterations;
        if (res.converged && res.at.value > best.at.value)
            best = res;
    }
    if (!best.converged)
        throw NonConvergence("fit_student_t: optimizer did not reach the gradient tolerance");

    const double nu = std::exp(best.x[0]);
    const double sigma = std::exp(best.x[1]);
    const double T = static_cast<double>(r.size());

    FitReport rep;
    rep.model = FitModel::StudentT;
    rep.method = "mle";
    rep.params = {{"nu", nu}, {"sigma", sigma}};
    rep.goodness_name = "log_likelihood";
    rep.goodness = best.at.value * T;
    rep.n_samples = static_cast<std::size_t>(r.size());
    rep.iterations = total_iterations;
    rep.at_bound = best.at_bound;

    // Observed information in log coordinates, mapped back by the delta method.
    const Eigen::Matrix2d info = -T * best.at.hessian;
    if (best.at_bound) {
        const double var_b = info(1, 1) > 0.0 ? 1.0 / info(1, 1) : std::numeric_limits<double>::quiet_NaN();
        rep.std_errors = {{"nu", std::numeric_limits<double>::quiet_NaN()}, {"sigma", sigma * std::sqrt(var_b)}};
    } else {
        const Eigen::Matrix2d cov = info.inverse();
        rep.std_errors = {{"nu", nu * std::sqrt(cov(0, 0))}, {"sigma", sigma * std::sqrt(cov(1, 1))}};
    }
    return rep;
}

namespace {

struct BinnedResidual : Eigen::DenseFunctor<double> {
    Eigen::VectorXd centers;
    Eigen::VectorXd densities;

    BinnedResidual(Eigen::VectorXd c, Eigen::VectorXd d)
        : Eigen::DenseFunctor<double>(2, static_cast<int>(c.size())), centers(std::move(c)), densities(std::move(d))
    {
    }

    int operator()(const InputType& x, ValueType& fvec) const
    {
        const double nu = std::exp(x[0]);
        const double sigma = std::exp(x[1]);
        for (Eigen::Index i = 0; i < centers.size(); ++i)
            fvec[i] = student_t_pdf(centers[i], nu, sigma) - densities[i];
        return 0;
    }
};

} // namespace

FitReport fit_student_t_binned(const ReturnSeries& r, std::size_t bins)
{
    if (r.size() < 50)
        throw TooShortSeries("fit_student_t_binned: need at least 50 returns");
    const double var = sample_variance(r.values);
    if (!(var > 0.0))
        throw DegenerateSeries("fit_student_t_binned: zero variance");

    const auto h = histogram(r, bins);
    const Eigen::VectorXd centers = 0.5 * (h.edges.head(h.edges.size() - 1) + h.edges.tail(h.edges.size() - 1));

    Eigen::NumericalDiff<BinnedResidual, Eigen::Central> functor(BinnedResidual(centers, h.densities));
    Eigen::LevenbergMarquardt<decltype(functor)> lm(functor);
    lm.setMaxfev(2000);

    // Start from the likelihood estimate when available.
    Eigen::VectorXd x(2);
    try {
        const auto mle = fit_student_t(r);
        x << std::log(std::min(mle.param("nu"), 1e3)), std::log(mle.param("sigma"));
    } catch (const NonConvergence&) {
        x << std::log(5.0), std::log(std::sqrt(var * 0.6));
    }
    const auto status = lm.minimize(x);
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
        throw NonConvergence("fit_student_t_binned: improper input");

    Eigen::VectorXd resid(centers.size());
    functor(x, resid);
    Eigen::MatrixXd jac(centers.size(), 2);
    functor.df(x, jac);
    const double dof = std::max<double>(1.0, static_cast<double>(centers.size()) - 2.0);
    const double s2 = resid.squaredNorm() / dof;
    const Eigen::Matrix2d cov = s2 * (jac.transpose() * jac).inverse();

    const double nu = std::exp(x[0]);
    const double sigma = std::exp(x[1]);
    FitReport rep;
    rep.model = FitModel::StudentT;
    rep.method = "binned_lsq";
    rep.params = {{"nu", nu}, {"sigma", sigma}};
    rep.std_errors = {{"nu", nu * std::sqrt(cov(0, 0))}, {"sigma", sigma * std::sqrt(cov(1, 1))}};
    rep.goodness_name = "residual_sum_squares";
    rep.goodness = resid.squaredNorm();
    rep.n_samples = static_cast<std::size_t>(r.size());
    rep.iterations = static_cast<std::size_t>(lm.iterations());
    return rep;
}

FitReport fit_gaussian(const ReturnSeries& r)
{
    if (r.size() < 2)
        throw TooShortSeries("fit_gaussian: need at least 2 returns");
    if (!(sample_variance(r.values) > 0.0))
        throw DegenerateSeries("fit_gaussian: zero variance");

    const double T = static_cast<double>(r.size());
    const double sigma2 = r.values.squaredNorm() / T;
    const double sigma = std::sqrt(sigma2);

    FitReport rep;
    rep.model = FitModel::Gaussian;
    rep.method = "mle";
    rep.params = {{"sigma", sigma}};
    rep.std_errors = {{"sigma", sigma / std::sqrt(2.0 * T)}};
    rep.goodness_name = "log_likelihood";
    rep.goodness = -0.5 * T * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
    rep.n_samples = static_cast<std::size_t>(r.size());
    return rep;
}

FitReport fit_exp_decay(const AcfCurve& acf)
{
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t excluded = 0;
    for (std::size_t k = 0; k < acf.lags.size(); ++k) {
        if (acf.lags[k] == 0)
            continue;
        const double a = acf.values[static_cast<Eigen::Index>(k)];
        if (a > 0.0) {
            xs.push_back(static_cast<double>(acf.lags[k]));
            ys.push_back(std::log(a));
        } else {
            ++excluded;
        }
    }
    if (xs.size() < 3)
        throw DegenerateSeries("fit_exp_decay: fewer than 3 lags with positive autocorrelation");

    const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
    const Eigen::Map<const Eigen::VectorXd> x(xs.data(), n);
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
    const double xm = x.mean();
    const double ym = y.mean();
    const double sxx = (x.array() - xm).square().sum();
    const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
    if (!(sxx > 0.0))
        throw DegenerateSeries("fit_exp_decay: lags do not vary");
    const double slope = sxy / sxx;
    if (slope > 0.0)
        throw DegenerateSeries("fit_exp_decay: autocorrelation grows with lag");
    const double intercept = ym - slope * xm;
    const double rss = (y.array() - intercept - slope * x.array()).square().sum();
    const double s2 = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;

    FitReport rep;
    rep.model = FitModel::ExpDecay;
    rep.method = "log_linear_lsq";
    rep.params = {{"decay_rate", -slope}, {"intercept", intercept}};
    rep.std_errors = {{"decay_rate", std::sqrt(s2 / sxx)},
                      {"intercept", std::sqrt(s2 * (1.0 / static_cast<double>(n) + xm * xm / sxx))}};
    rep.goodness_name = "residual_sum_squares";
    rep.goodness = rss;
    rep.n_samples = xs.size();
    rep.excluded = excluded;
    return rep;
}

} // namespace gvm
