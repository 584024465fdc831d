#include "gvm/fitting.hpp"

#include "../support/oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace gvm;

namespace {

double integrate_t(double nu, double sigma)
{
    using boost::math::quadrature::gauss_kronrod;
    auto pdf = [&](double r) { return student_t_pdf(r, nu, sigma); };
    const double cuts[] = {-1e3, -1e2, -10.0, -1.0, 0.0, 1.0, 10.0, 1e2, 1e3};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < std::size(cuts); ++i)
        total += gauss_kronrod<double, 61>::integrate(pdf, cuts[i] * sigma, cuts[i + 1] * sigma, 20, 1e-13);
    return total;
}

/// Upper bound on the mass beyond |r| > L, from S(r) <= c (nu sigma^2)^((nu+1)/2) |r|^-(nu+1).
double t_tail_bound(double nu, double sigma, double L)
{
    const double c = 1.0 / (std::sqrt(nu) * sigma * beta_function(nu / 2.0, 0.5));
    return 2.0 * c * std::pow(nu * sigma * sigma, (nu + 1.0) / 2.0) * std::pow(L, -nu) / nu;
}

} // namespace

TEST_SUITE("fitting")
{
    TEST_CASE("beta function")
    {
        CHECK(beta_function(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(beta_function(0.5, 0.5) == doctest::Approx(std::numbers::pi).epsilon(1e-14));
        CHECK(beta_function(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
        CHECK_THROWS_AS(beta_function(0.0, 1.0), DomainError);
    }

    TEST_CASE("densities")
    {
        CHECK(student_t_pdf(0.0, 1.0, 1.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
        const double peak = std::tgamma(50.5) / (std::sqrt(100.0 * std::numbers::pi) * std::tgamma(50.0));
        CHECK(student_t_pdf(0.0, 100.0, 1.0) == doctest::Approx(peak).epsilon(1e-12));
        CHECK(student_t_pdf(0.0, 100.0, 1.0) == doctest::Approx(0.39795).epsilon(1e-5));
        CHECK(gaussian_pdf(0.0, 1.0) == doctest::Approx(0.398942).epsilon(1e-6));
        CHECK(gaussian_pdf(1.0, 1.0) == doctest::Approx(0.241971).epsilon(1e-6));
        CHECK_THROWS_AS(student_t_pdf(0.0, 0.0, 1.0), DomainError);
        CHECK_THROWS_AS(gaussian_pdf(0.0, -1.0), DomainError);
    }

    TEST_CASE("t density is normalized")
    {
        for (const double nu : {1.0, 3.0, 5.0, 10.0, 100.0})
            for (const double sigma : {0.1, 1.0, 10.0}) {
                CAPTURE(nu);
                CAPTURE(sigma);
                const double total = integrate_t(nu, sigma) + t_tail_bound(nu, sigma, 1e3 * sigma);
                CHECK(std::abs(total - 1.0) < 1e-6);
            }
    }

    TEST_CASE("t density approaches the normal")
    {
        double sup = 0.0;
        for (double r = -8.0; r <= 8.0; r += 0.01)
            sup = std::max(sup, std::abs(student_t_pdf(r, 1e4, 1.0) - gaussian_pdf(r, 1.0)));
        CHECK(sup < 1e-3);
    }

    TEST_CASE("analytic derivatives match finite differences")
    {
        const auto r = oracle::student_t_sample(4.0, 0.5, 2000, 21);
        const auto fit = fit_student_t(r);
        const double h = 1e-5;
        const double ln_nu = std::log(fit.param("nu"));
        const double ln_s = std::log(fit.param("sigma"));
        for (const auto& [dn, ds] : {std::pair{0.0, 0.0}, {0.4, -0.2}, {-0.7, 0.3}, {1.5, 0.5}}) {
            const double a = ln_nu + dn;
            const double b = ln_s + ds;
            const auto at = student_t_loglik(r.values, a, b);
            const double fd_nu =
                (student_t_loglik(r.values, a + h, b).value - student_t_loglik(r.values, a - h, b).value) / (2 * h);
            const double fd_s =
                (student_t_loglik(r.values, a, b + h).value - student_t_loglik(r.values, a, b - h).value) / (2 * h);
            const Eigen::Vector2d fd(fd_nu, fd_s);
            const double scale = std::max(fd.norm(), 1e-3);
            CHECK((at.gradient - fd).norm() / scale < 1e-5);

            const Eigen::Vector2d gn = (student_t_loglik(r.values, a + h, b).gradient -
                                        student_t_loglik(r.values, a - h, b).gradient) / (2 * h);
            const Eigen::Vector2d gs = (student_t_loglik(r.values, a, b + h).gradient -
                                        student_t_loglik(r.values, a, b - h).gradient) / (2 * h);
            Eigen::Matrix2d fd_h;
            fd_h << gn, gs;
            CHECK((at.hessian - fd_h).norm() / at.hessian.norm() < 1e-5);
        }
    }

    TEST_CASE("t fit recovers the sampling parameters")
    {
        const auto r = oracle::student_t_sample(5.0, 0.8, 100000, 22);
        const auto fit = fit_student_t(r);
        CHECK(fit.param("nu") >= 4.5);
        CHECK(fit.param("nu") <= 5.5);
        CHECK(fit.param("sigma") >= 0.78);
        CHECK(fit.param("sigma") <= 0.82);
        CHECK(fit.std_error("nu") > 0.0);
        CHECK(fit.std_error("sigma") > 0.0);
        CHECK(fit.n_samples == 100000);
        CHECK_FALSE(fit.at_bound);
        CHECK(student_t_loglik(r.values, std::log(fit.param("nu")), std::log(fit.param("sigma"))).gradient.norm() <
              1e-8);
    }

    TEST_CASE("t fit is scale equivariant")
    {
        const auto r = oracle::student_t_sample(3.0, 1.0, 5000, 23);
        const auto base = fit_student_t(r);
        for (const double c : {1e-3, -2.0, 40.0}) {
            ReturnSeries scaled = r;
            scaled.values *= c;
            const auto fit = fit_student_t(scaled);
            CHECK(fit.param("nu") == doctest::Approx(base.param("nu")).epsilon(1e-6));
            CHECK(fit.param("sigma") == doctest::Approx(std::abs(c) * base.param("sigma")).epsilon(1e-6));
        }
    }

    TEST_CASE("t fit on normal data runs to the upper bound or a large nu")
    {
        const auto fit = fit_student_t(oracle::normal_sample(1.0, 20000, 24));
        CHECK((fit.at_bound || fit.param("nu") > 30.0));
        CHECK(fit.param("sigma") == doctest::Approx(1.0).epsilon(0.03));
    }

    TEST_CASE("t fit input errors")
    {
        CHECK_THROWS_AS(fit_student_t(oracle::normal_sample(1.0, 10, 1)), TooShortSeries);
        ReturnSeries flat;
        flat.values = Eigen::VectorXd::Zero(200);
        CHECK_THROWS_AS(fit_student_t(flat), DegenerateSeries);
    }

    TEST_CASE("binned t fit lands near the sampling parameters")
    {
        const auto fit = fit_student_t_binned(oracle::student_t_sample(5.0, 0.8, 100000, 25), 101);
        CHECK(fit.method == "binned_lsq");
        CHECK(fit.param("nu") == doctest::Approx(5.0).epsilon(0.2));
        CHECK(fit.param("sigma") == doctest::Approx(0.8).epsilon(0.05));
    }

    TEST_CASE("gaussian fit")
    {
        ReturnSeries pm;
        pm.values = Eigen::Vector2d(-1.0, 1.0);
        CHECK(fit_gaussian(pm).param("sigma") == 1.0);

        const auto r = oracle::normal_sample(0.25, 1000000, 26);
        const auto fit = fit_gaussian(r);
        CHECK(fit.param("sigma") >= 0.2495);
        CHECK(fit.param("sigma") <= 0.2505);
        CHECK(fit.param("sigma") == doctest::Approx(std::sqrt(r.values.squaredNorm() / 1e6)).epsilon(1e-15));
        CHECK(fit.std_error("sigma") == doctest::Approx(fit.param("sigma") / std::sqrt(2e6)));
    }

    TEST_CASE("exponential decay fit")
    {
        AcfCurve exact;
        exact.values.resize(101);
        for (std::size_t tau = 0; tau <= 100; ++tau) {
            exact.lags.push_back(tau);
            exact.values[static_cast<Eigen::Index>(tau)] = std::exp(-static_cast<double>(tau) / 1000.0);
        }
        const auto fit = fit_exp_decay(exact);
        CHECK(fit.param("decay_rate") == doctest::Approx(1e-3).epsilon(1e-10));
        CHECK(fit.goodness < 1e-20);
        CHECK(fit.n_samples == 100);

        exact.values[50] = -0.1;
        exact.values[51] = 0.0;
        const auto holed = fit_exp_decay(exact);
        CHECK(holed.excluded == 2);
        CHECK(holed.param("decay_rate") == doctest::Approx(1e-3).epsilon(1e-10));

        AcfCurve growing{{0, 1, 2, 3}, Eigen::Vector4d(1.0, 0.1, 0.2, 0.4)};
        CHECK_THROWS_AS(fit_exp_decay(growing), DegenerateSeries);
        AcfCurve sparse{{0, 1, 2}, Eigen::Vector3d(1.0, 0.5, -0.2)};
        CHECK_THROWS(fit_exp_decay(sparse));
    }
}
