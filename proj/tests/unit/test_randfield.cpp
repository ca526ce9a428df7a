#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "kwcdf/errors.hpp"
#include "kwcdf/problems.hpp"
#include "kwcdf/randfield.hpp"
#include "oracles.hpp"

using namespace kwcdf;

namespace {

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double m4 = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    const auto n = static_cast<double>(v.size());
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    for (double x : v) {
        const double d = x - m.mean;
        m.var += d * d;
        m.m4 += d * d * d * d;
    }
    m.var /= n;
    m.m4 /= n;
    return m;
}

// Checks sample mean and variance against targets within 4 standard errors.
void check_moments(const std::vector<double>& v, double mean, double std) {
    const Moments m = moments(v);
    const auto n = static_cast<double>(v.size());
    const double se_mean = std::sqrt(m.var / n);
    const double se_var = std::sqrt((m.m4 - m.var * m.var) / n);
    CHECK(std::abs(m.mean - mean) < 4.0 * se_mean);
    CHECK(std::abs(m.var - std * std) < 4.0 * se_var);
}

}  // namespace

TEST_CASE("moment inversion") {
    SUBCASE("degenerate") {
        const ScalarDistSpec s = lognormal_params_from_moments(1.0, 0.0);
        CHECK(s.mu == 0.0);
        CHECK(s.sigma2 == 0.0);
    }
    SUBCASE("roughness and slope statistics") {
        for (auto [mean, std, mu_frozen] : {std::array<double, 3>{0.037, 0.00925, -3.3274},
                                            std::array<double, 3>{0.01, 0.0025, -4.6355}}) {
            const ScalarDistSpec s = lognormal_params_from_moments(mean, std);
            const auto o = oracle::lognormal_params(mean, std);
            CHECK(s.mu == doctest::Approx(o[0]).epsilon(1e-12));
            CHECK(s.sigma2 == doctest::Approx(o[1]).epsilon(1e-12));
            CHECK(std::abs(s.mu - mu_frozen) < 1e-3);
            CHECK(std::abs(s.sigma2 - 0.06062) < 1e-5);
            CHECK(s.mean() == doctest::Approx(mean).epsilon(1e-12));
        }
    }
    SUBCASE("non-positive mean") {
        CHECK_THROWS_AS(lognormal_params_from_moments(0.0, 1.0), DomainError);
        CHECK_THROWS_AS(lognormal_params_from_moments(-1.0, 0.0), DomainError);
    }
}

TEST_CASE("scalar sampling") {
    SUBCASE("zero variance is deterministic") {
        Rng rng(3);
        for (int i = 0; i < 100; ++i) CHECK(sample_scalar({0.0, 0.0}, rng) == 1.0);
    }
    SUBCASE("same seed, same value") {
        Rng a(42);
        Rng b(42);
        CHECK(sample_scalar({0.0, 0.1}, a) == sample_scalar({0.0, 0.1}, b));
    }
    SUBCASE("log mean within 3 sigma / sqrt(n)") {
        Rng rng(11);
        const int n = 1'000'000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = sample_scalar({0.0, 0.1}, rng);
            REQUIRE(z > 0.0);
            acc += std::log(z);
        }
        CHECK(std::abs(acc / n) < 3.0 * std::sqrt(0.1) / std::sqrt(double(n)));
    }
    SUBCASE("lognormal moments within 4 standard errors at 1e5 draws") {
        for (auto [mu, s2] : {std::array<double, 2>{0.0, 0.1}, std::array<double, 2>{0.0, 0.01},
                              std::array<double, 2>{-3.3, 0.0606}}) {
            Rng rng(7);
            std::vector<double> v(100'000);
            for (double& x : v) x = sample_scalar({mu, s2}, rng);
            const double mean = std::exp(mu + 0.5 * s2);
            const double std = mean * std::sqrt(std::expm1(s2));
            check_moments(v, mean, std);
        }
    }
    SUBCASE("cdf") {
        const ScalarDistSpec s{0.2, 0.3};
        for (double z : {0.1, 0.7, 1.0, 2.5})
            CHECK(s.cdf(z) == doctest::Approx(oracle::Phi((std::log(z) - 0.2) / std::sqrt(0.3))).epsilon(1e-14));
        CHECK(s.cdf(0.0) == 0.0);
    }
}

TEST_CASE("field sampling") {
    SUBCASE("zero std gives the constant mean field") {
        FieldSpec spec{0.037, 0.0, 0.2, uniform_grid(0, 2, 51)};
        Rng rng(1);
        const GridField f = sample_field(spec, rng);
        for (double v : f.values()) CHECK(v == 0.037);
    }
    SUBCASE("huge correlation length gives a flat field") {
        // Log differences over the domain have std sqrt(2 sigma2 (1 - exp(-2 / lambda))), about 3.5e-4.
        FieldSpec spec{0.037, 0.00925, 2e6, uniform_grid(0, 2, 51)};
        const double s2 = oracle::lognormal_params(0.037, 0.00925)[1];
        const double bound = 6.0 * std::sqrt(2.0 * s2 * -std::expm1(-2.0 / 2e6));
        Rng rng(5);
        for (int k = 0; k < 5; ++k) {
            const GridField f = sample_field(spec, rng);
            for (double v : f.values()) CHECK(std::abs(std::log(v / f.values()[0])) < bound);
        }
    }
    SUBCASE("values are positive") {
        FieldSpec spec{0.01, 0.0025, 0.2, uniform_grid(0, 2, 101)};
        Rng rng(9);
        for (int k = 0; k < 20; ++k)
            for (double v : sample_field(spec, rng).values()) CHECK(v > 0.0);
    }
    SUBCASE("lag correlation of the log field follows exp(-d / lambda)") {
        FieldSpec spec{0.037, 0.00925, 0.2, uniform_grid(0, 2, 101)};
        const FieldSampler sampler(spec);
        Rng rng(2024);
        const int n = 10'000;
        // Lags 0.1, 0.2, 0.4 on a spacing of 0.02, averaged over all node pairs.
        const std::array<std::size_t, 3> lags{5, 10, 20};
        std::array<double, 3> cov{};
        double var = 0.0;
        const double mu = sampler.log_params().mu;
        for (int s = 0; s < n; ++s) {
            const GridField f = sampler.sample(rng);
            std::vector<double> y(f.size());
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::log(f.values()[i]) - mu;
            for (double v : y) var += v * v / static_cast<double>(y.size());
            for (std::size_t l = 0; l < 3; ++l) {
                double acc = 0.0;
                for (std::size_t i = 0; i + lags[l] < y.size(); ++i) acc += y[i] * y[i + lags[l]];
                cov[l] += acc / static_cast<double>(y.size() - lags[l]);
            }
        }
        for (std::size_t l = 0; l < 3; ++l) {
            const double rho = cov[l] / var;
            const double d = 0.02 * static_cast<double>(lags[l]);
            CHECK(std::abs(rho - std::exp(-d / 0.2)) < 0.05);
        }
    }
    SUBCASE("node means within 4 standard errors at 1e5 draws") {
        FieldSpec spec{0.037, 0.00925, 0.2, uniform_grid(0, 2, 11)};
        const FieldSampler sampler(spec);
        Rng rng(77);
        std::vector<std::vector<double>> at(spec.grid.size());
        for (int s = 0; s < 100'000; ++s) {
            const GridField f = sampler.sample(rng);
            for (std::size_t i = 0; i < f.size(); ++i) at[i].push_back(f.values()[i]);
        }
        for (const auto& v : at) check_moments(v, 0.037, 0.00925);
    }
    SUBCASE("invalid specs") {
        Rng rng(1);
        CHECK_THROWS(sample_field(FieldSpec{0.0, 0.1, 0.2, uniform_grid(0, 1, 5)}, rng));
        CHECK_THROWS(sample_field(FieldSpec{1.0, 0.1, 0.2, {0.0}}, rng));
        CHECK_THROWS(sample_field(FieldSpec{1.0, 0.1, 0.2, {0.0, 0.5, 0.5}}, rng));
    }
}

TEST_CASE("interpolation") {
    const GridField f(uniform_grid(0, 1, 5), {1.0, 3.0, 2.0, 5.0, 4.0});
    SUBCASE("exact at nodes") {
        for (std::size_t k = 0; k < 5; ++k) CHECK(interpolate(f, f.grid()[k]) == f.values()[k]);
    }
    SUBCASE("midpoints of linear data") {
        const GridField lin(uniform_grid(0, 2, 9), {0, 1, 2, 3, 4, 5, 6, 7, 8});
        for (std::size_t k = 0; k + 1 < 9; ++k) {
            const double xm = 0.5 * (lin.grid()[k] + lin.grid()[k + 1]);
            CHECK(interpolate(lin, xm) == doctest::Approx(k + 0.5).epsilon(1e-14));
        }
    }
    SUBCASE("constant field") {
        const GridField c(uniform_grid(0, 2, 4), {0.3, 0.3, 0.3, 0.3});
        for (double x : {0.0, 0.123, 1.7, 2.0}) CHECK(interpolate(c, x) == doctest::Approx(0.3));
    }
    SUBCASE("clamped outside the grid") {
        CHECK(interpolate(f, -1.0) == 1.0);
        CHECK(interpolate(f, 3.0) == 4.0);
    }
}

TEST_CASE("realization seeding") {
    SUBCASE("seed is a pure function of (master, index)") {
        CHECK(realization_seed(1, 5) == realization_seed(1, 5));
        CHECK(realization_seed(1, 5) != realization_seed(2, 5));
        CHECK(realization_seed(1, 5) != realization_seed(1, 6));
    }
    SUBCASE("draws do not depend on order or on other draws") {
        const ProblemSpec p = make_saint_venant(SourceCase::zero, 0.2, 41);
        const RealizationSource a(p, 123);
        const RealizationSource b(p, 123);
        std::vector<Realization> forward;
        for (int i = 0; i < 6; ++i) forward.push_back(a.draw(i));
        for (int i = 5; i >= 0; --i) {
            const Realization r = b.draw(i);
            CHECK(r.seed == forward[i].seed);
            REQUIRE(r.fields.size() == 2);
            for (std::size_t f = 0; f < 2; ++f) CHECK(r.fields[f].second.values() == forward[i].fields[f].second.values());
        }
    }
    SUBCASE("sidecar round trip") {
        const ProblemSpec p = make_saint_venant(SourceCase::zero, 0.2, 11);
        const RealizationSource src(p, 9);
        std::vector<Realization> rs{src.draw(0), src.draw(1)};
        std::stringstream ss;
        write_realizations_csv(ss, rs);
        const auto back = read_realizations_csv(ss, {rs[0].fields[0].second.grid(), rs[0].fields[1].second.grid()});
        REQUIRE(back.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(back[i].seed == rs[i].seed);
            CHECK(back[i].fields[0].second.values() == rs[i].fields[0].second.values());
            CHECK(back[i].fields[1].second.values() == rs[i].fields[1].second.values());
        }
    }
}
