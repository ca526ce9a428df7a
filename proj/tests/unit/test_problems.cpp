#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kwcdf/ensemble.hpp"
#include "kwcdf/errors.hpp"
#include "kwcdf/problems.hpp"
#include "oracles.hpp"

using namespace kwcdf;

namespace {

Realization with_z(double z) {
    Realization r;
    r.scalars = {{"z", z}};
    return r;
}

// Quasi-random points of (0,2) x (0,1] from a Halton pair.
std::vector<std::array<double, 2>> halton_points(std::size_t n) {
    std::vector<std::array<double, 2>> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({2.0 * oracle::halton(i, 2), oracle::halton(i, 3)});
    return out;
}

}  // namespace

TEST_CASE("catalog") {
    const auto ids = catalog_ids();
    CHECK(ids.size() == 6);
    for (const auto& id : ids) {
        if (id == "coupled") {
            CHECK_THROWS_AS(make_problem(id), ConfigError);
            continue;
        }
        const ProblemSpec p = make_problem(id);
        CHECK(p.name == id);
        CHECK_FALSE(p.description.empty());
        CHECK(p.k_min < p.k_max);
    }
    CHECK_THROWS_AS(make_problem("nope"), ConfigError);
    CHECK(source_case_from_string("x") == SourceCase::x);
    CHECK_THROWS_AS(source_case_from_string("2"), ConfigError);
}

TEST_CASE("one-dimensional test problem") {
    const ProblemSpec det = make_test1d(true);
    CHECK(det.exact(vec1(0.0), 0.0, {}) == doctest::Approx(1.21).epsilon(1e-15));
    CHECK(det.scalar_inputs.empty());
    CHECK(make_test1d(false).scalar_inputs.size() == 1);

    SUBCASE("the exact solution satisfies the equation with its source") {
        for (bool deterministic : {true, false}) {
            const ProblemSpec p = make_test1d(deterministic);
            for (double z : {0.8, 1.0, 1.25}) {
                const Realization r = deterministic ? Realization{} : with_z(z);
                const oracle::Test1d o{deterministic ? 1.0 : z, deterministic ? 1.1 : 5.0};
                for (auto [x, t] : halton_points(100)) {
                    CHECK(std::abs(o.residual(x, t, p.source(vec1(x), t, r))) < 1e-8);
                    CHECK(p.exact(vec1(x), t, r) == doctest::Approx(o.k(x, t)).epsilon(1e-13));
                }
                // Initial and inflow data are traces of the exact solution.
                CHECK(p.initial(vec1(0.7), r) == doctest::Approx(o.k(0.7, 0.0)).epsilon(1e-13));
                CHECK(p.boundary(vec1(0.0), 0.4, r) == doctest::Approx(o.k(0.0, 0.4)).epsilon(1e-13));
            }
        }
    }
    SUBCASE("finite differences agree with the oracle derivatives") {
        const oracle::Test1d o{1.0, 1.1};
        for (auto [x, t] : halton_points(20)) {
            CHECK(oracle::d5([&](double s) { return o.k(s, t); }, x) == doctest::Approx(o.k_x(x, t)).epsilon(1e-8));
            CHECK(oracle::d5([&](double s) { return o.k(x, s); }, t) == doctest::Approx(o.k_t(x, t)).epsilon(1e-8));
        }
    }
}

TEST_CASE("three-dimensional problem") {
    const ProblemSpec p = make_3d();
    CHECK(p.dim == 3);
    for (double z : {0.9, 1.1}) {
        const Realization r = with_z(z);
        CHECK(p.exact({0.3, 1.1, 1.9}, 0.0, r) == 0.0);
        for (std::size_t i = 0; i < 100; ++i) {
            const Vec3 x{2.0 * oracle::halton(i, 2), 2.0 * oracle::halton(i, 3), 2.0 * oracle::halton(i, 5)};
            const double t = oracle::halton(i, 7);
            CHECK(p.exact(x, t, r) == doctest::Approx(oracle::exact_3d(x, t, z)).epsilon(1e-13));
            double res = oracle::d5([&](double s) { return oracle::exact_3d(x, s, z); }, t);
            for (int a = 0; a < 3; ++a)
                res += oracle::d5(
                    [&](double s) {
                        Vec3 y = x;
                        y[a] = s;
                        return oracle::exact_3d(y, t, z);
                    },
                    x[a]);
            CHECK(std::abs(res - p.source(x, t, r)) < 1e-8);
        }
    }
}

TEST_CASE("coupled system") {
    const CoupledSystem sys = make_coupled();
    for (double z : {0.95, 1.05}) {
        const Realization r = with_z(z);
        for (auto [x, t] : halton_points(100)) {
            const auto k = oracle::coupled(x, t, z);
            CHECK(sys.exact_k1(vec1(x), t, r) == doctest::Approx(k[0]).epsilon(1e-12));
            CHECK(sys.exact_k2(vec1(x), t, r) == doctest::Approx(k[1]).epsilon(1e-12));
            // k1_t + k2_x = 0 and k2_t + k1_x = 0.
            auto k1 = [&](double xx, double tt) { return oracle::coupled(xx, tt, z)[0]; };
            auto k2 = [&](double xx, double tt) { return oracle::coupled(xx, tt, z)[1]; };
            const double r1 = oracle::d5([&](double s) { return k1(x, s); }, t) +
                              oracle::d5([&](double s) { return k2(s, t); }, x);
            const double r2 = oracle::d5([&](double s) { return k2(x, s); }, t) +
                              oracle::d5([&](double s) { return k1(s, t); }, x);
            CHECK(std::abs(r1) < 1e-8);
            CHECK(std::abs(r2) < 1e-8);
        }
        CHECK(sys.exact_k1(vec1(0.4), 0.0, r) == doctest::Approx(z * std::sin(oracle::pi * 0.4)).epsilon(1e-13));
        CHECK(sys.exact_k2(vec1(0.4), 0.0, r) == doctest::Approx(z * std::cos(oracle::pi * 0.4)).epsilon(1e-13));
    }
    SUBCASE("decoupling round trip") {
        const auto [v1, v2] = decouple(0.7, -0.2);
        CHECK(v1 == doctest::Approx(0.25));
        CHECK(v2 == doctest::Approx(0.45));
        const auto [k1, k2] = recombine_pi(v1, v2);
        CHECK(k1 == doctest::Approx(0.7));
        CHECK(k2 == doctest::Approx(-0.2));
    }
}

TEST_CASE("burgers problem") {
    const ProblemSpec p = make_burgers();
    CHECK(p.periodic);
    CHECK(p.has_shock);
    CHECK(p.initial(vec1(0.5), with_z(1.2)) == doctest::Approx(1.2));
    CHECK(p.flux_derivative(0.3, vec1(0.0), {})[0] == doctest::Approx(0.6));
}

TEST_CASE("Saint-Venant channel") {
    for (SourceCase sc : {SourceCase::zero, SourceCase::one, SourceCase::x}) {
        const ProblemSpec p = make_saint_venant(sc, 0.2, 21);
        CHECK(p.form == ProblemForm::flux);
        REQUIRE(p.field_inputs.size() == 2);
        CHECK(p.field_inputs[0].second.mean == 0.037);
        CHECK(p.field_inputs[0].second.std == 0.00925);
        CHECK(p.field_inputs[1].second.mean == 0.01);
        CHECK(p.field_inputs[1].second.std == 0.0025);
        CHECK(p.field_inputs[0].second.grid.size() == 21);
        CHECK(p.k_floor.has_value());

        const Realization r = RealizationSource(p, 5).draw(0);
        CHECK(p.initial(vec1(1.0), r) == 0.5);
        CHECK(p.boundary(vec1(0.0), 0.0, r) == 0.5);
        CHECK(p.boundary(vec1(0.0), 0.5, r) == doctest::Approx(1.0));
        CHECK(p.boundary(vec1(0.0), 1.5, r) == 0.5);
        const double expected_source = sc == SourceCase::zero ? 0.0 : sc == SourceCase::one ? 1.0 : 0.6;
        CHECK(p.source(vec1(0.6), 0.3, r) == expected_source);

        // Flux is increasing in the conserved variable and a(x, Q) > 0.
        const ConservativeForm& cf = *p.conservative;
        for (double x : linspace(0.0, 2.0, 9)) {
            const double c = cf.coefficient(x, r);
            double prev = -1.0;
            for (double w : linspace(0.0, 3.0, 31)) {
                const double f = cf.flux(w, c);
                CHECK(f > prev);
                prev = f;
                CHECK(cf.from_conserved(cf.to_conserved(f, c), c) == doctest::Approx(f).epsilon(1e-12));
            }
            for (double Q : linspace(0.01, 3.0, 31)) CHECK(p.time_coefficient(Q, vec1(x), r) > 0.0);
        }
    }
    CHECK_THROWS_AS(make_saint_venant(SourceCase::zero, 0.0), DomainError);
}

TEST_CASE("realization source draws the declared inputs") {
    const ProblemSpec p = make_test1d(false);
    const RealizationSource src(p, 3);
    const Realization r = src.draw(7);
    CHECK(r.index == 7);
    CHECK(r.has_scalar("z"));
    CHECK(r.scalar("z") > 0.0);
    CHECK(r.fields.empty());
    CHECK(src.draw(7).scalar("z") == r.scalar("z"));
}
