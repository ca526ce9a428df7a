#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kwcdf/ensemble.hpp"
#include "kwcdf/errors.hpp"
#include "kwcdf/problems.hpp"
#include "kwcdf/weno.hpp"
#include "oracles.hpp"

using namespace kwcdf;

namespace {

// Saint-Venant with zero-variance fields, no source and constant data 0.5.
ProblemSpec steady_channel() {
    ProblemSpec p = make_saint_venant(SourceCase::zero, 0.2, 41);
    for (auto& [name, spec] : p.field_inputs) spec.std = 0.0;
    p.boundary = [](const Vec3&, double, const Realization&) { return 0.5; };
    return p;
}

}  // namespace

TEST_CASE("flow rate transform") {
    CHECK(to_qprime(0.0, 0.037, 0.01) == 0.0);
    CHECK(to_qprime(1.0, 1.0, 1.0) == 1.0);
    CHECK(from_qprime(to_qprime(0.5, 0.037, 0.01), 0.037, 0.01) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(to_qprime(2.0, 0.037, 0.01) == doctest::Approx(std::pow(2.0 * 0.037 / 0.1, 0.75)).epsilon(1e-14));
    CHECK_THROWS_AS(to_qprime(-0.1, 0.037, 0.01), DomainError);
}

TEST_CASE("weno5 reconstruction") {
    SUBCASE("constants") {
        for (double c : {-3.0, 0.0, 0.7}) {
            CHECK(weno5_reconstruct({c, c, c, c, c}, Side::left) == doctest::Approx(c).epsilon(1e-15));
            CHECK(weno5_reconstruct({c, c, c, c, c}, Side::right) == doctest::Approx(c).epsilon(1e-15));
        }
    }
    SUBCASE("linear data") {
        const double a = 0.3;
        const double b = -1.7;
        const std::array<double, 5> v{a, a + b, a + 2 * b, a + 3 * b, a + 4 * b};
        // Left: interface between stencil entries 2 and 3; right: between 1 and 2.
        CHECK(weno5_reconstruct(v, Side::left) == doctest::Approx(a + 2.5 * b).epsilon(1e-14));
        CHECK(weno5_reconstruct(v, Side::right) == doctest::Approx(a + 1.5 * b).epsilon(1e-14));
    }
    SUBCASE("matches an independent implementation") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            const std::array<double, 5> v{u(rng), u(rng), u(rng), u(rng), u(rng)};
            CHECK(weno5_reconstruct(v, Side::left) == doctest::Approx(oracle::weno5_left(v)).epsilon(1e-13));
            CHECK(weno5_reconstruct(v, Side::right) ==
                  doctest::Approx(oracle::weno5_left({v[4], v[3], v[2], v[1], v[0]})).epsilon(1e-13));
        }
    }
    SUBCASE("fifth order on smooth data") {
        // Node values are cell averages of sin, so the interface value is exact:
        // v_j = (H(x_j + h/2) - H(x_j - h/2)) / h with H = -cos.
        auto err = [](double h) {
            const double x0 = 0.3;
            std::array<double, 5> v{};
            for (int j = -2; j <= 2; ++j) {
                const double xj = x0 + j * h;
                v[j + 2] = (-std::cos(xj + h / 2) + std::cos(xj - h / 2)) / h;
            }
            return std::abs(weno5_reconstruct(v, Side::left) - std::sin(x0 + h / 2));
        };
        const double r1 = std::log2(err(0.1) / err(0.05));
        const double r2 = std::log2(err(0.05) / err(0.025));
        CHECK(r1 > 4.5);
        CHECK(r2 > 4.5);
    }
}

TEST_CASE("roe speed") {
    auto sq = [](double q) { return 2.0 * q; };
    CHECK(roe_speed(1.0, 9.0, 1.0, 3.0, sq) == 4.0);
    CHECK(roe_speed(4.0, 4.0, 2.0, 2.0, sq) == 4.0);
    CHECK(roe_speed(std::sqrt(0.2), std::sqrt(0.5), 0.2, 0.5, sq) > 0.0);
}

TEST_CASE("steady state is preserved") {
    const ProblemSpec p = steady_channel();
    const Realization r = RealizationSource(p, 1).draw(0);
    for (GhostFill g : {GhostFill::copy, GhostFill::extrapolate}) {
        const WenoOptions opt{g, g, 0.4};
        const WenoSolver solver(p, r, 40, opt);
        const std::vector<double> rhs = solver.rhs(solver.initial_state());
        for (double v : rhs) CHECK(std::abs(v) < 1e-13);
        const McsProfile prof = solve_mcs(p, r, 1.0, 40, 0.0, opt);
        for (double q : prof.q) CHECK(q == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("conservation: the node sum changes only by boundary fluxes") {
    const ProblemSpec p = make_saint_venant(SourceCase::zero, 0.2, 101);
    const Realization r = RealizationSource(p, 4).draw(0);
    const WenoSolver solver(p, r, 100);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 0.3);
    WenoState s = solver.initial_state();
    for (double& w : s.qprime) w = u(rng);
    const std::vector<double> f = solver.interface_fluxes(s);
    const std::vector<double> rhs = solver.rhs(s);
    const double dx = solver.grid().dx();
    // Node 0 is Dirichlet; nodes 1..n-1 telescope to f[1] - f[n].
    const double total = std::accumulate(rhs.begin() + 1, rhs.end(), 0.0) * dx;
    CHECK(std::abs(total - (f[1] - f.back())) < 1e-10);

    SUBCASE("periodic problems conserve exactly") {
        const ProblemSpec b = make_burgers();
        Realization rz;
        rz.scalars = {{"z", 1.1}};
        const WenoSolver sb(b, rz, 64);
        WenoState st = sb.initial_state();
        const double before = std::accumulate(st.qprime.begin(), st.qprime.end(), 0.0);
        for (int k = 0; k < 50; ++k) sb.step_adaptive(st, 0.5);
        const double after = std::accumulate(st.qprime.begin(), st.qprime.end(), 0.0);
        CHECK(std::abs(after - before) < 1e-10);
    }
}

TEST_CASE("positivity of the flow rate") {
    for (SourceCase sc : {SourceCase::zero, SourceCase::one, SourceCase::x}) {
        const ProblemSpec p = make_saint_venant(sc, 0.2, 201);
        const RealizationSource src(p, 21);
        for (int i = 0; i < 3; ++i) {
            const McsProfile prof = solve_mcs(p, src.draw(i), 1.0, 200, 0.0);
            CHECK(*std::min_element(prof.q.begin(), prof.q.end()) >= 0.0);
        }
    }
}

TEST_CASE("CFL violations are rejected") {
    const ProblemSpec p = make_test1d(true);
    const Realization none;
    const WenoSolver solver(p, none, 40);
    WenoState s = solver.initial_state();
    CHECK_THROWS_AS(solver.step(s, 0.5), CflError);
    CHECK_THROWS_AS(WenoSolver(make_3d(), none, 40), ConfigError);
}

TEST_CASE("fifth-order convergence on the smooth deterministic test") {
    const ProblemSpec p = make_test1d(true);
    std::vector<double> eps;
    for (std::size_t cells : {40, 80, 160, 320}) {
        const McsProfile prof = solve_mcs(p, {}, 0.1, cells, 1e-4);
        std::vector<double> exact;
        for (double x : prof.x) exact.push_back(p.exact(vec1(x), 0.1, {}));
        eps.push_back(std::sqrt(mse_error(prof.q, exact)));
    }
    for (std::size_t i = 1; i < eps.size(); ++i) CHECK(convergence_rate(eps[i - 1], eps[i]) >= 4.0);
    // Error at dx = 0.0125 is on the scale of a few 1e-8.
    CHECK(eps[2] < 1e-7);
}

TEST_CASE("profile sampling interpolates linearly") {
    const McsProfile prof{{0.0, 1.0, 2.0}, {1.0, 3.0, 2.0}, 1.0};
    CHECK(sample_profile(prof, 0.5) == 2.0);
    CHECK(sample_profile(prof, 1.0) == 3.0);
    CHECK(sample_profile(prof, 5.0) == 2.0);
}
