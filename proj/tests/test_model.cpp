#include <doctest.h>

#include <cmath>

#include "ecodyn/model.hpp"
#include "ecodyn/rng.hpp"
#include "test_util.hpp"

using namespace ecodyn;

TEST_CASE("holling response at half saturation") {
    GrowthLaw g{GrowthKind::Holling, {1.0}, Matrix(1, 1, 1.0)};
    CHECK(evaluate_growth(g, 0, {1.0}) == doctest::Approx(0.5));
}

TEST_CASE("liebig response vanishes on the boundary and picks the scarcest resource") {
    GrowthLaw g{GrowthKind::Liebig, {2.0}, Matrix(1, 2)};
    g.K(0, 0) = 1.0;
    g.K(0, 1) = 3.0;
    CHECK(evaluate_growth(g, 0, {0.0, 5.0}) == 0.0);
    CHECK(evaluate_growth(g, 0, {1.0, 1.0}) == doctest::Approx(0.5));  // 2*min(1/2, 1/4)
}

TEST_CASE("growth errors on bad input") {
    GrowthLaw g{GrowthKind::Holling, {1.0}, Matrix(1, 1, 1.0)};
    CHECK_THROWS_AS(evaluate_growth(g, 1, {1.0}), std::out_of_range);
    CHECK_THROWS_AS(evaluate_growth(g, 0, {-0.1}), std::invalid_argument);
}

TEST_CASE("viability filter splits on phi(S) vs mu") {
    EcosystemParams p = test::reference_params();
    auto part = viability_filter(p);
    CHECK(part.viable.size() == 1);  // phi(S)=0.5 > 0.2

    p.mu = {0.5};  // boundary case phi(S) = mu counts as doomed
    part = viability_filter(p);
    CHECK(part.doomed.size() == 1);

    EcosystemParams mixed = test::reference_params();
    mixed.M = 2;
    mixed.mu = {0.2, 0.6};
    mixed.gamma = {1.0, 1.0};
    mixed.x_ext = {0.0, 0.0};
    mixed.c = Matrix(1, 2, 1.0);
    mixed.growth.r = {1.0, 1.0};
    mixed.growth.K = Matrix(2, 1, 1.0);
    part = viability_filter(mixed);
    REQUIRE(part.viable.size() == 1);
    CHECK(part.viable[0] == 0);
    REQUIRE(part.doomed.size() == 1);
    CHECK(part.doomed[0] == 1);
}

TEST_CASE("lipschitz constants are the slopes at zero") {
    GrowthLaw g{GrowthKind::Holling, {1.0}, Matrix(1, 1, 1.0)};
    CHECK(lipschitz_constants(g, {1.0})[0] == doctest::Approx(1.0));
    g.r = {2.0};
    g.K(0, 0) = 4.0;
    CHECK(lipschitz_constants(g, {1.0})[0] == doctest::Approx(0.5));

    GrowthLaw lieb{GrowthKind::Liebig, {1.0, 3.0}, Matrix(2, 1, 1.0)};
    CHECK(lipschitz_constants(lieb, {1.0})[0] == doctest::Approx(3.0));
}

TEST_CASE("rho hand values for the reference system") {
    EcosystemParams p = test::reference_params();
    StabilityReport rep = compute_rho(p);
    CHECK(rep.rho == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(rep.satisfied);

    p.D = {0.05};
    rep = compute_rho(p);
    CHECK(rep.rho == doctest::Approx(16.0).epsilon(1e-12));
    CHECK_FALSE(rep.satisfied);
}

TEST_CASE("rho rejects non-viable species and vanishes for huge gamma") {
    EcosystemParams p = test::reference_params();
    p.mu = {0.6};
    CHECK_THROWS_AS(compute_rho(p), std::invalid_argument);

    p = test::reference_params();
    p.gamma = {1e12};
    CHECK(compute_rho(p).rho < 1e-10);
}

TEST_CASE("rho scales as 1/lambda under D -> lambda D") {
    CounterRng rng(7, 0);
    for (int trial = 0; trial < 20; ++trial) {
        EcosystemParams p = test::random_viable_params(rng, 3, 2);
        double rho1 = compute_rho(p).rho;
        double lambda = rng.uniform(0.5, 4.0);
        for (double& d : p.D) d *= lambda;
        CHECK(compute_rho(p).rho == doctest::Approx(rho1 / lambda).epsilon(1e-12));
    }
}

TEST_CASE("growth is monotone and lipschitz on random pairs") {
    CounterRng rng(11, 0);
    GrowthLaw g{GrowthKind::Liebig, {1.0, 2.0}, Matrix(2, 3)};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 3; ++k) g.K(i, k) = rng.uniform(0.3, 2.0);
    Vec S = {2.0, 2.0, 2.0};
    Vec L = lipschitz_constants(g, S);
    double Lmax = *std::max_element(L.begin(), L.end());
    for (int trial = 0; trial < 500; ++trial) {
        Vec v(3), w(3);
        for (int k = 0; k < 3; ++k) {
            v[k] = rng.uniform(0.0, S[k]);
            w[k] = rng.uniform(0.0, S[k]);
        }
        Vec hi = v;
        for (int k = 0; k < 3; ++k) hi[k] = std::max(v[k], w[k]);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(evaluate_growth(g, i, v) <= evaluate_growth(g, i, hi) + 1e-15);
            double dist = 0.0;
            for (int k = 0; k < 3; ++k) dist = std::max(dist, std::abs(v[k] - w[k]));
            CHECK(std::abs(evaluate_growth(g, i, v) - evaluate_growth(g, i, w)) <=
                  Lmax * dist + 1e-12);
        }
    }
}

TEST_CASE("validation rejects inconsistent dimensions") {
    EcosystemParams p = test::reference_params();
    p.mu.push_back(0.1);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
