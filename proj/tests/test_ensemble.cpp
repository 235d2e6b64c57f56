#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ecodyn/ensemble.hpp"
#include "ecodyn/equilibrium.hpp"

using namespace ecodyn;

namespace {

// Point-mass recipe: every draw is the same viable species.
CommunityDistributions point_recipe() {
    CommunityDistributions d;
    d.mu = DistSpec::point(0.2);
    d.gamma = DistSpec::point(1.0);
    d.r = DistSpec::point(1.0);
    d.K = DistSpec::point(1.0);
    d.c = DistSpec::point(1.0);
    d.x_ext = DistSpec::point(0.05);
    d.x0 = DistSpec::point(0.5);
    d.D = 10.0;
    d.S = 1.0;
    return d;
}

CommunityDistributions spread_recipe() {
    CommunityDistributions d = point_recipe();
    d.mu = DistSpec::uniform(0.1, 0.4);
    d.gamma = DistSpec::uniform(0.5, 2.0);
    d.K = DistSpec::uniform(0.5, 1.5);
    d.x_ext = DistSpec::uniform(0.01, 0.1);
    d.x0 = DistSpec::uniform(0.3, 1.0);
    return d;
}

// Hand-built two-species community: A persists, B's break-even exceeds S.
CommunitySample handmade_pair() {
    CommunitySample s;
    EcosystemParams& p = s.params;
    p.M = 2;
    p.m = 1;
    p.mu = {0.2, 0.8};
    p.gamma = {1.0, 1.0};
    p.x_ext = {0.1, 0.1};
    p.c = Matrix(1, 2, 1.0);
    p.D = {10.0};
    p.S = {1.0};
    p.growth.kind = GrowthKind::Holling;
    p.growth.r = {1.0, 1.0};
    p.growth.K = Matrix(2, 1, 1.0);
    s.x0 = {0.5, 0.5};
    s.beta = {0.3 / 0.7, 0.9 / 0.1};
    s.theta = {1.0 * 0.3 * 0.1 / 10.0, 1.0 * 0.9 * 0.1 / 10.0};
    s.beta_order = {0, 1};
    return s;
}

}  // namespace

TEST_CASE("community sampling is deterministic and honors point masses") {
    CommunityDistributions d = point_recipe();
    CommunitySample a = sample_community(d, 6, 99);
    CommunitySample b = sample_community(d, 6, 99);
    CHECK(a.params.mu == b.params.mu);
    CHECK(a.beta == b.beta);
    CHECK(a.rejections == 0);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(a.params.mu[i] == 0.2);
        CHECK(a.beta[i] == doctest::Approx(1.0 / 3.0));  // 0.25/0.75
        CHECK(a.theta[i] == doctest::Approx(0.25 * 0.05 / 10.0));
        CHECK(a.x0[i] == 0.5);
    }
    CHECK_THROWS_AS(sample_community(d, 0, 1), std::invalid_argument);
}

TEST_CASE("sampled communities stay inside the declared supports") {
    CommunityDistributions d = spread_recipe();
    CommunitySample s = sample_community(d, 40, 7);
    CommunitySample t = sample_community(d, 40, 8);
    CHECK(s.params.mu != t.params.mu);  // different streams differ
    Vec sorted_beta;
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(s.params.mu[i] >= 0.1);
        CHECK(s.params.mu[i] <= 0.4);
        CHECK(s.params.gamma[i] >= 0.5);
        CHECK(s.params.gamma[i] <= 2.0);
        CHECK(s.params.growth.r[i] >
              s.params.mu[i] + s.params.gamma[i] * s.params.x_ext[i]);
        CHECK(s.x0[i] > s.params.x_ext[i]);
        CHECK(std::isfinite(s.beta[i]));
    }
    for (std::size_t j = 1; j < 40; ++j)
        CHECK(s.beta[s.beta_order[j - 1]] <= s.beta[s.beta_order[j]]);
}

TEST_CASE("hopeless recipes abort instead of spinning") {
    CommunityDistributions d = point_recipe();
    d.mu = DistSpec::point(1.5);  // r = 1 can never exceed mu
    CHECK_THROWS_AS(sample_community(d, 10, 3), std::runtime_error);
}

TEST_CASE("assembly of identical species keeps everyone") {
    CommunityDistributions d = point_recipe();
    CommunitySample s = sample_community(d, 5, 11);
    SimOptions opts;
    RStarReport rep = rstar_experiment(s, opts);
    CHECK(rep.M == 5);
    CHECK(rep.n_e_simulated == 5);
    CHECK(rep.survivors_predicted.size() == 5);
    CHECK(rep.mismatch_count == 0);
    CHECK(rep.converged);
    CHECK(rep.v_eq > 1.0 / 3.0);  // everyone clears the common break-even
    CHECK(rep.v_terminal == doctest::Approx(rep.v_eq).epsilon(1e-5));
    CHECK(rep.rho_certified);
}

TEST_CASE("break-even ordering picks the survivor in a crafted pair") {
    CommunitySample s = handmade_pair();
    SimOptions opts;
    RStarReport rep = rstar_experiment(s, opts);
    REQUIRE(rep.n_e_simulated == 1);
    CHECK(rep.survivors_simulated[0] == 0);
    REQUIRE(rep.survivors_predicted.size() == 1);
    CHECK(rep.survivors_predicted[0] == 0);
    CHECK(rep.mismatch_count == 0);
    CHECK(rep.beta_gap == doctest::Approx(9.0 - 3.0 / 7.0));
    CHECK(rep.v_eq > s.beta[0]);
    CHECK(rep.v_eq < s.beta[1]);
}

TEST_CASE("trial batches are identical for any pool width") {
    CommunityDistributions d = spread_recipe();
    SimOptions opts;
    opts.horizon = 500.0;
    auto one = run_rstar_trials(d, 12, 4, 21, opts, 1);
    auto many = run_rstar_trials(d, 12, 4, 21, opts, 3);
    REQUIRE(one.size() == 4);
    REQUIRE(many.size() == 4);
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(one[t].n_e_simulated == many[t].n_e_simulated);
        CHECK(one[t].v_eq == many[t].v_eq);
        CHECK(one[t].survivors_simulated == many[t].survivors_simulated);
        CHECK(one[t].mismatch_count == many[t].mismatch_count);
    }
    CHECK_THROWS_AS(run_rstar_trials(d, 12, 0, 21, opts), std::invalid_argument);
}

TEST_CASE("beta gap statistic saturates for clones and stays a probability") {
    CommunityDistributions d = point_recipe();
    BetaGapStatistic g = beta_gap_statistic(d, 20, 30, 5);
    CHECK(g.frequency == 1.0);  // identical betas: gap is zero
    CHECK(g.wilson_lo > 0.8);
    CHECK(g.wilson_hi == 1.0);
    CHECK(g.n_trials == 30);

    CommunityDistributions w = spread_recipe();
    BetaGapStatistic h = beta_gap_statistic(w, 20, 30, 5);
    CHECK(h.frequency >= 0.0);
    CHECK(h.frequency <= 1.0);
    CHECK(h.wilson_lo <= h.frequency);
    CHECK(h.frequency <= h.wilson_hi);
    CHECK_THROWS_AS(beta_gap_statistic(d, 20, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(beta_gap_statistic(d, 20, 10, 5, 0), std::invalid_argument);
}

TEST_CASE("supply sweep finds the collapse point of a clone community") {
    CommunityDistributions d = point_recipe();
    CommunitySample s = sample_community(d, 5, 13);
    SimOptions opts;
    opts.horizon = 1500.0;
    Vec grid{1.0, 0.6, 0.2};
    RobustnessReport rep = robustness_sweep(s, grid, opts);
    REQUIRE(rep.curve.size() == 3);
    CHECK(rep.curve[0].n_e == 5);
    CHECK(rep.curve[2].n_e == 0);
    CHECK(rep.curve[2].mass_extinct);
    CHECK(rep.monotone);
    CHECK(rep.p_stress == doctest::Approx(0.1));  // c r^2 / (gamma D S)
    // the dimensionless viability threshold predicts collapse near K/3
    CHECK(rep.s_critical > 0.25);
    CHECK(rep.s_critical < 0.5);
    CHECK(rep.delta_ne < 0.0);
    CHECK(rep.r_b_empirical > 0.0);

    CHECK_THROWS_AS(robustness_sweep(s, Vec{1.0}, opts), std::invalid_argument);
    CHECK_THROWS_AS(robustness_sweep(s, Vec{0.5, 0.7}, opts), std::invalid_argument);
}
