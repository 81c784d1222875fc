#include <doctest.h>

#include <cmath>
#include <vector>

#include "cvarssp/environments.hpp"
#include "cvarssp/oracle.hpp"
#include "cvarssp/risk.hpp"
#include "cvarssp/simulate.hpp"

using namespace cvarssp;

namespace {

SoftmaxPolicy bandit_policy(double t0, double t1) {
    SoftmaxPolicy p = SoftmaxPolicy::tabular({1, 2, 1});
    p.theta()[0] = t0;
    p.theta()[1] = t1;
    return p;
}

double atom_prob(const CostDistribution& d, double value) {
    for (const auto& a : d.atoms)
        if (std::abs(a.value - value) < 1e-9) return a.prob;
    return 0.0;
}

}  // namespace

TEST_CASE("single-arm enumerations of the two-arm model") {
    const SspModel m = make_bandit_ssp();

    const EnumerationResult detour =
        enumerate_cost_distribution(m, bandit_policy(-40.0, 40.0), 2, 1e-9);
    REQUIRE(detour.cost.atoms.size() >= 2);
    CHECK(atom_prob(detour.cost, 0.0) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(atom_prob(detour.cost, 20.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(detour.cost.residual_mass == doctest::Approx(0.0));
    CHECK(detour.mean_g == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    const EnumerationResult direct =
        enumerate_cost_distribution(m, bandit_policy(40.0, -40.0), 2, 1e-9);
    CHECK(atom_prob(direct.cost, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(direct.mean_g == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform-policy walk distribution") {
    const SspModel m = make_chain();
    const SoftmaxPolicy p = SoftmaxPolicy::tabular({1, 2, 2, 2, 2});
    const EnumerationResult r = enumerate_cost_distribution(m, p, 60, 1e-9);
    CHECK(r.cost.residual_mass < 1e-9);
    // four sure steps cost 4; exactly one successful brisk step costs 4.5
    CHECK(atom_prob(r.cost, 4.0) == doctest::Approx(0.0625).epsilon(1e-10));
    CHECK(atom_prob(r.cost, 4.5) == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(r.cost.mean() == doctest::Approx(50.0 / 9.0).epsilon(1e-8));
    CHECK(r.mean_g == doctest::Approx(20.0 / 3.0).epsilon(1e-8));
    CHECK(r.cost.total_prob() + r.cost.residual_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trap visit probability under the uniform gridworld policy") {
    const SspModel m = make_gridworld_trap();
    const SoftmaxPolicy p = SoftmaxPolicy::tabular(std::vector<int>(17, 2));
    const EnumerationResult r = enumerate_cost_distribution(m, p, 8, 1e-12);
    CHECK(r.cost.residual_mass == doctest::Approx(0.0));
    CHECK(atom_prob(r.cost, 40.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(atom_prob(r.cost, 0.0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("short horizons fail the residual guard") {
    const SspModel m = make_chain();
    const SoftmaxPolicy p = SoftmaxPolicy::tabular({1, 2, 2, 2, 2});
    CHECK_THROWS_AS(enumerate_cost_distribution(m, p, 5, 1e-9), ResidualMassTooLarge);
}

TEST_CASE("cell budget is enforced") {
    const SspModel m = make_chain();
    const SoftmaxPolicy p = SoftmaxPolicy::tabular({1, 2, 2, 2, 2});
    CHECK_THROWS_AS(enumerate_cost_distribution(m, p, 60, 1e-9, 3), EnumerationTooLarge);
}

TEST_CASE("quantile and tail average of small atomic distributions") {
    CostDistribution d;
    d.atoms = {{0.0, 0.9}, {20.0, 0.1}};

    auto [v95, c95] = exact_var_cvar(d, 0.95);
    CHECK(v95 == doctest::Approx(20.0));
    CHECK(c95 == doctest::Approx(20.0));

    auto [v85, c85] = exact_var_cvar(d, 0.85);
    CHECK(v85 == doctest::Approx(0.0));
    CHECK(c85 == doctest::Approx(40.0 / 3.0).epsilon(1e-14));

    CostDistribution point;
    point.atoms = {{3.5, 1.0}};
    auto [vp, cp] = exact_var_cvar(point, 0.6);
    CHECK(vp == doctest::Approx(3.5));
    CHECK(cp == doctest::Approx(3.5));
}

TEST_CASE("mixture quantiles at a mixed two-arm policy") {
    const SspModel m = make_bandit_ssp();
    const EnumerationResult r =
        enumerate_cost_distribution(m, bandit_policy(0.0, 0.0), 2, 1e-12);
    auto [var9, cvar9] = exact_var_cvar(r.cost, 0.9);
    CHECK(var9 == doctest::Approx(1.0));
    CHECK(cvar9 == doctest::Approx(10.5).epsilon(1e-12));

    SoftmaxPolicy tilted = bandit_policy(-1.0, 1.0);
    const EnumerationResult r2 = enumerate_cost_distribution(m, tilted, 2, 1e-12);
    auto [var2, cvar2] = exact_var_cvar(r2.cost, 0.9);
    CHECK(var2 == doctest::Approx(1.0));
    CHECK(cvar2 == doctest::Approx(17.735144481579763).epsilon(1e-12));
    auto [var3, cvar3] = exact_var_cvar(r2.cost, 0.95);
    CHECK(var3 == doctest::Approx(20.0));
    CHECK(cvar3 == doctest::Approx(20.0));
}

TEST_CASE("loose tails are rejected by the quantile guard") {
    CostDistribution d;
    d.atoms = {{0.0, 0.9}};
    d.residual_mass = 0.1;
    CHECK_THROWS_AS(exact_var_cvar(d, 0.95), ResidualMassTooLarge);
}

TEST_CASE("tail objective evaluated on atoms") {
    CostDistribution d;
    d.atoms = {{0.0, 0.9}, {20.0, 0.1}};
    // at the 0.95 quantile the objective equals the tail average
    CHECK(ru_objective(d, 20.0, 0.95) == doctest::Approx(20.0));
    CHECK(ru_objective(d, 0.0, 0.95) == doctest::Approx(40.0).epsilon(1e-14));
}

TEST_CASE("objective gradient via central differences") {
    const SspModel m = make_bandit_ssp();
    const SoftmaxPolicy p = bandit_policy(0.0, 0.0);
    const std::vector<double> g =
        finite_difference_gradient(m, p, OracleQuantity::MeanG, 0.95, 4, 1e-12);
    REQUIRE(g.size() == 3);
    // mean g is pi(a0); its logit derivative at theta=0 is 0.25
    CHECK(g[0] == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(g[1] == doctest::Approx(-0.25).epsilon(1e-7));
    CHECK(g[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("gradient components of a tabular block sum to zero") {
    SspModel m = make_bandit_ssp();
    SoftmaxPolicy p = bandit_policy(0.3, -0.2);
    const std::vector<double> g =
        finite_difference_gradient(m, p, OracleQuantity::MeanG, 0.95, 4, 1e-12);
    CHECK(std::abs(g[0] + g[1]) < 1e-8);
}

TEST_CASE("difference step is stable under refinement") {
    const SspModel m = make_bandit_ssp();
    const SoftmaxPolicy p = bandit_policy(0.0, 0.0);
    const std::vector<double> g4 = finite_difference_gradient(
        m, p, OracleQuantity::MeanG, 0.95, 4, 1e-12, 1e-4);
    const std::vector<double> g5 = finite_difference_gradient(
        m, p, OracleQuantity::MeanG, 0.95, 4, 1e-12, 1e-5);
    for (std::size_t i = 0; i < g4.size(); ++i)
        CHECK(g4[i] == doctest::Approx(g5[i]).epsilon(1e-5).scale(0.25));
}

TEST_CASE("zero objective costs give a zero gradient") {
    SspModel m = make_bandit_ssp();
    for (auto& row : m.cost_g)
        for (auto& v : row) v = 0.0;
    const std::vector<double> g = finite_difference_gradient(
        m, bandit_policy(0.4, -0.8), OracleQuantity::MeanG, 0.95, 4, 1e-12);
    for (const double v : g) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("tail-average gradient matches a closed form on the two-arm model") {
    // for pi(a1) below one half the 0.95 tail average is 1 + 38 pi(a1),
    // so its gradient in the logits is +-38 pi(a0) pi(a1)
    const SspModel m = make_bandit_ssp();
    SoftmaxPolicy p = bandit_policy(0.6, -0.6);  // pi(a1) = 0.2315...
    const std::vector<double> g =
        finite_difference_gradient(m, p, OracleQuantity::CvarC, 0.95, 4, 1e-12);
    const double p1 = p.action_probabilities(1)[1];
    const double expect = 38.0 * p1 * (1.0 - p1);
    CHECK(g[0] == doctest::Approx(-expect).epsilon(1e-5));
    CHECK(g[1] == doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("simulated tail averages agree with enumeration") {
    struct Case {
        const char* env;
        double alpha;
    } cases[] = {{"bandit-ssp", 0.9}, {"chain", 0.9}, {"gridworld-trap", 0.9}};
    for (const auto& c : cases) {
        const SspModel m = builtin_environment(c.env);
        std::vector<int> acts(m.actions.begin(), m.actions.end());
        const SoftmaxPolicy p = SoftmaxPolicy::tabular(acts);
        const EnumerationResult r = enumerate_cost_distribution(m, p, 64, 1e-10);
        auto [var_exact, cvar_exact] = exact_var_cvar(r.cost, c.alpha);

        const int n = 100000;
        double sum = 0.0, sq = 0.0;
        for (int i = 1; i <= n; ++i) {
            RandomStream rng = RandomStream::derive(2026, i, 0);
            const EpisodeTrace t = simulate_episode(m, p, rng);
            const double v = ru_value(var_exact, t.total_c, c.alpha);
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n;
        const double sd = std::sqrt(std::max(sq / n - mean * mean, 0.0));
        const double se = sd / std::sqrt(static_cast<double>(n));
        INFO(c.env);
        CHECK(std::abs(mean - cvar_exact) <= 3.0 * se + 1e-12);
    }
}
