#include <doctest.h>

#include <cmath>

#include "coopt/equilibrium.hpp"
#include "test_util.hpp"

namespace coopt {
namespace {

// Three binary players, each table ordered (own, next, next-next).
GameModel random_three_player(SplitMix64& rng) {
  GameModel m;
  m.mode = Mode::kUtility;
  m.variables = {{"x0", 2}, {"x1", 2}, {"x2", 2}};
  for (int i = 0; i < 3; ++i) {
    DenseUtility u;
    for (int k = 0; k < 3; ++k) u.order.push_back("x" + std::to_string((i + k) % 3));
    for (int k = 0; k < 8; ++k) u.values.push_back(rng.uniform());
    m.agents.push_back({"p" + std::to_string(i), "x" + std::to_string(i), u});
  }
  return validate(std::move(m));
}

StrategyProfile mixed(double p, double q) { return {{p, 1 - p}, {q, 1 - q}}; }

TEST_CASE("expected_payoff examples") {
  const auto pd = testing::prisoners_dilemma();
  CHECK(expected_payoff(pd, uniform_profile(pd), 0) == 2.25);
  CHECK(expected_payoff(pd, uniform_profile(pd), 1) == 2.25);
  CHECK(expected_payoff(pd, point_mass(pd, {1, 0}), 0) == 5.0);
  CHECK(expected_payoff(pd, point_mass(pd, {1, 0}), 1) == 0.0);
  const auto flat = testing::two_player_game({7, 7, 7, 7}, {7, 7, 7, 7});
  CHECK(expected_payoff(flat, mixed(0.3, 0.9), 0) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK_THROWS_AS(expected_payoff(testing::agreement_energy(),
                                  uniform_profile(testing::agreement_energy()), 0),
                  Error);
}

TEST_CASE("expected_payoff matches the bilinear form") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = testing::random_bimatrix(rng, 3);
    const auto p = random_profile(g, rng.next());
    const auto& u0 = std::get<DenseUtility>(g.agents[0].objective).values;
    const auto& u1 = std::get<DenseUtility>(g.agents[1].objective).values;
    double e0 = 0.0, e1 = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        e0 += u0[a * 3 + b] * p[0][a] * p[1][b];
        e1 += u1[b * 3 + a] * p[0][a] * p[1][b];
      }
    }
    CHECK(expected_payoff(g, p, 0) == doctest::Approx(e0).epsilon(1e-14));
    CHECK(expected_payoff(g, p, 1) == doctest::Approx(e1).epsilon(1e-14));
  }
}

TEST_CASE("epsilon examples") {
  const auto pd = testing::prisoners_dilemma();
  const auto dd = epsilon_of_profile(pd, point_mass(pd, {1, 1}));
  CHECK(dd.epsilon == 0.0);
  const auto uni = epsilon_of_profile(pd, uniform_profile(pd));
  CHECK(uni.epsilon == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(uni.best_deviation == std::vector<int>{1, 1});
  CHECK(uni.gains[0] == doctest::Approx(0.75).epsilon(1e-15));

  const auto flat = testing::two_player_game({2, 2, 2, 2}, {5, 5, 5, 5});
  CHECK(epsilon_of_profile(flat, mixed(0.2, 0.7)).epsilon == 0.0);
}

TEST_CASE("epsilon gain is the best-response gap") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = testing::random_bimatrix(rng, 2);
    const auto p = random_profile(g, rng.next());
    const auto cert = epsilon_of_profile(g, p);
    double eps = 0.0;
    for (std::size_t a = 0; a < 2; ++a) {
      double best = -1e300;
      for (int k = 0; k < 2; ++k) {
        std::vector<double> pure(2, 0.0);
        pure[k] = 1.0;
        auto deviated = p;
        deviated[a] = pure;
        best = std::max(best, expected_payoff(g, deviated, a));
      }
      const double gain = std::max(0.0, best - expected_payoff(g, p, a));
      CHECK(std::abs(cert.gains[a] - gain) <= 1e-14);
      CHECK(cert.gains[a] >= 0.0);
      eps = std::max(eps, gain);
    }
    CHECK(std::abs(cert.epsilon - eps) <= 1e-14);
  }
}

TEST_CASE("pure Nash examples") {
  CHECK(enumerate_pure_nash(testing::prisoners_dilemma()) ==
        std::vector<PureProfile>{{1, 1}});
  CHECK(enumerate_pure_nash(testing::matching_pennies_shifted()).empty());
  CHECK(enumerate_pure_nash(testing::coordination()) ==
        std::vector<PureProfile>{{0, 0}, {1, 1}});
  // Ties count.
  CHECK(enumerate_pure_nash(testing::two_player_game({1, 1, 1, 1}, {1, 1, 1, 1}))
            .size() == 4);
}

TEST_CASE("epsilon is sound and complete against pure Nash on 2x2 games") {
  SplitMix64 rng(202);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = testing::random_bimatrix(rng, 2);
    const auto nash = enumerate_pure_nash(g);
    for_each_assignment({2, 2}, [&](const std::vector<int>& x) {
      const double eps = epsilon_of_profile(g, point_mass(g, x)).epsilon;
      const bool listed = std::find(nash.begin(), nash.end(), x) != nash.end();
      CHECK(listed == (eps <= 1e-12));
    });
  }
}

TEST_CASE("epsilon is sound and complete against pure Nash on 2x2x2 games") {
  SplitMix64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_three_player(rng);
    const auto nash = enumerate_pure_nash(g);
    for_each_assignment({2, 2, 2}, [&](const std::vector<int>& x) {
      const double eps = epsilon_of_profile(g, point_mass(g, x)).epsilon;
      const bool listed = std::find(nash.begin(), nash.end(), x) != nash.end();
      CHECK(listed == (eps <= 1e-12));
    });
  }
}

TEST_CASE("enumeration refuses oversize instances") {
  GameModel m;
  m.mode = Mode::kUtility;
  for (int i = 0; i < 7; ++i) {
    m.variables.push_back({"v" + std::to_string(i), 10});
    m.agents.push_back(
        {"a" + std::to_string(i), m.variables.back().name,
         DenseUtility{{{m.variables.back().name}, std::vector<double>(10, 1.0)}}});
  }
  m = validate(m);
  CHECK_THROWS_AS(enumerate_pure_nash(m), Error);
}

TEST_CASE("positive utility scaling scales gains and keeps fixed points") {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testing::random_bimatrix(rng, 3);
    const double s = rng.uniform(0.1, 10.0);
    auto scaled = g;
    for (double& v : std::get<DenseUtility>(scaled.agents[0].objective).values) v *= s;
    const auto p = random_profile(g, rng.next());
    const auto a = epsilon_of_profile(g, p);
    const auto b = epsilon_of_profile(scaled, p);
    CHECK(testing::relative_gap(b.gains[0], s * a.gains[0]) <= 1e-12);
    CHECK(b.gains[1] == a.gains[1]);

    IterationOptions opts;
    opts.alpha = rng.uniform(0.5, 3.0);
    opts.max_iter = 200;
    opts.init = p;
    const auto fa = iterate_to_fixed_point(g, opts);
    const auto fb = iterate_to_fixed_point(scaled, opts);
    CHECK(max_profile_change(fa.profile, fb.profile) <= 1e-10);
  }
}

TEST_CASE("social welfare") {
  const auto pd = testing::prisoners_dilemma();
  CHECK(social_welfare(pd, point_mass(pd, {1, 1})) == 1.0);
  CHECK(social_welfare(pd, point_mass(pd, {0, 0})) == 3.0);
  CHECK(social_welfare(pd, uniform_profile(pd)) == 2.25);
  const auto agree = testing::agreement_energy();
  CHECK(social_welfare(agree, point_mass(agree, {0, 0})) == 1.0);
  CHECK(social_welfare(agree, point_mass(agree, {0, 1})) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("total and minimum energy") {
  const auto agree = testing::agreement_energy();
  CHECK(total_energy(agree, {0, 1}) == 2.0);
  CHECK(global_minimum_energy(agree) == 0.0);

  SplitMix64 rng(66);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = testing::random_pairwise(rng, 3, 3);
    std::vector<int> cards;
    for (const auto& v : m.variables) cards.push_back(v.cardinality);
    double best = 1e300;
    for_each_assignment(cards, [&](const std::vector<int>& x) {
      double e = 0.0;
      for (std::size_t i = 0; i < m.num_agents(); ++i) {
        for (const auto& t : std::get<PairwiseEnergy>(m.agents[i].objective).terms) {
          e += t.table[x[i]][x[m.variable_index(t.with)]];
        }
      }
      CHECK(total_energy(m, x) == doctest::Approx(e).epsilon(1e-14));
      best = std::min(best, e);
    });
    CHECK(global_minimum_energy(m) == doctest::Approx(best).epsilon(1e-14));
  }
}

TEST_CASE("decode_argmax") {
  CHECK(decode_argmax({{0.2, 0.8}, {0.5, 0.5}, {0.1, 0.3, 0.6}}) ==
        PureProfile{1, 0, 2});
}

TEST_CASE("alpha sweep on a single-agent energy instance always hits the minimum") {
  const auto m = testing::single_agent({0.4, -0.3, 1.2, -0.1}, 0.5);
  SweepOptions opts;
  opts.alpha_grid = {0.1, 0.5, 1, 2, 8, 100};
  opts.restarts = 3;
  opts.base_seed = 9;
  const auto report = alpha_sweep(m, opts);
  REQUIRE(report.rows.size() == 18);
  for (const auto& row : report.rows) {
    CHECK(row.error.empty());
    CHECK(row.converged);
    REQUIRE(row.global_hit.has_value());
    CHECK(*row.global_hit);
    CHECK_FALSE(row.epsilon.has_value());
  }
  CHECK(report.rows[1].seed == 10);
  CHECK(report.rows[3].alpha == 0.5);
}

TEST_CASE("alpha sweep on the prisoner's dilemma") {
  SweepOptions opts;
  opts.alpha_grid = {0.5, 1, 2, 4, 8, 16, 32};
  const auto report = alpha_sweep(testing::prisoners_dilemma(), opts);
  REQUIRE(report.rows.size() == 7);
  for (const auto& row : report.rows) {
    CHECK(row.converged);
    REQUIRE(row.epsilon.has_value());
    CHECK_FALSE(row.global_hit.has_value());
  }
  CHECK(report.rows[0].welfare > 1.0);
  CHECK(std::abs(report.rows[6].welfare - 1.0) <= 0.05);
  for (std::size_t k = 2; k < report.rows.size(); ++k) {
    CHECK(*report.rows[k].epsilon < *report.rows[k - 1].epsilon + 1e-9);
  }
  CHECK(*report.rows[6].epsilon < *report.rows[1].epsilon);
  // Interior fixed point at alpha = 1: p_C = 2/7, gain = p_C * (u(D) - u(C)) = c (1 + c).
  const double c = 2.0 / 7.0;
  CHECK(*report.rows[1].epsilon == doctest::Approx(c * (1 + c)).epsilon(1e-8));
}

TEST_CASE("sweep output does not depend on the thread count") {
  SplitMix64 rng(4);
  const auto m = testing::random_pairwise(rng, 4, 3, 0.7);
  SweepOptions opts;
  opts.alpha_grid = {0.5, 1, 2, 4};
  opts.restarts = 4;
  opts.base_seed = 1234;
  opts.max_iter = 300;
  opts.threads = 1;
  const auto a = alpha_sweep(m, opts);
  opts.threads = 5;
  const auto b = alpha_sweep(m, opts);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].alpha == b.rows[k].alpha);
    CHECK(a.rows[k].seed == b.rows[k].seed);
    CHECK(a.rows[k].converged == b.rows[k].converged);
    CHECK(a.rows[k].iterations == b.rows[k].iterations);
    CHECK(a.rows[k].welfare == b.rows[k].welfare);
    CHECK(a.rows[k].global_hit == b.rows[k].global_hit);
  }
}

TEST_CASE("alpha sweep input checks") {
  const auto pd = testing::prisoners_dilemma();
  SweepOptions opts;
  CHECK_THROWS_AS(alpha_sweep(pd, opts), Error);
  opts.alpha_grid = {1.0, -2.0};
  CHECK_THROWS_AS(alpha_sweep(pd, opts), Error);
  opts.alpha_grid = {1.0};
  opts.restarts = 0;
  CHECK_THROWS_AS(alpha_sweep(pd, opts), Error);
}

}  // namespace
}  // namespace coopt
