#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <climits>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "portfolio/matching.hpp"
#include "portfolio/random.hpp"

using namespace portfolio;
using namespace portfolio::matching;

namespace {

// Independent oracle: minimum-cost perfect matching by enumerating all row
// permutations. Only usable for small n.
long long brute_force_min_cost(const Instance& inst) {
    std::vector<int> perm(inst.n);
    std::iota(perm.begin(), perm.end(), 0);
    long long best = LLONG_MAX;
    do {
        long long total = 0;
        for (int i = 0; i < inst.n; ++i) total += inst.cost[i][perm[i]];
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Instance random_instance(std::mt19937_64& rng, int n, long long max_cost) {
    Instance inst;
    inst.n = n;
    inst.cost.assign(n, std::vector<long long>(n));
    std::uniform_int_distribution<long long> dist(0, max_cost);
    for (auto& row : inst.cost)
        for (auto& c : row) c = dist(rng);
    return inst;
}

using PointSet = std::vector<std::pair<double, double>>;

// A learnable family: every instance of a cluster is the same base point
// configuration plus small per-instance jitter, so optimal duals transfer
// between instances of the same cluster.
PointSet base_points(std::mt19937_64& rng, int count, double cx, double cy, double spread) {
    std::normal_distribution<double> nx(cx, spread), ny(cy, spread);
    PointSet pts(count);
    for (auto& p : pts) p = {nx(rng), ny(rng)};
    return pts;
}

Instance jittered_instance(std::mt19937_64& rng, const PointSet& base, int n, double jitter,
                           double scale) {
    std::normal_distribution<double> noise(0.0, jitter);
    PointSet pts = base;
    for (auto& p : pts) {
        p.first += noise(rng);
        p.second += noise(rng);
    }
    Instance inst;
    inst.n = n;
    inst.cost.assign(n, std::vector<long long>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            inst.cost[i][j] = llround(scale * std::hypot(pts[i].first - pts[n + j].first,
                                                         pts[i].second - pts[n + j].second));
    return inst;
}

DualVector integer_duals(const std::vector<long long>& l, const std::vector<long long>& r) {
    DualVector y;
    for (long long v : l) y.left.emplace_back(static_cast<long>(v));
    for (long long v : r) y.right.emplace_back(static_cast<long>(v));
    return y;
}

} // namespace

TEST_CASE("two-by-two instance has optimum five via the off-diagonal") {
    Instance inst{2, {{1, 2}, {3, 4}}};
    auto res = hungarian_with_duals(inst, zero_duals(2));
    CHECK(res.matching.total_cost == 5);  // both pairings tie at 5 here
    CHECK(brute_force_min_cost(inst) == 5);
}

TEST_CASE("repair keeps left duals and resets right duals to column minima") {
    Instance inst{2, {{1, 2}, {3, 4}}};
    DualVector repaired = make_feasible(inst, zero_duals(2));
    CHECK(repaired.left[0] == 0);
    CHECK(repaired.left[1] == 0);
    CHECK(repaired.right[0] == 1);
    CHECK(repaired.right[1] == 2);
    CHECK(dual_feasible(inst, repaired));
}

TEST_CASE("repair of an oversized single-edge prediction goes negative") {
    Instance inst{1, {{5}}};
    DualVector predicted = integer_duals({9}, {9});
    DualVector repaired = make_feasible(inst, predicted);
    CHECK(repaired.left[0] == 9);
    CHECK(repaired.right[0] == -4);
    CHECK(dual_feasible(inst, repaired));
}

TEST_CASE("repaired predictions are always feasible") {
    auto rng = make_rng(11, 1);
    for (int t = 0; t < 50; ++t) {
        Instance inst = random_instance(rng, 1 + int(rng() % 8), 50);
        std::uniform_int_distribution<long long> d(-60, 60);
        std::vector<long long> l(inst.n), r(inst.n);
        for (auto& v : l) v = d(rng);
        for (auto& v : r) v = d(rng);
        CHECK(dual_feasible(inst, make_feasible(inst, integer_duals(l, r))));
    }
}

TEST_CASE("dual feasibility is checked exactly on every edge") {
    Instance inst{2, {{1, 2}, {3, 4}}};
    CHECK(dual_feasible(inst, integer_duals({0, 0}, {1, 2})));
    // left[0] + right[0] = 2 > cost[0][0] = 1 breaks the very first edge.
    CHECK_FALSE(dual_feasible(inst, integer_duals({1, 0}, {1, 2})));
    CHECK_THROWS_AS(dual_feasible(inst, integer_duals({0}, {0})), std::invalid_argument);
}

TEST_CASE("solver equals brute force on random small instances") {
    auto rng = make_rng(11, 2);
    for (int t = 0; t < 150; ++t) {
        const int n = 1 + int(rng() % 7);
        Instance inst = random_instance(rng, n, 30);
        auto res = hungarian_with_duals(inst, zero_duals(n));
        CHECK(res.matching.total_cost == brute_force_min_cost(inst));

        // The returned pairing must be a permutation.
        std::vector<char> seen(n, 0);
        for (int j : res.matching.pairing) {
            REQUIRE(j >= 0);
            REQUIRE(j < n);
            CHECK(!seen[j]);
            seen[j] = 1;
        }
    }
}

TEST_CASE("final duals certify optimality: feasible, tight on matched edges, objective equals cost") {
    auto rng = make_rng(11, 3);
    for (int t = 0; t < 60; ++t) {
        const int n = 2 + int(rng() % 6);
        Instance inst = random_instance(rng, n, 40);
        auto res = hungarian_with_duals(inst, zero_duals(n));
        CHECK(dual_feasible(inst, res.duals));
        for (int i = 0; i < n; ++i) {
            const int j = res.matching.pairing[i];
            CHECK(res.duals.left[i] + res.duals.right[j] ==
                  Rational(static_cast<long>(inst.cost[i][j])));
        }
        CHECK(dual_objective(res.duals) == Rational(static_cast<long>(res.matching.total_cost)));
    }
}

TEST_CASE("weak duality: any feasible dual objective is at most any matching cost") {
    auto rng = make_rng(11, 4);
    for (int t = 0; t < 40; ++t) {
        const int n = 2 + int(rng() % 5);
        Instance inst = random_instance(rng, n, 25);
        std::uniform_int_distribution<long long> d(-20, 20);
        std::vector<long long> l(n), r(n);
        for (auto& v : l) v = d(rng);
        for (auto& v : r) v = d(rng);
        DualVector y = make_feasible(inst, integer_duals(l, r));
        CHECK(dual_objective(y) <= Rational(static_cast<long>(brute_force_min_cost(inst))));
    }
}

TEST_CASE("warm start from optimal duals performs zero dual updates") {
    auto rng = make_rng(11, 5);
    for (int t = 0; t < 40; ++t) {
        const int n = 2 + int(rng() % 6);
        Instance inst = random_instance(rng, n, 30);
        auto first = hungarian_with_duals(inst, zero_duals(n));
        auto warm = hungarian_with_duals(inst, first.duals);
        CHECK(warm.stats.iterations == 0);
        CHECK(warm.matching.total_cost == first.matching.total_cost);
    }
}

TEST_CASE("infeasible starting duals are rejected") {
    Instance inst{2, {{1, 2}, {3, 4}}};
    CHECK_THROWS_AS(hungarian_with_duals(inst, integer_duals({5, 5}, {5, 5})),
                    std::invalid_argument);
}

TEST_CASE("selection picks the highest dual objective with lowest-index ties") {
    DualVector a = integer_duals({1, 1}, {0, 0});  // objective 2
    DualVector b = integer_duals({2, 2}, {0, 0});  // objective 4
    DualVector c = integer_duals({0, 0}, {2, 2});  // objective 4, tie with b
    CHECK(select_best_dual({a, b, c}) == 1);
    CHECK(select_best_dual({a}) == 0);
    CHECK_THROWS_AS(select_best_dual({}), std::invalid_argument);
}

TEST_CASE("selection bound: objective gap of the chosen dual is at most the best l1 error") {
    auto rng = make_rng(11, 6);
    for (int t = 0; t < 60; ++t) {
        const int n = 2 + int(rng() % 6);
        Instance inst = random_instance(rng, n, 30);
        auto exact = hungarian_with_duals(inst, zero_duals(n));
        const DualVector& ystar = exact.duals;

        std::uniform_int_distribution<long long> d(-15, 15);
        std::vector<DualVector> repaired;
        for (int l = 0; l < 4; ++l) {
            std::vector<long long> lv(n), rv(n);
            for (auto& v : lv) v = d(rng);
            for (auto& v : rv) v = d(rng);
            repaired.push_back(make_feasible(inst, integer_duals(lv, rv)));
        }
        std::size_t chosen = select_best_dual(repaired);

        Rational gap = dual_objective(ystar) - dual_objective(repaired[chosen]);
        Rational best_l1 = l1_error(ystar, repaired[0]);
        for (std::size_t l = 1; l < repaired.size(); ++l)
            best_l1 = std::min(best_l1, l1_error(ystar, repaired[l]));
        CHECK(gap <= best_l1);

        // With integer duals every update phase gains at least one unit of
        // dual objective, so the gap also caps the iteration count.
        auto warm = hungarian_with_duals(inst, repaired[chosen]);
        CHECK(Rational(static_cast<long>(warm.stats.iterations)) <= gap);
    }
}

TEST_CASE("portfolio solve selects the repaired prediction with best objective") {
    auto rng = make_rng(11, 7);
    Instance inst = random_instance(rng, 6, 30);
    auto exact = hungarian_with_duals(inst, zero_duals(6));

    std::vector<DualVector> preds;
    preds.push_back(integer_duals({-9, -9, -9, -9, -9, -9}, {0, 0, 0, 0, 0, 0}));
    preds.push_back(exact.duals);  // an optimal prediction
    auto res = solve_with_portfolio(inst, preds);
    CHECK(res.stats.chosen_index == 1);
    CHECK(res.stats.iterations == 0);
    CHECK(res.stats.repair_work == 2LL * 6 * 6);
    CHECK(res.matching.total_cost == exact.matching.total_cost);

    CHECK_THROWS_AS(solve_with_portfolio(inst, {}), std::invalid_argument);
}

TEST_CASE("portfolio repair gives identical results under serial and parallel execution") {
    auto rng = make_rng(11, 8);
    for (int t = 0; t < 10; ++t) {
        const int n = 3 + int(rng() % 8);
        Instance inst = random_instance(rng, n, 50);
        std::vector<DualVector> preds;
        std::uniform_int_distribution<long long> d(-25, 25);
        for (int l = 0; l < 6; ++l) {
            std::vector<long long> lv(n), rv(n);
            for (auto& v : lv) v = d(rng);
            for (auto& v : rv) v = d(rng);
            preds.push_back(integer_duals(lv, rv));
        }
        auto serial = solve_with_portfolio(inst, preds, ExecPolicy::Serial);
        auto parallel = solve_with_portfolio(inst, preds, ExecPolicy::Parallel);
        CHECK(serial.stats.chosen_index == parallel.stats.chosen_index);
        CHECK(serial.stats.iterations == parallel.stats.iterations);
        CHECK(serial.matching.total_cost == parallel.matching.total_cost);
        CHECK(serial.matching.pairing == parallel.matching.pairing);
    }
}

TEST_CASE("warm-start quality ordering: exact duals, near-miss predictions, cold start") {
    // Near-miss predictions are the optimal duals of a sibling instance drawn
    // from the same geometric cluster; cold start repairs the zero vector.
    auto rng = make_rng(11, 9);
    const int trials = 100;
    const int n = 12;
    PointSet base = base_points(rng, 2 * n, 100.0, -40.0, 30.0);
    long long iters_exact = 0, iters_sibling = 0, iters_zero = 0;
    for (int t = 0; t < trials; ++t) {
        Instance inst = jittered_instance(rng, base, n, 0.8, 10.0);
        Instance sibling = jittered_instance(rng, base, n, 0.8, 10.0);
        auto exact = hungarian_with_duals(inst, zero_duals(n));
        auto sib = hungarian_with_duals(sibling, zero_duals(n));

        iters_exact += hungarian_with_duals(inst, exact.duals).stats.iterations;
        iters_sibling +=
            hungarian_with_duals(inst, make_feasible(inst, sib.duals)).stats.iterations;
        iters_zero += hungarian_with_duals(inst, make_feasible(inst, zero_duals(n)))
                          .stats.iterations;
    }
    CHECK(iters_exact == 0);
    CHECK(iters_exact <= iters_sibling);
    CHECK(iters_sibling <= iters_zero);
}
