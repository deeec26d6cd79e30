#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "portfolio/clustering.hpp"
#include "portfolio/random.hpp"

using namespace portfolio;
using namespace portfolio::cluster;

namespace {

CostSpace line_space(const std::vector<double>& xs) {
    CostSpace s;
    s.num_points = xs.size();
    s.num_candidates = xs.size();
    s.cost = [xs](std::size_t p, std::size_t c) { return std::abs(xs[p] - xs[c]); };
    return s;
}

// Independent oracle: exhaustive minimum over all k-subsets of candidates.
double exhaustive_best(const CostSpace& space, std::size_t k,
                       std::vector<std::size_t>* arg = nullptr) {
    std::vector<std::size_t> pick(k);
    std::vector<std::size_t> best_pick;
    double best = std::numeric_limits<double>::infinity();
    auto rec = [&](auto&& self, std::size_t next, std::size_t depth) -> void {
        if (depth == k) {
            double obj = kmedian_objective(space, pick);
            if (obj < best) {
                best = obj;
                best_pick = pick;
            }
            return;
        }
        for (std::size_t c = next; c < space.num_candidates; ++c) {
            pick[depth] = c;
            self(self, c + 1, depth + 1);
        }
    };
    rec(rec, 0, 0);
    if (arg) *arg = best_pick;
    return best;
}

// Random points in the plane under l1 distance: a genuine metric space.
struct PlanePoints {
    std::vector<std::pair<double, double>> pts;
    double d(std::size_t a, std::size_t b) const {
        return std::abs(pts[a].first - pts[b].first) + std::abs(pts[a].second - pts[b].second);
    }
};

PlanePoints random_plane(std::mt19937_64& rng, std::size_t count, double box) {
    std::uniform_real_distribution<double> u(0.0, box);
    PlanePoints p;
    p.pts.resize(count);
    for (auto& q : p.pts) q = {u(rng), u(rng)};
    return p;
}

} // namespace

TEST_CASE("three colinear points, two centers: local search matches exhaustive search") {
    CostSpace s = line_space({0.0, 10.0, 20.0});
    auto res = kmedian_local_search(s, 2);
    CHECK(res.objective == doctest::Approx(exhaustive_best(s, 2)));
    CHECK(res.centers.size() == 2);
}

TEST_CASE("objective is zero when every point can be its own center") {
    CostSpace s = line_space({3.0, 1.0, 4.0, 1.5, 9.0});
    auto res = kmedian_local_search(s, 5);
    CHECK(res.objective == 0.0);
}

TEST_CASE("invalid inputs are rejected") {
    CostSpace s = line_space({1.0, 2.0});
    CHECK_THROWS_AS(kmedian_local_search(s, 0), std::invalid_argument);
    CHECK_THROWS_AS(kmedian_local_search(s, 3), std::invalid_argument);
    CHECK_THROWS_AS(kmedian_local_search(CostSpace{}, 1), std::invalid_argument);
}

TEST_CASE("local search stays within factor five of exhaustive search on random metrics") {
    auto rng = make_rng(23, 1);
    for (int t = 0; t < 40; ++t) {
        const std::size_t count = 5 + rng() % 5; // 5..9 points
        PlanePoints pp = random_plane(rng, count, 100.0);
        CostSpace s;
        s.num_points = count;
        s.num_candidates = count;
        s.cost = [&pp](std::size_t p, std::size_t c) { return pp.d(p, c); };
        for (std::size_t k = 1; k <= 3; ++k) {
            auto res = kmedian_local_search(s, k);
            double best = exhaustive_best(s, k);
            CHECK(res.objective <= 5.0 * best + 1e-9);
            CHECK(res.objective + 1e-9 >= best);
        }
    }
}

TEST_CASE("restricting centers to the points costs at most a factor two on metrics") {
    // Points double as candidates; the enlarged universe adds extra candidate
    // locations that are not points. Exhaustive optima are compared.
    auto rng = make_rng(23, 2);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n_pts = 4 + rng() % 4;   // 4..7 points
        const std::size_t n_extra = 3 + rng() % 3; // extra candidate locations
        PlanePoints pp = random_plane(rng, n_pts + n_extra, 50.0);

        CostSpace restricted;
        restricted.num_points = n_pts;
        restricted.num_candidates = n_pts;
        restricted.cost = [&pp](std::size_t p, std::size_t c) { return pp.d(p, c); };

        CostSpace enlarged = restricted;
        enlarged.num_candidates = n_pts + n_extra;

        for (std::size_t k = 1; k <= 2; ++k) {
            double rbest = exhaustive_best(restricted, k);
            double ebest = exhaustive_best(enlarged, k);
            CHECK(ebest <= rbest + 1e-9);
            CHECK(rbest <= 2.0 * ebest + 1e-9);
        }
    }
}

TEST_CASE("swap acceptance is deterministic and identical across execution policies") {
    auto rng = make_rng(23, 3);
    for (int t = 0; t < 20; ++t) {
        const std::size_t count = 6 + rng() % 8;
        PlanePoints pp = random_plane(rng, count, 10.0);
        CostSpace s;
        s.num_points = count;
        s.num_candidates = count;
        s.cost = [&pp](std::size_t p, std::size_t c) { return pp.d(p, c); };

        KMedianOptions serial, parallel;
        serial.policy = ExecPolicy::Serial;
        parallel.policy = ExecPolicy::Parallel;
        for (std::size_t k = 1; k <= 4; ++k) {
            auto a = kmedian_local_search(s, k, serial);
            auto b = kmedian_local_search(s, k, parallel);
            CHECK(a.centers == b.centers);
            CHECK(a.objective == b.objective); // bit-identical, not approximate
            CHECK(a.iterations == b.iterations);
            CHECK(a.assignment == b.assignment);
        }
    }
}

TEST_CASE("warm-started path gives non-increasing objectives in k") {
    auto rng = make_rng(23, 4);
    for (int t = 0; t < 15; ++t) {
        const std::size_t count = 8 + rng() % 6;
        PlanePoints pp = random_plane(rng, count, 80.0);
        CostSpace s;
        s.num_points = count;
        s.num_candidates = count;
        s.cost = [&pp](std::size_t p, std::size_t c) { return pp.d(p, c); };
        auto path = kmedian_path(s, 6);
        REQUIRE(path.size() == 6);
        for (std::size_t i = 1; i < path.size(); ++i)
            CHECK(path[i].objective <= path[i - 1].objective + 1e-12);
    }
}

TEST_CASE("equal-cost ties resolve to the lowest candidate index") {
    // Two symmetric halves: swapping between mirror candidates never changes
    // the objective, so the seed's choice must stand and the result must be
    // reproducible.
    CostSpace s = line_space({0.0, 0.0, 10.0, 10.0});
    auto a = kmedian_local_search(s, 2);
    auto b = kmedian_local_search(s, 2);
    CHECK(a.centers == b.centers);
    CHECK(a.objective == 0.0);
    // One center per site, lowest index of each duplicate pair.
    CHECK(((a.centers[0] == 0 && a.centers[1] == 2) ||
           (a.centers[0] == 2 && a.centers[1] == 0)));
}

TEST_CASE("dual-vector training recovers one center per well-separated cluster") {
    auto rng = make_rng(23, 5);
    const int n = 8;
    const int per_cluster = 6;
    // Three clusters of assignment instances with very different cost scales;
    // within a cluster only small jitter.
    std::vector<matching::Instance> samples;
    std::vector<int> truth;
    const long long bases[3] = {10, 500, 20000};
    for (int cl = 0; cl < 3; ++cl) {
        std::vector<std::vector<long long>> proto(n, std::vector<long long>(n));
        for (auto& row : proto)
            for (auto& c : row) c = bases[cl] + static_cast<long long>(rng() % (bases[cl] / 5 + 2));
        for (int s = 0; s < per_cluster; ++s) {
            matching::Instance inst;
            inst.n = n;
            inst.cost = proto;
            for (auto& row : inst.cost)
                for (auto& c : row) c += static_cast<long long>(rng() % 3);
            samples.push_back(inst);
            truth.push_back(cl);
        }
    }

    auto erm = erm_duals(samples, 3);
    REQUIRE(erm.centers.size() == 3);

    // Every sample's nearest center must belong to its own cluster: within-
    // cluster dual distance is strictly below cross-cluster distance.
    for (std::size_t p = 0; p < samples.size(); ++p) {
        const std::size_t assigned_center = erm.fit.centers[erm.fit.assignment[p]];
        CHECK(truth[assigned_center] == truth[p]);
    }
    // And the three centers cover all three clusters.
    std::vector<char> covered(3, 0);
    for (std::size_t c : erm.fit.centers) covered[truth[c]] = 1;
    CHECK((covered[0] && covered[1] && covered[2]));
}

TEST_CASE("dual-vector training with k equal to the sample count has zero objective") {
    auto rng = make_rng(23, 6);
    std::vector<matching::Instance> samples;
    for (int s = 0; s < 4; ++s) {
        matching::Instance inst;
        inst.n = 5;
        inst.cost.assign(5, std::vector<long long>(5));
        for (auto& row : inst.cost)
            for (auto& c : row) c = static_cast<long long>(rng() % 40);
        samples.push_back(inst);
    }
    auto erm = erm_duals(samples, samples.size());
    CHECK(erm.fit.objective == 0.0);
}

TEST_CASE("weight portfolio training separates two load regimes") {
    auto rng = make_rng(2026, 42, 7);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    // Each regime pins two heavy jobs on one machine pair; flexible jobs must
    // learn to prefer the free pair.
    auto make_sample = [&](bool mirrored) {
        loadbal::Instance inst;
        inst.machines = 4;
        for (int i : {mirrored ? 2 : 0, mirrored ? 3 : 1}) {
            loadbal::Job j;
            j.p = 20.0 * jitter(rng);
            j.nbhd = {i};
            inst.jobs.push_back(j);
        }
        for (int r = 0; r < 8; ++r) {
            loadbal::Job j;
            j.p = 5.0 * jitter(rng);
            j.nbhd = {0, 1, 2, 3};
            inst.jobs.push_back(j);
        }
        return inst;
    };
    std::vector<loadbal::Instance> samples;
    for (int s = 0; s < 5; ++s) samples.push_back(make_sample(false));
    for (int s = 0; s < 5; ++s) samples.push_back(make_sample(true));

    const double eps = 0.3;
    const auto erm = erm_weights(samples, 2, eps);
    CHECK(erm.failed.empty());
    REQUIRE(erm.kept.size() == 10);
    REQUIRE(erm.fit.centers.size() == 2);
    REQUIRE(erm.centers.size() == 2);
    for (int s = 1; s < 5; ++s) {
        CHECK(erm.fit.assignment[s] == erm.fit.assignment[0]);
        CHECK(erm.fit.assignment[5 + s] == erm.fit.assignment[5]);
    }
    CHECK(erm.fit.assignment[0] != erm.fit.assignment[5]);

    // Fitted weights suppress each regime's loaded machine pair.
    for (int s = 0; s < 5; ++s) {
        const auto& w = erm.sample_weights[s];
        CHECK(std::max(w[0], w[1]) < std::min(w[2], w[3]));
        const auto& v = erm.sample_weights[5 + s];
        CHECK(std::max(v[2], v[3]) < std::min(v[0], v[1]));
    }

    // Exported centers live on the (1 + eps/m) power grid.
    const double base = 1.0 + eps / 4.0;
    for (const auto& c : erm.centers)
        for (double v : c) {
            const double expo = std::log(v) / std::log(base);
            CHECK(std::abs(expo - std::round(expo)) < 1e-6);
        }

    CHECK_THROWS_AS(erm_weights({}, 2, eps), std::invalid_argument);
    loadbal::Instance other;
    other.machines = 3;
    CHECK_THROWS_AS(erm_weights({samples[0], other}, 1, eps), std::invalid_argument);
}

TEST_CASE("order portfolio training: identical samples share one zero-cost center") {
    std::vector<std::vector<double>> samples(4, std::vector<double>{5.0, 1.0, 3.0, 2.0});
    auto erm = erm_permutations(samples, 1);
    REQUIRE(erm.centers.size() == 1);
    CHECK(erm.centers[0] == sched::Permutation{1, 3, 2, 0});
    CHECK(erm.fit.objective == 0.0);
    // Serving each sample with its own shortest-first order costs nothing.
    for (std::size_t s = 0; s < samples.size(); ++s)
        CHECK(sched::inversion_error(samples[s], erm.sample_orders[s]) == 0.0);
}

TEST_CASE("order portfolio training separates two order-isomorphic families") {
    // Family A is ascending, family B descending; scaling sizes never changes
    // the shortest-first order, so each family shares one exact center.
    std::vector<std::vector<double>> samples;
    for (double scale : {1.0, 2.0, 3.5}) {
        samples.push_back({1.0 * scale, 2.0 * scale, 4.0 * scale, 8.0 * scale});
        samples.push_back({8.0 * scale, 4.0 * scale, 2.0 * scale, 1.0 * scale});
    }
    auto erm = erm_permutations(samples, 2);
    REQUIRE(erm.centers.size() == 2);
    CHECK(erm.fit.objective == 0.0);
    // Every sample's assigned center serves it with zero inversion error, and
    // the opposite family's order is strictly worse.
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const auto& own = erm.centers[erm.fit.assignment[s]];
        CHECK(sched::inversion_error(samples[s], own) == 0.0);
        const auto& cross = erm.centers[1 - erm.fit.assignment[s]];
        CHECK(sched::inversion_error(samples[s], cross) > 0.0);
    }
    CHECK(erm.fit.assignment[0] != erm.fit.assignment[1]);
    CHECK(erm.fit.assignment[0] == erm.fit.assignment[2]);
    CHECK(erm.fit.assignment[1] == erm.fit.assignment[3]);
}

TEST_CASE("order portfolio training rejects mismatched sample lengths") {
    CHECK_THROWS_AS(erm_permutations({}, 1), std::invalid_argument);
    CHECK_THROWS_AS(erm_permutations({{1.0, 2.0}, {1.0, 2.0, 3.0}}, 1), std::invalid_argument);
}

TEST_CASE("portfolio training paths have non-increasing objectives") {
    auto rng = make_rng(23, 7);
    std::uniform_real_distribution<double> u(1.0, 100.0);
    std::vector<std::vector<double>> samples;
    for (int s = 0; s < 8; ++s) {
        std::vector<double> sizes(6);
        for (auto& p : sizes) p = u(rng);
        samples.push_back(sizes);
    }
    auto path = erm_permutations_path(samples, 4);
    REQUIRE(path.size() == 4);
    for (std::size_t i = 0; i < path.size(); ++i) {
        CHECK(path[i].centers.size() == i + 1);
        if (i > 0) CHECK(path[i].fit.objective <= path[i - 1].fit.objective + 1e-12);
    }
    // The k = 1 rung of the path agrees with the direct single-center fit.
    auto direct = erm_permutations(samples, 1);
    CHECK(path[0].fit.objective == direct.fit.objective);
    CHECK(path[0].centers == direct.centers);

    // Same for dual-vector training over small assignment instances.
    std::vector<matching::Instance> insts;
    for (int s = 0; s < 5; ++s) {
        matching::Instance inst;
        inst.n = 4;
        inst.cost.assign(4, std::vector<long long>(4));
        for (auto& row : inst.cost)
            for (auto& c : row) c = static_cast<long long>(rng() % 60);
        insts.push_back(inst);
    }
    auto dpath = erm_duals_path(insts, 3);
    REQUIRE(dpath.size() == 3);
    for (std::size_t i = 1; i < dpath.size(); ++i)
        CHECK(dpath[i].fit.objective <= dpath[i - 1].fit.objective + 1e-12);
    CHECK(dpath[2].fit.objective >= 0.0);
    CHECK(std::isfinite(dpath[2].fit.objective));

    // And for weight training: k above the certified count truncates.
    std::vector<loadbal::Instance> linsts;
    for (int s = 0; s < 3; ++s) {
        loadbal::Instance inst;
        inst.machines = 2;
        for (int j = 0; j < 4; ++j) {
            loadbal::Job job;
            job.p = 1.0 + static_cast<double>(rng() % 5);
            job.nbhd = {0, 1};
            inst.jobs.push_back(job);
        }
        linsts.push_back(inst);
    }
    auto wpath = erm_weights_path(linsts, 5, 0.3);
    REQUIRE(!wpath.empty());
    CHECK(wpath.size() <= 3);
    for (std::size_t i = 1; i < wpath.size(); ++i)
        CHECK(wpath[i].fit.objective <= wpath[i - 1].fit.objective + 1e-12);
}
