// Compares the OpenMP kernels against their serial reference implementations:
// same inputs, wall time for each policy, and a hard equality check that both
// policies produce bit-identical results.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "portfolio/bench.hpp"
#include "portfolio/random.hpp"

using namespace portfolio;

namespace {

template <class F>
double wall_ms(F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

int failures = 0;

void row(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-32s %10.2f ms %10.2f ms   speedup %5.2fx   results %s\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms, identical ? "identical" : "DIFFER");
    if (!identical) ++failures;
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serially\n");
#endif
    std::printf("%-32s %13s %13s\n", "kernel", "serial", "parallel");

    // k-median swap sweep on a large synthetic metric.
    {
        auto rng = make_rng(2026, 1);
        const std::size_t count = 600;
        std::vector<std::pair<double, double>> pts(count);
        std::uniform_real_distribution<double> u(0.0, 1000.0);
        for (auto& p : pts) p = {u(rng), u(rng)};
        cluster::CostSpace space;
        space.num_points = count;
        space.num_candidates = count;
        space.cost = [&pts](std::size_t a, std::size_t b) {
            const double dx = pts[a].first - pts[b].first;
            const double dy = pts[a].second - pts[b].second;
            return std::abs(dx) + std::abs(dy);
        };
        cluster::KMedianOptions serial, parallel;
        serial.policy = ExecPolicy::Serial;
        parallel.policy = ExecPolicy::Parallel;
        cluster::KMedianResult rs, rp;
        const double ts = wall_ms([&] { rs = cluster::kmedian_local_search(space, 8, serial); });
        const double tp = wall_ms([&] { rp = cluster::kmedian_local_search(space, 8, parallel); });
        row("kmedian swap sweep (600 pts)", ts, tp,
            rs.centers == rp.centers && rs.objective == rp.objective &&
                rs.assignment == rp.assignment);
    }

    // Dual-vector training: per-sample exact solves plus clustering.
    {
        bench::MatchingMixtureSpec spec;
        spec.clusters = 3;
        spec.n = 24;
        spec.train_per_cluster = 10;
        spec.test_per_cluster = 1;
        spec.seed = 2;
        auto mix = bench::gen_matching_mixture(spec);
        cluster::KMedianOptions serial, parallel;
        serial.policy = ExecPolicy::Serial;
        parallel.policy = ExecPolicy::Parallel;
        cluster::DualErmResult rs, rp;
        const double ts = wall_ms([&] { rs = cluster::erm_duals(mix.train, 3, serial); });
        const double tp = wall_ms([&] { rp = cluster::erm_duals(mix.train, 3, parallel); });
        bool same = rs.fit.centers == rp.fit.centers && rs.fit.objective == rp.fit.objective &&
                    rs.centers.size() == rp.centers.size();
        for (std::size_t i = 0; same && i < rs.centers.size(); ++i)
            same = rs.centers[i].left == rp.centers[i].left &&
                   rs.centers[i].right == rp.centers[i].right;
        row("dual training (30 x n=24)", ts, tp, same);
    }

    // Portfolio selection: parallel repair + evaluation of predicted duals.
    {
        bench::MatchingMixtureSpec spec;
        spec.clusters = 1;
        spec.n = 48;
        spec.train_per_cluster = 8;
        spec.test_per_cluster = 1;
        spec.seed = 3;
        auto mix = bench::gen_matching_mixture(spec);
        std::vector<matching::DualVector> duals;
        for (const auto& inst : mix.train)
            duals.push_back(matching::hungarian_with_duals(inst, matching::zero_duals(inst.n)).duals);
        matching::HungarianResult rs, rp;
        const auto& probe = mix.test[0];
        const double ts = wall_ms(
            [&] { rs = matching::solve_with_portfolio(probe, duals, ExecPolicy::Serial); });
        const double tp = wall_ms(
            [&] { rp = matching::solve_with_portfolio(probe, duals, ExecPolicy::Parallel); });
        row("portfolio selection (8 duals)", ts, tp,
            rs.matching.total_cost == rp.matching.total_cost &&
                rs.stats.chosen_index == rp.stats.chosen_index &&
                rs.matching.pairing == rp.matching.pairing);
    }

    // Order training: pairwise inversion-error matrix plus clustering.
    {
        bench::SchedMixtureSpec spec;
        spec.clusters = 4;
        spec.n = 300;
        spec.train_per_cluster = 12;
        spec.test_per_cluster = 1;
        spec.noise_swaps = 5;
        spec.seed = 4;
        auto mix = bench::gen_sched_mixture(spec);
        cluster::KMedianOptions serial, parallel;
        serial.policy = ExecPolicy::Serial;
        parallel.policy = ExecPolicy::Parallel;
        cluster::PermErmResult rs, rp;
        const double ts = wall_ms([&] { rs = cluster::erm_permutations(mix.train, 4, serial); });
        const double tp = wall_ms([&] { rp = cluster::erm_permutations(mix.train, 4, parallel); });
        row("order training (48 x n=300)", ts, tp,
            rs.fit.centers == rp.fit.centers && rs.fit.objective == rp.fit.objective &&
                rs.centers == rp.centers);
    }

    if (failures) {
        std::printf("\n%d kernel(s) produced policy-dependent results\n", failures);
        return 1;
    }
    std::printf("\nall kernels agree across policies\n");
    return 0;
}
