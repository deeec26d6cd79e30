#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "portfolio/bench.hpp"
#include "portfolio/random.hpp"

namespace portfolio::bench {

namespace {

// Stream tags keeping cluster bases, train draws and test draws decorrelated.
constexpr std::uint64_t kBaseTag = 100;
constexpr std::uint64_t kTrainTag = 200;
constexpr std::uint64_t kTestTag = 300;

void check_counts(int clusters, int train, int test) {
    if (clusters <= 0) throw std::invalid_argument("mixture: clusters must be positive");
    if (train <= 0 || test <= 0)
        throw std::invalid_argument("mixture: train/test counts must be positive");
}

using Points = std::vector<std::vector<double>>;

Points jitter_points(const Points& base, double radius, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-radius, radius);
    Points out = base;
    for (auto& p : out)
        for (double& x : p) x += d(rng);
    return out;
}

matching::Instance points_to_instance(const Points& pts, int n, int dim, long long scale) {
    matching::Instance inst;
    inst.n = n;
    inst.cost.assign(n, std::vector<long long>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double sq = 0.0;
            for (int x = 0; x < dim; ++x) {
                const double d = pts[i][x] - pts[n + j][x];
                sq += d * d;
            }
            inst.cost[i][j] = std::llround(static_cast<double>(scale) * std::sqrt(sq));
        }
    return inst;
}

} // namespace

MatchingMixture gen_matching_mixture(const MatchingMixtureSpec& spec) {
    check_counts(spec.clusters, spec.train_per_cluster, spec.test_per_cluster);
    if (spec.n <= 0 || spec.dim <= 0)
        throw std::invalid_argument("gen_matching_mixture: n and dim must be positive");
    if (spec.spread < 0.0 || spec.scale_step <= 0.0 || spec.scale_base <= 0)
        throw std::invalid_argument("gen_matching_mixture: bad geometry parameters");
    if (spec.jitter_fraction < 0.0 || spec.jitter_fraction > 1.0)
        throw std::invalid_argument("gen_matching_mixture: jitter_fraction must lie in [0,1]");

    MatchingMixture mix;
    for (int c = 0; c < spec.clusters; ++c) {
        auto base_rng = make_rng(spec.seed, kBaseTag, c);
        std::uniform_real_distribution<double> box(-spec.spread, spec.spread);
        Points base(2 * spec.n, std::vector<double>(spec.dim));
        for (auto& p : base)
            for (double& x : p) x = box(base_rng);
        const long long scale =
            std::llround(static_cast<double>(spec.scale_base) * std::pow(spec.scale_step, c));

        for (int t = 0; t < spec.train_per_cluster; ++t) {
            auto rng = make_rng(spec.seed, kTrainTag + c, t);
            mix.train.push_back(
                points_to_instance(jitter_points(base, spec.spread * spec.jitter_fraction, rng), spec.n, spec.dim, scale));
            mix.train_cluster.push_back(c);
        }
        for (int t = 0; t < spec.test_per_cluster; ++t) {
            auto rng = make_rng(spec.seed, kTestTag + c, t);
            mix.test.push_back(
                points_to_instance(jitter_points(base, spec.spread * spec.jitter_fraction, rng), spec.n, spec.dim, scale));
            mix.test_cluster.push_back(c);
        }
    }
    return mix;
}

namespace {

loadbal::Instance gen_loadbal_instance(const LoadbalMixtureSpec& spec, int c,
                                       std::mt19937_64& rng) {
    loadbal::Instance inst;
    inst.machines = spec.machines;
    std::vector<int> group;
    for (int i = 0; i < spec.machines; ++i)
        if (i % spec.clusters == c) group.push_back(i);
    if (group.empty()) group.push_back(c % spec.machines);

    const int pinned = static_cast<int>(std::lround(spec.pinned_fraction * spec.jobs));
    std::uniform_real_distribution<double> heavy(8.0, 16.0);
    std::uniform_real_distribution<double> light(1.0, 4.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int j = 0; j < spec.jobs; ++j) {
        loadbal::Job job;
        if (j < pinned) {
            job.p = heavy(rng);
            job.nbhd = group;
        } else {
            job.p = light(rng);
            for (int i = 0; i < spec.machines; ++i)
                if (coin(rng) < spec.density) job.nbhd.push_back(i);
            if (job.nbhd.empty())
                job.nbhd.push_back(static_cast<int>(rng() % static_cast<unsigned>(spec.machines)));
        }
        inst.jobs.push_back(std::move(job));
    }
    return inst;
}

} // namespace

LoadbalMixture gen_loadbal_mixture(const LoadbalMixtureSpec& spec) {
    check_counts(spec.clusters, spec.train_per_cluster, spec.test_per_cluster);
    if (spec.machines <= 0 || spec.jobs <= 0)
        throw std::invalid_argument("gen_loadbal_mixture: machines and jobs must be positive");
    if (spec.density < 0.0 || spec.density > 1.0 || spec.pinned_fraction < 0.0 ||
        spec.pinned_fraction > 1.0)
        throw std::invalid_argument("gen_loadbal_mixture: fractions must lie in [0,1]");

    LoadbalMixture mix;
    for (int c = 0; c < spec.clusters; ++c) {
        for (int t = 0; t < spec.train_per_cluster; ++t) {
            auto rng = make_rng(spec.seed, kTrainTag + c, t);
            mix.train.push_back(gen_loadbal_instance(spec, c, rng));
            mix.train_cluster.push_back(c);
        }
        for (int t = 0; t < spec.test_per_cluster; ++t) {
            auto rng = make_rng(spec.seed, kTestTag + c, t);
            mix.test.push_back(gen_loadbal_instance(spec, c, rng));
            mix.test_cluster.push_back(c);
        }
    }
    return mix;
}

SchedMixture gen_sched_mixture(const SchedMixtureSpec& spec) {
    check_counts(spec.clusters, spec.train_per_cluster, spec.test_per_cluster);
    if (spec.n <= 0 || spec.size_max <= 0)
        throw std::invalid_argument("gen_sched_mixture: n and size_max must be positive");
    if (spec.noise_swaps < 0)
        throw std::invalid_argument("gen_sched_mixture: noise_swaps must be non-negative");

    SchedMixture mix;
    for (int c = 0; c < spec.clusters; ++c) {
        auto base_rng = make_rng(spec.seed, kBaseTag, c);
        std::uniform_int_distribution<int> size(1, spec.size_max);
        std::vector<double> profile(spec.n);
        for (double& v : profile) v = static_cast<double>(size(base_rng));

        const sched::Permutation sjf = sched::sjf_order(profile);
        sched::Permutation pred = sjf;
        if (spec.n > 1) {
            std::uniform_int_distribution<int> pos(0, spec.n - 2);
            for (int s = 0; s < spec.noise_swaps; ++s) {
                const int i = pos(base_rng);
                std::swap(pred[i], pred[i + 1]);
            }
        }
        mix.cluster_sjf.push_back(sjf);
        mix.cluster_prediction.push_back(pred);

        std::uniform_real_distribution<double> stretch(0.5, 2.0);
        for (int t = 0; t < spec.train_per_cluster; ++t) {
            auto rng = make_rng(spec.seed, kTrainTag + c, t);
            const double f = stretch(rng);
            std::vector<double> sizes = profile;
            for (double& v : sizes) v *= f;
            mix.train.push_back(std::move(sizes));
            mix.train_cluster.push_back(c);
        }
        for (int t = 0; t < spec.test_per_cluster; ++t) {
            auto rng = make_rng(spec.seed, kTestTag + c, t);
            const double f = stretch(rng);
            std::vector<double> sizes = profile;
            for (double& v : sizes) v *= f;
            mix.test.push_back(std::move(sizes));
            mix.test_cluster.push_back(c);
        }
    }
    return mix;
}

} // namespace portfolio::bench
