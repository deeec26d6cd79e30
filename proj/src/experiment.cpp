#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "portfolio/bench.hpp"
#include "portfolio/random.hpp"

namespace portfolio::bench {

namespace {

void check_config(const ExperimentConfig& cfg) {
    if (cfg.k_max <= 0) throw std::invalid_argument("experiment: k_max must be positive");
    if (cfg.wall_repeats <= 0)
        throw std::invalid_argument("experiment: wall_repeats must be positive");
}

template <class F>
double median_wall_ms(F&& body, int repeats) {
    std::vector<double> ms;
    ms.reserve(repeats);
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    return ms[ms.size() / 2];
}

// Accumulates per-(cluster, k) means over test instances.
struct RowAccum {
    int tested = 0;
    double iterations = 0, wall = 0, makespan = 0, completion = 0;
    std::vector<long long> chosen;
};

struct ReportBuilder {
    int clusters, k_count; // k_count rows per cluster: k = 0..k_count-1
    std::vector<RowAccum> acc;

    ReportBuilder(int clusters_, int k_count_)
        : clusters(clusters_), k_count(k_count_),
          acc(static_cast<std::size_t>(clusters_) * k_count_) {}

    RowAccum& at(int cluster, int k) { return acc[static_cast<std::size_t>(cluster) * k_count + k]; }

    void emit(ExperimentReport& report, const std::vector<double>& objective_by_k) {
        for (int c = 0; c < clusters; ++c)
            for (int k = 0; k < k_count; ++k) {
                const RowAccum& a = at(c, k);
                ReportRow row;
                row.cluster = c;
                row.k = k;
                row.tested = a.tested;
                const double d = std::max(1, a.tested);
                row.mean_iterations = a.iterations / d;
                row.mean_wall_ms = a.wall / d;
                row.mean_makespan_ratio = a.makespan / d;
                row.mean_completion_ratio = a.completion / d;
                row.train_objective = k > 0 ? objective_by_k[k - 1] : 0.0;
                row.chosen_hist = a.chosen;
                report.rows.push_back(std::move(row));
            }
    }
};

} // namespace

ExperimentReport run_experiment(const MatchingMixtureSpec& spec, const ExperimentConfig& cfg) {
    check_config(cfg);
    const MatchingMixture mix = gen_matching_mixture(spec);

    cluster::KMedianOptions opts;
    opts.policy = cfg.policy;
    const auto path = cluster::erm_duals_path(mix.train, cfg.k_max, opts);

    ExperimentReport report;
    report.problem = "matching";
    ReportBuilder rows(spec.clusters, static_cast<int>(path.size()) + 1);
    std::vector<double> objectives;
    for (const auto& fit : path) objectives.push_back(fit.fit.objective);

    for (std::size_t i = 0; i < mix.test.size(); ++i) {
        const auto& inst = mix.test[i];
        const int c = mix.test_cluster[i];

        matching::HungarianResult base;
        RowAccum& a0 = rows.at(c, 0);
        a0.wall += median_wall_ms(
            [&] { base = matching::hungarian_with_duals(inst, matching::zero_duals(inst.n)); },
            cfg.wall_repeats);
        a0.iterations += static_cast<double>(base.stats.iterations);
        ++a0.tested;

        for (std::size_t kk = 0; kk < path.size(); ++kk) {
            matching::HungarianResult res;
            RowAccum& a = rows.at(c, static_cast<int>(kk) + 1);
            a.wall += median_wall_ms(
                [&] { res = matching::solve_with_portfolio(inst, path[kk].centers, cfg.policy); },
                cfg.wall_repeats);
            a.iterations += static_cast<double>(res.stats.iterations);
            if (a.chosen.empty()) a.chosen.assign(path[kk].centers.size(), 0);
            if (res.stats.chosen_index >= 0) ++a.chosen[res.stats.chosen_index];
            ++a.tested;
            if (base.matching.total_cost != res.matching.total_cost)
                throw std::logic_error("experiment: warm-started optimum mismatch");
        }
    }
    rows.emit(report, objectives);
    return report;
}

ExperimentReport run_experiment(const LoadbalMixtureSpec& spec, const ExperimentConfig& cfg) {
    check_config(cfg);
    if (cfg.eps <= 0.0 || cfg.eps >= 1.0)
        throw std::invalid_argument("experiment: eps must lie in (0,1)");
    const LoadbalMixture mix = gen_loadbal_mixture(spec);

    cluster::KMedianOptions opts;
    opts.policy = cfg.policy;
    const auto path = cluster::erm_weights_path(mix.train, cfg.k_max, cfg.eps, opts);

    ExperimentReport report;
    report.problem = "loadbal";
    ReportBuilder rows(spec.clusters, static_cast<int>(path.size()) + 1);
    std::vector<double> objectives;
    for (const auto& fit : path) objectives.push_back(fit.fit.objective);

    for (std::size_t i = 0; i < mix.test.size(); ++i) {
        const auto& inst = mix.test[i];
        const int c = mix.test_cluster[i];
        const double opt = loadbal::fractional_opt_makespan(inst);

        RowAccum& a0 = rows.at(c, 0);
        const loadbal::WeightVector uniform(inst.machines, 1.0);
        double base_mk = 0.0;
        a0.wall += median_wall_ms(
            [&] {
                base_mk = loadbal::fractional_makespan(
                    inst, loadbal::proportional_assignment(inst, uniform));
            },
            cfg.wall_repeats);
        a0.makespan += base_mk / opt;
        ++a0.tested;

        for (std::size_t kk = 0; kk < path.size(); ++kk) {
            std::vector<loadbal::FractionalAssignment> streams;
            for (const auto& w : path[kk].centers)
                streams.push_back(loadbal::proportional_assignment(inst, w));
            loadbal::DoublingOutcome out;
            RowAccum& a = rows.at(c, static_cast<int>(kk) + 1);
            a.wall += median_wall_ms([&] { out = loadbal::combine_with_doubling(inst, streams); },
                                     cfg.wall_repeats);
            a.makespan += out.makespan / opt;
            ++a.tested;
        }
    }
    rows.emit(report, objectives);
    return report;
}

ExperimentReport run_experiment(const SchedMixtureSpec& spec, const ExperimentConfig& cfg) {
    check_config(cfg);
    sched::validate_config(cfg.sched_cfg);
    const SchedMixture mix = gen_sched_mixture(spec);

    cluster::KMedianOptions opts;
    opts.policy = cfg.policy;
    const auto path = cluster::erm_permutations_path(mix.train, cfg.k_max, opts);

    ExperimentReport report;
    report.problem = "sched";
    ReportBuilder rows(spec.clusters, static_cast<int>(path.size()) + 1);
    std::vector<double> objectives;
    for (const auto& fit : path) objectives.push_back(fit.fit.objective);

    for (std::size_t i = 0; i < mix.test.size(); ++i) {
        const auto& sizes = mix.test[i];
        const int c = mix.test_cluster[i];
        const double opt = sched::sjf_opt(sizes);

        RowAccum& a0 = rows.at(c, 0);
        sched::ScheduleResult rr;
        a0.wall += median_wall_ms([&] { rr = sched::round_robin(sizes); }, cfg.wall_repeats);
        a0.completion += rr.total / opt;
        ++a0.tested;

        for (std::size_t kk = 0; kk < path.size(); ++kk) {
            sched::Config scfg = cfg.sched_cfg;
            scfg.seed = mix_seed(cfg.sched_cfg.seed, 400 + kk, i);
            sched::RunResult run;
            RowAccum& a = rows.at(c, static_cast<int>(kk) + 1);
            a.wall += median_wall_ms(
                [&] { run = sched::schedule_with_predictions(sizes, path[kk].centers, scfg); },
                cfg.wall_repeats);
            a.completion += run.schedule.total / opt;
            if (a.chosen.empty()) a.chosen.assign(path[kk].centers.size(), 0);
            for (const auto& tr : run.rounds)
                if (tr.chosen_sequence >= 0) ++a.chosen[tr.chosen_sequence];
            ++a.tested;
        }
    }
    rows.emit(report, objectives);
    return report;
}

} // namespace portfolio::bench
