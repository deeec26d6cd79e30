#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "portfolio/clustering.hpp"
#include "portfolio/loadbal.hpp"
#include "portfolio/matching.hpp"
#include "portfolio/parallel.hpp"
#include "portfolio/sched.hpp"

namespace portfolio::bench {

// ---------------------------------------------------------------------------
// Synthetic mixtures: every generator is a pure function of its spec, so a
// fixed seed reproduces instances byte-for-byte.
// ---------------------------------------------------------------------------

template <class I>
struct Mixture {
    std::vector<I> train, test;
    std::vector<int> train_cluster, test_cluster; // cluster id per instance
};

// Assignment instances from point geometry: each cluster owns a fixed base
// layout of 2n points inside a box of half-width `spread` (drawn once from the
// cluster's stream) and a cost scale that grows by `scale_step` per cluster;
// every instance jitters the base points by spread * jitter_fraction and takes
// cost[i][j] = round(scale * euclidean(left_i, right_j)).
struct MatchingMixtureSpec {
    int clusters = 3;
    int n = 8;           // per-side size
    int dim = 2;         // embedding dimension
    double spread = 1.0; // half-width of the cluster's point box; 0 degenerates all costs to 0
    double jitter_fraction = 0.25; // per-instance point noise, relative to spread
    double scale_step = 10.0; // cost-scale ratio between consecutive clusters
    long long scale_base = 100; // cost scale of cluster 0
    int train_per_cluster = 20;
    int test_per_cluster = 10;
    std::uint64_t seed = 0;
};
using MatchingMixture = Mixture<matching::Instance>;
MatchingMixture gen_matching_mixture(const MatchingMixtureSpec& spec);

// Restricted-assignment instances: cluster c pins a fraction of heavy jobs to
// the machine group {i : i mod clusters == c}; the rest are light jobs whose
// neighborhoods keep each machine with probability `density` (at least one
// machine always survives, so density 0 yields singleton neighborhoods).
struct LoadbalMixtureSpec {
    int clusters = 2;
    int machines = 4;
    int jobs = 12;
    double density = 0.5;
    double pinned_fraction = 0.6;
    int train_per_cluster = 5;
    int test_per_cluster = 3;
    std::uint64_t seed = 0;
};
using LoadbalMixture = Mixture<loadbal::Instance>;
LoadbalMixture gen_loadbal_mixture(const LoadbalMixtureSpec& spec);

// Scheduling instances: each cluster fixes a size profile once (integer sizes)
// and every instance rescales the whole profile by a random factor, keeping
// the order identical inside a cluster. Each cluster also carries its true
// shortest-first order and a prediction derived from it by `noise_swaps`
// random adjacent transpositions.
struct SchedMixtureSpec {
    int clusters = 2;
    int n = 50;
    int size_max = 100; // profile sizes drawn uniformly from {1..size_max}
    int noise_swaps = 0;
    int train_per_cluster = 5;
    int test_per_cluster = 3;
    std::uint64_t seed = 0;
};
struct SchedMixture : Mixture<std::vector<double>> {
    std::vector<sched::Permutation> cluster_sjf;        // true shortest-first order per cluster
    std::vector<sched::Permutation> cluster_prediction; // the noisy variant handed to learners
};
SchedMixture gen_sched_mixture(const SchedMixtureSpec& spec);

// ---------------------------------------------------------------------------
// End-to-end experiments: train a portfolio per k on the train split, evaluate
// on the test split, and report one row per (cluster, k). k = 0 rows are the
// no-learning baselines (zero duals / uniform weights / plain round-robin).
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    int k_max = 3;
    double eps = 0.1;         // weight-fitting accuracy for load balancing
    sched::Config sched_cfg;  // scheduling knobs (eps, mode, sample constant, ...)
    int wall_repeats = 3;     // wall time is the median over this many repetitions
    ExecPolicy policy = ExecPolicy::Parallel;
};

struct ReportRow {
    int cluster = -1;
    int k = 0;                        // 0 = no-learning baseline
    int tested = 0;                   // test instances behind the means
    double mean_iterations = 0.0;     // matching: dual-update phases
    double mean_wall_ms = 0.0;        // median-of-repeats wall time, averaged
    double mean_makespan_ratio = 0.0; // load balancing: combined / fractional optimum
    double mean_completion_ratio = 0.0; // scheduling: total / sjf_opt
    double train_objective = 0.0;     // ERM objective of the k-center fit
    std::vector<long long> chosen_hist; // how often each prediction was selected
};

struct ExperimentReport {
    std::string problem;
    std::vector<ReportRow> rows;
};

ExperimentReport run_experiment(const MatchingMixtureSpec& spec, const ExperimentConfig& cfg);
ExperimentReport run_experiment(const LoadbalMixtureSpec& spec, const ExperimentConfig& cfg);
ExperimentReport run_experiment(const SchedMixtureSpec& spec, const ExperimentConfig& cfg);

std::string report_to_csv(const ExperimentReport& report);

// ---------------------------------------------------------------------------
// File formats. JSON round-trips are exact for instances; dual vectors are
// serialized as doubles and re-repaired on use, since the solving pipeline
// restores feasibility anyway.
// ---------------------------------------------------------------------------

std::string to_json(const matching::Instance& inst);
std::string to_json(const loadbal::Instance& inst);
std::string sizes_to_json(const std::vector<double>& sizes);

matching::Instance matching_from_json(const std::string& text);
loadbal::Instance loadbal_from_json(const std::string& text);
std::vector<double> sizes_from_json(const std::string& text);

std::string portfolio_to_json(const std::vector<matching::DualVector>& duals);
std::string portfolio_to_json(const std::vector<loadbal::WeightVector>& weights);
std::string portfolio_to_json(const std::vector<sched::Permutation>& perms);

std::vector<matching::DualVector> duals_from_json(const std::string& text);
std::vector<loadbal::WeightVector> weights_from_json(const std::string& text);
std::vector<sched::Permutation> perms_from_json(const std::string& text);

// CSV rows for per-instance runs, in the column orders the tooling expects.
struct MatchingStatsRow {
    int instance_id = 0;
    int k = 0;
    int chosen_index = -1;
    long long iterations = 0;
    long long total_cost = 0;
};
std::string matching_stats_csv(const std::vector<MatchingStatsRow>& rows);

struct LoadbalRunRow {
    int instance_id = 0;
    int k = 0;
    double beta = 0.0;
    long long doublings = 0;
    double makespan = 0.0;
    double bound_2hk_beta = 0.0;
};
std::string loadbal_run_csv(const std::vector<LoadbalRunRow>& rows);

struct SchedResultRow {
    int instance_id = 0;
    int k = 0;
    double eps = 0.0;
    std::string mode;
    double total = 0.0;
    double opt = 0.0;
    double rr_total = 0.0;
    double ratio = 0.0;
};
std::string sched_result_csv(const std::vector<SchedResultRow>& rows);

// round, n_r, q_tilde, y_tilde, action, T_r, completed (count) per round.
std::string sched_trace_csv(const std::vector<sched::RoundTrace>& rounds);

// k, objective, iterations, per-cluster sizes for a portfolio training run.
std::string training_report_csv(const std::vector<cluster::KMedianResult>& fits);

} // namespace portfolio::bench
