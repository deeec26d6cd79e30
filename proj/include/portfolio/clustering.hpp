#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "portfolio/loadbal.hpp"
#include "portfolio/matching.hpp"
#include "portfolio/parallel.hpp"
#include "portfolio/sched.hpp"

namespace portfolio::cluster {

// Clustering problem over opaque items. Points and candidate centers are
// integer ids tied together by a cost callback; the callback need not be
// symmetric (permutation costs are not), but must be non-negative.
struct CostSpace {
    std::size_t num_points = 0;
    std::size_t num_candidates = 0;
    std::function<double(std::size_t point, std::size_t candidate)> cost;
};

struct KMedianResult {
    std::vector<std::size_t> centers;    // chosen candidate ids
    std::vector<std::size_t> assignment; // per point: index into `centers`
    double objective = 0.0;
    long long iterations = 0;            // accepted swaps
};

struct KMedianOptions {
    long long max_iterations = 10000;
    double min_relative_gain = 1e-9; // a swap must beat the objective by this relative margin
    ExecPolicy policy = ExecPolicy::Parallel;
    // Optional warm start; empty means greedy farthest-point seeding from the
    // first candidate.
    std::vector<std::size_t> initial_centers;
};

double kmedian_objective(const CostSpace& space, const std::vector<std::size_t>& centers);

// Single-swap local search with deterministic best-improvement tie-breaking
// (lowest candidate id, then lowest slot). The swap sweep runs as an OpenMP
// kernel or as the serial reference depending on options.policy; both produce
// bit-identical results.
KMedianResult kmedian_local_search(const CostSpace& space, std::size_t k,
                                   const KMedianOptions& opts = {});

// Solutions for every k in 1..k_max, each warm-started from the previous one
// plus the best single addition; objectives are non-increasing in k.
std::vector<KMedianResult> kmedian_path(const CostSpace& space, std::size_t k_max,
                                        const KMedianOptions& opts = {});

// Prediction-portfolio training for the assignment problem: solves every
// sample exactly, then clusters the optimal dual vectors under l1 distance
// with the samples' own duals as candidate centers.
struct DualErmResult {
    std::vector<matching::DualVector> centers;
    std::vector<matching::DualVector> sample_duals;
    KMedianResult fit;
};
DualErmResult erm_duals(const std::vector<matching::Instance>& samples, std::size_t k,
                        const KMedianOptions& opts = {});

// Prediction-portfolio training for proportional load balancing: fits machine
// weights to every sample, drops samples whose fit missed the (1+eps) bound,
// and clusters the remaining weight vectors under the log multiplicative-error
// metric. Exported centers are snapped to the (1+eps/m)-power grid.
struct WeightErmResult {
    std::vector<loadbal::WeightVector> centers;        // snapped to the export grid
    std::vector<loadbal::WeightVector> sample_weights; // one fit per sample, in order
    std::vector<std::size_t> kept;                     // sample indices that certified
    std::vector<std::size_t> failed;                   // sample indices that did not
    KMedianResult fit; // clustering over `kept` (point i = kept[i])
};
WeightErmResult erm_weights(const std::vector<loadbal::Instance>& samples, std::size_t k,
                            double eps, const KMedianOptions& opts = {});

// Prediction-portfolio training for single-machine scheduling: candidate
// centers are each sample's shortest-first order and the (asymmetric) cost of
// serving sample s with order o is inversion_error(sizes_s, o).
struct PermErmResult {
    std::vector<sched::Permutation> centers;
    std::vector<sched::Permutation> sample_orders; // shortest-first order per sample
    KMedianResult fit;
};
PermErmResult erm_permutations(const std::vector<std::vector<double>>& samples, std::size_t k,
                               const KMedianOptions& opts = {});

// Per-k portfolios over one shared training space: result[i] is the (i+1)-center
// fit, warm-started down the path so objectives are non-increasing in k.
// k values above the candidate count are truncated (weights: above the number
// of certified samples).
std::vector<DualErmResult> erm_duals_path(const std::vector<matching::Instance>& samples,
                                          std::size_t k_max, const KMedianOptions& opts = {});
std::vector<WeightErmResult> erm_weights_path(const std::vector<loadbal::Instance>& samples,
                                              std::size_t k_max, double eps,
                                              const KMedianOptions& opts = {});
std::vector<PermErmResult> erm_permutations_path(const std::vector<std::vector<double>>& samples,
                                                 std::size_t k_max,
                                                 const KMedianOptions& opts = {});

} // namespace portfolio::cluster
