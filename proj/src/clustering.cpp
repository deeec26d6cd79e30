#include "portfolio/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace portfolio::cluster {

namespace {

void validate_space(const CostSpace& space, std::size_t k) {
    if (space.num_points == 0) throw std::invalid_argument("kmedian: no points");
    if (space.num_candidates == 0) throw std::invalid_argument("kmedian: no candidate centers");
    if (!space.cost) throw std::invalid_argument("kmedian: missing cost callback");
    if (k == 0) throw std::invalid_argument("kmedian: k must be positive");
    if (k > space.num_candidates)
        throw std::invalid_argument("kmedian: k exceeds candidate count");
}

// Dense point x candidate cost table so the swap sweep is pure array math.
struct CostTable {
    std::size_t points, candidates;
    std::vector<double> c; // row-major: c[p * candidates + cand]

    double at(std::size_t p, std::size_t cand) const { return c[p * candidates + cand]; }
};

CostTable materialize(const CostSpace& space) {
    CostTable t{space.num_points, space.num_candidates, {}};
    t.c.resize(space.num_points * space.num_candidates);
    for (std::size_t p = 0; p < space.num_points; ++p)
        for (std::size_t cand = 0; cand < space.num_candidates; ++cand)
            t.c[p * space.num_candidates + cand] = space.cost(p, cand);
    return t;
}

double table_objective(const CostTable& t, const std::vector<std::size_t>& centers) {
    double sum = 0.0;
    for (std::size_t p = 0; p < t.points; ++p) {
        double best = t.at(p, centers[0]);
        for (std::size_t r = 1; r < centers.size(); ++r)
            best = std::min(best, t.at(p, centers[r]));
        sum += best;
    }
    return sum;
}

// Greedy farthest-point seeding starting from candidate 0. When candidates and
// points are index-aligned (the usual case: candidates are the sample points
// themselves) the distance between candidates is read straight off the table;
// otherwise seeding falls back to greedy best-addition, which is always
// defined.
std::vector<std::size_t> seed_centers(const CostTable& t, std::size_t k) {
    std::vector<std::size_t> centers{0};
    const bool aligned = t.points == t.candidates;
    while (centers.size() < k) {
        std::size_t pick = 0;
        bool have = false;
        if (aligned) {
            double best_dist = -1.0;
            for (std::size_t cand = 0; cand < t.candidates; ++cand) {
                if (std::find(centers.begin(), centers.end(), cand) != centers.end()) continue;
                double d = std::numeric_limits<double>::infinity();
                for (std::size_t s : centers) d = std::min(d, t.at(cand, s));
                if (!have || d > best_dist) {
                    best_dist = d;
                    pick = cand;
                    have = true;
                }
            }
        } else {
            double best_obj = 0.0;
            for (std::size_t cand = 0; cand < t.candidates; ++cand) {
                if (std::find(centers.begin(), centers.end(), cand) != centers.end()) continue;
                centers.push_back(cand);
                double obj = table_objective(t, centers);
                centers.pop_back();
                if (!have || obj < best_obj) {
                    best_obj = obj;
                    pick = cand;
                    have = true;
                }
            }
        }
        if (!have) break; // fewer distinct candidates than k; keep what we have
        centers.push_back(pick);
    }
    return centers;
}

struct SwapEval {
    double objective = std::numeric_limits<double>::infinity();
    std::size_t slot = 0;
    bool valid = false;
};

// Best slot replacement for one incoming candidate; used by both execution
// policies so their arithmetic is identical.
SwapEval best_slot_for_candidate(const CostTable& t, const std::vector<std::size_t>& centers,
                                 std::size_t cand) {
    SwapEval out;
    std::vector<std::size_t> trial = centers;
    for (std::size_t slot = 0; slot < centers.size(); ++slot) {
        trial[slot] = cand;
        double obj = table_objective(t, trial);
        trial[slot] = centers[slot];
        if (!out.valid || obj < out.objective) {
            out.objective = obj;
            out.slot = slot;
            out.valid = true;
        }
    }
    return out;
}

} // namespace

double kmedian_objective(const CostSpace& space, const std::vector<std::size_t>& centers) {
    if (centers.empty()) throw std::invalid_argument("kmedian_objective: empty center set");
    double sum = 0.0;
    for (std::size_t p = 0; p < space.num_points; ++p) {
        double best = space.cost(p, centers[0]);
        for (std::size_t r = 1; r < centers.size(); ++r)
            best = std::min(best, space.cost(p, centers[r]));
        sum += best;
    }
    return sum;
}

KMedianResult kmedian_local_search(const CostSpace& space, std::size_t k,
                                   const KMedianOptions& opts) {
    validate_space(space, k);
    const CostTable t = materialize(space);

    std::vector<std::size_t> centers = opts.initial_centers;
    if (centers.empty()) {
        centers = seed_centers(t, k);
        while (centers.size() < k) {
            // Pad with unused lowest-index candidates (degenerate spaces where
            // farthest-point seeding ran out of distinct choices).
            for (std::size_t cand = 0; cand < t.candidates && centers.size() < k; ++cand)
                if (std::find(centers.begin(), centers.end(), cand) == centers.end())
                    centers.push_back(cand);
        }
    }
    if (centers.size() != k)
        throw std::invalid_argument("kmedian: initial center count differs from k");
    for (std::size_t cand : centers)
        if (cand >= t.candidates) throw std::invalid_argument("kmedian: initial center out of range");

    double current = table_objective(t, centers);
    long long accepted = 0;

    std::vector<char> in_centers(t.candidates, 0);
    std::vector<SwapEval> per_candidate(t.candidates);

    while (accepted < opts.max_iterations) {
        std::fill(in_centers.begin(), in_centers.end(), 0);
        for (std::size_t cand : centers) in_centers[cand] = 1;

        const long long cand_count = static_cast<long long>(t.candidates);
#pragma omp parallel for schedule(static) if (opts.policy == ExecPolicy::Parallel)
        for (long long ci = 0; ci < cand_count; ++ci) {
            const auto cand = static_cast<std::size_t>(ci);
            per_candidate[cand] =
                in_centers[cand] ? SwapEval{} : best_slot_for_candidate(t, centers, cand);
        }

        // Deterministic reduction: best objective, ties to the lowest
        // candidate id (and best_slot_for_candidate already prefers the lowest
        // slot). Identical under either execution policy.
        SwapEval best;
        std::size_t best_cand = 0;
        for (std::size_t cand = 0; cand < t.candidates; ++cand) {
            const SwapEval& e = per_candidate[cand];
            if (e.valid && (!best.valid || e.objective < best.objective)) {
                best = e;
                best_cand = cand;
            }
        }

        if (!best.valid || current - best.objective <= opts.min_relative_gain * std::abs(current))
            break;
        centers[best.slot] = best_cand;
        current = best.objective;
        ++accepted;
    }

    KMedianResult res;
    res.centers = centers;
    res.objective = current;
    res.iterations = accepted;
    res.assignment.resize(t.points);
    for (std::size_t p = 0; p < t.points; ++p) {
        std::size_t arg = 0;
        double best = t.at(p, centers[0]);
        for (std::size_t r = 1; r < k; ++r) {
            double c = t.at(p, centers[r]);
            if (c < best) {
                best = c;
                arg = r;
            }
        }
        res.assignment[p] = arg;
    }
    return res;
}

std::vector<KMedianResult> kmedian_path(const CostSpace& space, std::size_t k_max,
                                        const KMedianOptions& opts) {
    if (k_max == 0) throw std::invalid_argument("kmedian_path: k_max must be positive");
    std::vector<KMedianResult> results;
    results.reserve(k_max);
    const CostTable t = materialize(space);
    for (std::size_t k = 1; k <= k_max && k <= space.num_candidates; ++k) {
        KMedianOptions step = opts;
        if (k > 1) {
            // Warm start: previous centers plus the best single addition, so the
            // training objective can only go down as k grows.
            std::vector<std::size_t> warm = results.back().centers;
            std::size_t pick = 0;
            double best_obj = std::numeric_limits<double>::infinity();
            bool have = false;
            for (std::size_t cand = 0; cand < t.candidates; ++cand) {
                if (std::find(warm.begin(), warm.end(), cand) != warm.end()) continue;
                warm.push_back(cand);
                double obj = table_objective(t, warm);
                warm.pop_back();
                if (!have || obj < best_obj) {
                    best_obj = obj;
                    pick = cand;
                    have = true;
                }
            }
            warm.push_back(pick);
            step.initial_centers = warm;
        }
        results.push_back(kmedian_local_search(space, k, step));
    }
    return results;
}

namespace {

std::vector<matching::DualVector> solve_sample_duals(const std::vector<matching::Instance>& samples,
                                                     ExecPolicy policy) {
    if (samples.empty()) throw std::invalid_argument("erm_duals: no samples");
    const int n = samples[0].n;
    for (const auto& s : samples) {
        matching::validate(s);
        if (s.n != n) throw std::invalid_argument("erm_duals: samples differ in size");
    }
    std::vector<matching::DualVector> duals(samples.size());
    const long long count = static_cast<long long>(samples.size());
#pragma omp parallel for schedule(dynamic) if (policy == ExecPolicy::Parallel)
    for (long long s = 0; s < count; ++s)
        duals[s] = matching::hungarian_with_duals(samples[s], matching::zero_duals(n)).duals;
    return duals;
}

CostSpace dual_space(const std::vector<matching::DualVector>& duals) {
    CostSpace space;
    space.num_points = duals.size();
    space.num_candidates = duals.size();
    space.cost = [&duals](std::size_t p, std::size_t c) {
        return matching::l1_error(duals[p], duals[c]).get_d();
    };
    return space;
}

void fit_sample_weights(const std::vector<loadbal::Instance>& samples, double eps,
                        ExecPolicy policy, WeightErmResult& out) {
    if (samples.empty()) throw std::invalid_argument("erm_weights: no samples");
    const int m = samples[0].machines;
    for (const auto& s : samples) {
        loadbal::validate(s);
        if (s.machines != m) throw std::invalid_argument("erm_weights: samples differ in machines");
    }
    out.sample_weights.resize(samples.size());
    std::vector<char> certified(samples.size(), 0);
    const long long count = static_cast<long long>(samples.size());
#pragma omp parallel for schedule(dynamic) if (policy == ExecPolicy::Parallel)
    for (long long s = 0; s < count; ++s) {
        const auto fit = loadbal::fit_good_weights(samples[s], eps);
        out.sample_weights[s] = fit.weights;
        certified[s] = fit.certified ? 1 : 0;
    }
    for (std::size_t s = 0; s < samples.size(); ++s)
        (certified[s] ? out.kept : out.failed).push_back(s);
    if (out.kept.empty())
        throw std::runtime_error("erm_weights: no sample reached the target ratio");
}

CostSpace weight_space(const WeightErmResult& out) {
    CostSpace space;
    space.num_points = out.kept.size();
    space.num_candidates = out.kept.size();
    space.cost = [&out](std::size_t p, std::size_t c) {
        return loadbal::log_weight_distance(out.sample_weights[out.kept[p]],
                                            out.sample_weights[out.kept[c]]);
    };
    return space;
}

// Candidates and the dense (asymmetric) cost matrix for permutation training:
// entry [s][c] = inversion error of serving sample s with candidate order c.
struct PermPrep {
    std::vector<sched::Permutation> orders;
    std::vector<double> cost; // row-major samples x candidates
};

PermPrep prep_permutations(const std::vector<std::vector<double>>& samples, ExecPolicy policy) {
    if (samples.empty()) throw std::invalid_argument("erm_permutations: no samples");
    const std::size_t n = samples[0].size();
    for (const auto& s : samples)
        if (s.size() != n) throw std::invalid_argument("erm_permutations: samples differ in size");
    PermPrep prep;
    prep.orders.resize(samples.size());
    const long long count = static_cast<long long>(samples.size());
#pragma omp parallel for schedule(dynamic) if (policy == ExecPolicy::Parallel)
    for (long long s = 0; s < count; ++s) prep.orders[s] = sched::sjf_order(samples[s]);
    prep.cost.assign(samples.size() * samples.size(), 0.0);
#pragma omp parallel for schedule(dynamic) if (policy == ExecPolicy::Parallel)
    for (long long s = 0; s < count; ++s)
        for (std::size_t c = 0; c < samples.size(); ++c)
            prep.cost[static_cast<std::size_t>(s) * samples.size() + c] =
                sched::inversion_error(samples[s], prep.orders[c]);
    return prep;
}

CostSpace perm_space(const PermPrep& prep, std::size_t count) {
    CostSpace space;
    space.num_points = count;
    space.num_candidates = count;
    space.cost = [&prep, count](std::size_t p, std::size_t c) { return prep.cost[p * count + c]; };
    return space;
}

} // namespace

DualErmResult erm_duals(const std::vector<matching::Instance>& samples, std::size_t k,
                        const KMedianOptions& opts) {
    DualErmResult out;
    out.sample_duals = solve_sample_duals(samples, opts.policy);
    out.fit = kmedian_local_search(dual_space(out.sample_duals), k, opts);
    for (std::size_t cand : out.fit.centers) out.centers.push_back(out.sample_duals[cand]);
    return out;
}

std::vector<DualErmResult> erm_duals_path(const std::vector<matching::Instance>& samples,
                                          std::size_t k_max, const KMedianOptions& opts) {
    const auto duals = solve_sample_duals(samples, opts.policy);
    const auto fits = kmedian_path(dual_space(duals), std::min(k_max, duals.size()), opts);
    std::vector<DualErmResult> out(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i) {
        out[i].sample_duals = duals;
        out[i].fit = fits[i];
        for (std::size_t cand : fits[i].centers) out[i].centers.push_back(duals[cand]);
    }
    return out;
}

WeightErmResult erm_weights(const std::vector<loadbal::Instance>& samples, std::size_t k,
                            double eps, const KMedianOptions& opts) {
    WeightErmResult out;
    fit_sample_weights(samples, eps, opts.policy, out);
    out.fit = kmedian_local_search(weight_space(out), std::min(k, out.kept.size()), opts);
    const int m = samples[0].machines;
    for (std::size_t cand : out.fit.centers)
        out.centers.push_back(loadbal::snap_to_grid(out.sample_weights[out.kept[cand]], eps, m));
    return out;
}

std::vector<WeightErmResult> erm_weights_path(const std::vector<loadbal::Instance>& samples,
                                              std::size_t k_max, double eps,
                                              const KMedianOptions& opts) {
    WeightErmResult base;
    fit_sample_weights(samples, eps, opts.policy, base);
    const auto fits = kmedian_path(weight_space(base), std::min(k_max, base.kept.size()), opts);
    const int m = samples[0].machines;
    std::vector<WeightErmResult> out(fits.size(), base);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        out[i].fit = fits[i];
        out[i].centers.clear();
        for (std::size_t cand : fits[i].centers)
            out[i].centers.push_back(
                loadbal::snap_to_grid(base.sample_weights[base.kept[cand]], eps, m));
    }
    return out;
}

PermErmResult erm_permutations(const std::vector<std::vector<double>>& samples, std::size_t k,
                               const KMedianOptions& opts) {
    PermErmResult out;
    PermPrep prep = prep_permutations(samples, opts.policy);
    out.fit = kmedian_local_search(perm_space(prep, samples.size()), k, opts);
    for (std::size_t cand : out.fit.centers) out.centers.push_back(prep.orders[cand]);
    out.sample_orders = std::move(prep.orders);
    return out;
}

std::vector<PermErmResult> erm_permutations_path(const std::vector<std::vector<double>>& samples,
                                                 std::size_t k_max, const KMedianOptions& opts) {
    PermPrep prep = prep_permutations(samples, opts.policy);
    const auto fits =
        kmedian_path(perm_space(prep, samples.size()), std::min(k_max, samples.size()), opts);
    std::vector<PermErmResult> out(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i) {
        out[i].fit = fits[i];
        out[i].sample_orders = prep.orders;
        for (std::size_t cand : fits[i].centers) out[i].centers.push_back(prep.orders[cand]);
    }
    return out;
}

} // namespace portfolio::cluster
