#pragma once

#include <cstddef>
#include <vector>

namespace portfolio::loadbal {

// One job of a fractional load-balancing instance.
// Restricted mode: the job has a single size `p` and may run on any machine in
// `nbhd`. Unrelated mode: `p_by_machine` gives a per-machine size (used for
// machines listed in `nbhd`); machines outside `nbhd` are forbidden.
struct Job {
    double p = 0.0;
    std::vector<double> p_by_machine; // empty in restricted mode
    std::vector<int> nbhd;            // admissible machines, 0-based
};

struct Instance {
    int machines = 0;
    std::vector<Job> jobs;
};

void validate(const Instance& inst);
bool is_restricted(const Instance& inst);

// Size of job j on machine i; +infinity when the machine is not admissible.
double size_on(const Instance& inst, int job, int machine);

// rows[j][i] = fraction of job j assigned to machine i.
struct FractionalAssignment {
    std::vector<std::vector<double>> rows;
};

using WeightVector = std::vector<double>;

// Fraction vector of one job under proportional weights:
// x_i = w_i / sum of weights over the job's neighborhood; zero elsewhere.
// Weights must be strictly positive (throws std::invalid_argument).
std::vector<double> proportional_row(const Instance& inst, int job, const WeightVector& w);
FractionalAssignment proportional_assignment(const Instance& inst, const WeightVector& w);

// Maximum machine load of a fractional assignment. Validates shape, row sums,
// and that no job places mass on a forbidden machine.
double fractional_makespan(const Instance& inst, const FractionalAssignment& x);

// Optimal fractional makespan of a restricted-assignment instance, computed by
// binary search over a max-flow feasibility oracle. Relative accuracy 1e-6.
// Throws std::invalid_argument for unrelated-mode instances.
double fractional_opt_makespan(const Instance& inst);

// Multiplicative-update search for machine weights whose proportional
// assignment is within (1+eps) of the optimal fractional makespan.
// The search is heuristic; `certified` reports whether the bound was met, and
// the returned weights are the best iterate seen.
struct WeightFitResult {
    WeightVector weights;
    double opt_makespan = 0.0;
    double achieved_makespan = 0.0;
    double ratio = 0.0;
    bool certified = false;
    long long rounds_used = 0;
};
WeightFitResult fit_good_weights(const Instance& inst, double eps);

// Pairwise multiplicative error between two positive weight vectors:
// eta = max_i max(w_i/w'_i, w'_i/w_i) >= 1. log(eta) is a metric.
double weight_error(const WeightVector& a, const WeightVector& b);
double log_weight_distance(const WeightVector& a, const WeightVector& b);

// Snap every coordinate to the nearest power of (1+eps/m), after normalizing
// the smallest coordinate to 1. Exported portfolio centers live on this grid.
WeightVector snap_to_grid(const WeightVector& w, double eps, int machines);

// ---- Online combination of k fractional assignment streams ----------------

// State of the combiner after some prefix of jobs. `active` tracks which
// streams are still in play; contributions[l][i] accumulates the share of
// machine i's combined load attributable to stream l.
struct CombinerState {
    double beta = 0.0;
    std::vector<char> active;
    std::vector<std::vector<double>> stream_load; // per active stream's own loads
    std::vector<double> combined_load;
    std::vector<std::vector<double>> contributions;
    std::vector<int> removed_at; // job index at whose step the stream left; -1 = still active
    int next_job = 0;
};

CombinerState make_combiner(const Instance& inst, std::size_t streams, double beta);

// One online step: consumes each stream's fraction row for job state.next_job.
// On success emits the uniform average over the streams that keep every
// single-machine piece of this job at or below beta, then drops streams whose
// own running makespan exceeded beta. Returns failure — leaving the state
// untouched so the caller may retry with a larger beta — when no stream is
// active or none passes the per-job filter.
struct CombineStep {
    bool failed = false;
    std::vector<double> emitted;
};
CombineStep combine_step(const Instance& inst, CombinerState& state,
                         const std::vector<std::vector<double>>& stream_rows);

// Runs combine_step over all jobs at a fixed beta.
struct CombineOutcome {
    bool failed = false;
    int fail_job = -1;
    FractionalAssignment assignment; // rows emitted before any failure
    std::vector<double> combined_load;
    double makespan = 0.0;
    CombinerState state;
};
CombineOutcome combine_run(const Instance& inst, const std::vector<FractionalAssignment>& streams,
                           double beta);

// Online beta-doubling wrapper: starts from a first-job lower bound, doubles
// beta and reactivates all streams whenever a step fails, and keeps prior
// emitted rows. Never fails.
struct DoublingOutcome {
    FractionalAssignment assignment;
    double beta_initial = 0.0;
    double beta_final = 0.0;
    int doublings = 0;
    std::vector<double> combined_load;
    double makespan = 0.0;
};
DoublingOutcome combine_with_doubling(const Instance& inst,
                                      const std::vector<FractionalAssignment>& streams);

} // namespace portfolio::loadbal
