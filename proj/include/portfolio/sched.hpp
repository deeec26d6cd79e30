#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace portfolio::sched {

// A permutation of the n job indices (a predicted processing order).
using Permutation = std::vector<int>;

enum class Mode { Basic, Improved };

// Knobs of the sampling scheduler. `eps` controls every sample size and
// threshold; `sample_constant` scales the improved-mode sample size (the
// theory gives only an order of growth); `bad_multiplier` sets the
// classification cut: a sequence is labeled bad when its estimated fraction of
// oversized prefix jobs reaches bad_multiplier * eps^2.
struct Config {
    double eps = 0.2; // in (0, 1/4]
    Mode mode = Mode::Improved;
    double sample_constant = 2.0;
    double bad_multiplier = 2.0;
    double share = 0.2; // fallback share for preferential time sharing
    std::uint64_t seed = 0;
};

void validate_config(const Config& cfg);

// Per-round sample sizes and the cutoff below which the scheduler finishes
// with plain round-robin. Basic mode: ln(n)/eps^2 percentile samples,
// (ln n + ln k)/eps^2 classification samples, cutoff (ln n + ln k)/eps^4.
// Improved mode: one shared size ceil((c/eps^2) ln(k eps^-3 ln n)), cutoff
// 8*size/eps^2.
long long percentile_sample_size(const Config& cfg, std::size_t n, std::size_t k);
long long classify_sample_size(const Config& cfg, std::size_t n, std::size_t k);
double terminal_cutoff(const Config& cfg, std::size_t n, std::size_t k);

// ---- cost and error functions ---------------------------------------------

// Total completion time when jobs run to completion in `order`.
double sequence_cost(const std::vector<double>& sizes, const Permutation& order);

// Nondecreasing-size order (ties by index) and its cost — the optimum.
Permutation sjf_order(const std::vector<double>& sizes);
double sjf_opt(const std::vector<double>& sizes);

// Sum of |p_i - p_j| over pairs ordered large-before-strictly-smaller.
// Equals sequence_cost - sjf_opt. O(n log n).
double inversion_error(const std::vector<double>& sizes, const Permutation& order);

struct ScheduleResult {
    std::vector<double> completion;
    double total = 0.0;
};

// Egalitarian processor sharing at the given speed: all alive jobs progress at
// equal rates; completions are computed analytically batch by batch.
ScheduleResult round_robin(const std::vector<double>& sizes, double speed = 1.0);

// Round every size to a power of (1+eps): output_j = (1+eps)^t_j where
// (1+eps)^(t_j + rho) is the smallest such value >= p_j. The true-scale
// rounded size is output_j * (1+eps)^rho, within [p_j, (1+eps) p_j].
std::vector<double> round_sizes(const std::vector<double>& sizes, double eps, double rho);

// ---- sampling subroutines ---------------------------------------------------

// Sizes come in two parallel views: `decision` sizes drive every comparison
// (the scheduler sees these), `truth` sizes accrue processing time. Callers
// outside the simulator may pass the same array twice.

// Draw `samples` jobs with replacement and share the processor among the
// copies until ceil(eps * samples) of them complete. threshold_size is the
// (rounded) size of the copy finishing at that instant — ties complete
// together, attributed by job index then draw order. completed_copies counts
// every copy at or below the threshold; estimated_rank scales that count to
// the population and is clamped to [1, n].
struct PercentileEstimate {
    double threshold_size = 0.0;
    double estimated_rank = 0.0;
    long long completed_copies = 0;
    double time_spent = 0.0;
    std::vector<int> sample; // drawn positions, in draw order
};
PercentileEstimate estimate_percentile(const std::vector<double>& decision,
                                       const std::vector<double>& truth, long long samples,
                                       double eps, std::mt19937_64& rng);

// For each prefix (a list of job ids), sample `samples` positions with
// replacement, run each sampled copy for at most threshold_size units to test
// whether it is oversized, and label the prefix bad when the sampled oversized
// fraction reaches bad_fraction.
struct ClassifyResult {
    std::vector<char> bad;
    std::vector<double> big_fraction;
    double time_spent = 0.0;
};
ClassifyResult classify_sequences(const std::vector<std::vector<int>>& prefixes,
                                  const std::vector<double>& decision,
                                  const std::vector<double>& truth, double threshold_size,
                                  long long samples, double bad_fraction, std::mt19937_64& rng);

// ---- the multi-round scheduler ----------------------------------------------

enum class RoundAction { FollowSequence, ProcessAll, FinalRoundRobin };

struct RoundTrace {
    long long round = 0;
    long long alive_count = 0;    // jobs alive when the round started
    double clock_start = 0.0;
    double threshold_size = 0.0;  // percentile estimate (0 in the final row)
    double estimated_rank = 0.0;
    double estimation_time = 0.0; // percentile + classification sampling time
    double duration = 0.0;        // total round time including processing
    RoundAction action = RoundAction::ProcessAll;
    int chosen_sequence = -1;     // only set for FollowSequence
    std::vector<char> bad;        // per-sequence labels (empty in the final row)
    std::vector<int> completed;   // job ids finished this round, in completion order
    bool rank_failure = false;    // threshold fell outside its target rank window
    bool count_failure = false;   // estimated_rank missed the true count by > eps^2 * alive
};

struct SchedulerState {
    Config cfg;
    std::vector<double> truth;    // hidden true sizes
    std::vector<double> decision; // rounded sizes used for every comparison
    std::vector<Permutation> predictions;
    std::mt19937_64 rng;
    std::vector<char> alive;
    long long alive_count = 0;
    double clock = 0.0;
    std::vector<double> completion;
    std::vector<RoundTrace> rounds;
    long long round = 0;
    double rho = 0.0;
    long long percentile_samples = 0;
    long long classify_samples = 0;
    double cutoff = 0.0;
};

SchedulerState make_scheduler(const std::vector<double>& sizes,
                              const std::vector<Permutation>& predictions, const Config& cfg);

// One sampling round: estimate the eps-percentile, classify every sequence's
// current prefix, then either follow the lowest-index good sequence (its first
// estimated_rank alive jobs, each run for at most threshold_size units) or —
// when all sequences are bad — run every alive job up to the threshold.
// Returns false without running when the alive count is at or below the
// round-robin cutoff.
bool scheduler_round(SchedulerState& state);

// Completes all remaining jobs with round-robin and appends the final trace row.
void finish_round_robin(SchedulerState& state);

struct RunResult {
    ScheduleResult schedule;
    std::vector<RoundTrace> rounds;
    double rho = 0.0;
    bool forced_round_robin = false; // liveness guard tripped (round cap hit)
};

// Full pipeline: draw rho, round sizes for decisions, iterate sampling rounds
// to the cutoff, finish with round-robin. Completion times accrue true sizes.
RunResult schedule_with_predictions(const std::vector<double>& sizes,
                                    const std::vector<Permutation>& predictions,
                                    const Config& cfg);

// Run the prediction scheduler on a (1 - share) slice of the machine and plain
// round-robin on the remaining share; every job finishes at the earlier of its
// two completion times. Total is at most (2/share) * sjf_opt regardless of the
// predictions.
struct TimeShareResult {
    std::vector<double> completion;
    double total = 0.0;
    RunResult primary;
    ScheduleResult fallback;
};
TimeShareResult preferential_time_share(const std::vector<double>& sizes,
                                        const std::vector<Permutation>& predictions,
                                        const Config& cfg);

} // namespace portfolio::sched
