#include "portfolio/sched.hpp"

#include "portfolio/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace portfolio::sched {

namespace {

void check_sizes(const std::vector<double>& sizes) {
    for (double p : sizes)
        if (!(p > 0.0)) throw std::invalid_argument("job sizes must be positive");
}

void check_permutation(std::size_t n, const Permutation& order) {
    if (order.size() != n) throw std::invalid_argument("permutation has wrong length");
    std::vector<char> seen(n, 0);
    for (int v : order) {
        if (v < 0 || static_cast<std::size_t>(v) >= n || seen[v])
            throw std::invalid_argument("order is not a permutation of the jobs");
        seen[v] = 1;
    }
}

double ln_at_least_2(std::size_t v) { return std::log(static_cast<double>(std::max<std::size_t>(v, 2))); }

// Fenwick tree over size ranks carrying both counts and size sums.
class RankTree {
public:
    explicit RankTree(int n) : cnt_(n + 1, 0), sum_(n + 1, 0.0) {}

    void add(int rank, double v) {
        for (int i = rank; i < static_cast<int>(cnt_.size()); i += i & -i) {
            cnt_[i] += 1;
            sum_[i] += v;
        }
    }

    // count and sum of inserted values with rank <= `rank`
    std::pair<long long, double> prefix(int rank) const {
        long long c = 0;
        double s = 0.0;
        for (int i = rank; i > 0; i -= i & -i) {
            c += cnt_[i];
            s += sum_[i];
        }
        return {c, s};
    }

private:
    std::vector<long long> cnt_;
    std::vector<double> sum_;
};

} // namespace

void validate_config(const Config& cfg) {
    if (!(cfg.eps > 0.0) || cfg.eps > 0.25)
        throw std::invalid_argument("eps must lie in (0, 1/4]");
    if (!(cfg.sample_constant > 0.0))
        throw std::invalid_argument("sample_constant must be positive");
    if (!(cfg.bad_multiplier > 0.0))
        throw std::invalid_argument("bad_multiplier must be positive");
    if (!(cfg.share > 0.0) || cfg.share >= 1.0)
        throw std::invalid_argument("share must lie in (0,1)");
}

namespace {

long long improved_size(const Config& cfg, std::size_t n, std::size_t k) {
    const double inside = static_cast<double>(std::max<std::size_t>(k, 1)) *
                          std::pow(cfg.eps, -3.0) * ln_at_least_2(n);
    const double s = (cfg.sample_constant / (cfg.eps * cfg.eps)) * std::log(std::max(inside, 2.0));
    return std::max<long long>(1, static_cast<long long>(std::ceil(s - 1e-9)));
}

} // namespace

long long percentile_sample_size(const Config& cfg, std::size_t n, std::size_t k) {
    validate_config(cfg);
    if (cfg.mode == Mode::Improved) return improved_size(cfg, n, k);
    const double s = ln_at_least_2(n) / (cfg.eps * cfg.eps);
    return std::max<long long>(1, static_cast<long long>(std::ceil(s - 1e-9)));
}

long long classify_sample_size(const Config& cfg, std::size_t n, std::size_t k) {
    validate_config(cfg);
    if (cfg.mode == Mode::Improved) return improved_size(cfg, n, k);
    const double s =
        (ln_at_least_2(n) + std::log(static_cast<double>(std::max<std::size_t>(k, 1)))) /
        (cfg.eps * cfg.eps);
    return std::max<long long>(1, static_cast<long long>(std::ceil(s - 1e-9)));
}

double terminal_cutoff(const Config& cfg, std::size_t n, std::size_t k) {
    validate_config(cfg);
    if (cfg.mode == Mode::Improved)
        return 8.0 * static_cast<double>(improved_size(cfg, n, k)) / (cfg.eps * cfg.eps);
    return (ln_at_least_2(n) + std::log(static_cast<double>(std::max<std::size_t>(k, 1)))) /
           std::pow(cfg.eps, 4.0);
}

double sequence_cost(const std::vector<double>& sizes, const Permutation& order) {
    check_sizes(sizes);
    check_permutation(sizes.size(), order);
    double clock = 0.0, total = 0.0;
    for (int id : order) {
        clock += sizes[id];
        total += clock;
    }
    return total;
}

Permutation sjf_order(const std::vector<double>& sizes) {
    check_sizes(sizes);
    Permutation order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return sizes[a] != sizes[b] ? sizes[a] < sizes[b] : a < b;
    });
    return order;
}

double sjf_opt(const std::vector<double>& sizes) {
    return sizes.empty() ? 0.0 : sequence_cost(sizes, sjf_order(sizes));
}

double inversion_error(const std::vector<double>& sizes, const Permutation& order) {
    check_sizes(sizes);
    check_permutation(sizes.size(), order);
    std::vector<double> sorted = sizes;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    // The tree is indexed by descending-size rank so that "earlier jobs with a
    // strictly larger size" is a plain prefix query. An empty prefix then sums
    // to exactly zero: a sorted order reports error 0.0, never a rounding
    // residue.
    const int ranks = static_cast<int>(sorted.size());
    RankTree tree(ranks);
    double err = 0.0;
    for (int id : order) {
        const double v = sizes[id];
        const int asc = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), v) -
                                         sorted.begin()) +
                        1;
        const int desc = ranks - asc + 1;
        const auto [cnt_gt, sum_gt] = tree.prefix(desc - 1);
        // Every earlier job with a strictly larger size forms an inversion.
        err += sum_gt - static_cast<double>(cnt_gt) * v;
        tree.add(desc, v);
    }
    return err;
}

ScheduleResult round_robin(const std::vector<double>& sizes, double speed) {
    if (!(speed > 0.0)) throw std::invalid_argument("speed must be positive");
    check_sizes(sizes);
    ScheduleResult out;
    out.completion.assign(sizes.size(), 0.0);
    const Permutation order = sizes.empty() ? Permutation{} : sjf_order(sizes);
    double clock = 0.0, prev = 0.0;
    std::size_t remaining = sizes.size();
    for (int id : order) {
        clock += (sizes[id] - prev) * static_cast<double>(remaining) / speed;
        out.completion[id] = clock;
        prev = sizes[id];
        --remaining;
        out.total += clock;
    }
    return out;
}

std::vector<double> round_sizes(const std::vector<double>& sizes, double eps, double rho) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(rho >= 0.0) || rho >= 1.0) throw std::invalid_argument("rho must lie in [0,1)");
    check_sizes(sizes);
    const double base = 1.0 + eps;
    std::vector<double> out(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        const double p = sizes[j];
        double t = std::ceil(std::log(p) / std::log(base) - rho - 1e-9);
        while (std::pow(base, t + rho) < p * (1.0 - 1e-12)) t += 1.0;
        while (std::pow(base, t - 1.0 + rho) >= p) t -= 1.0;
        out[j] = std::pow(base, t);
    }
    return out;
}

PercentileEstimate estimate_percentile(const std::vector<double>& decision,
                                       const std::vector<double>& truth, long long samples,
                                       double eps, std::mt19937_64& rng) {
    if (decision.empty() || decision.size() != truth.size())
        throw std::invalid_argument("decision/truth views must be equal-sized and nonempty");
    if (samples < 1) throw std::invalid_argument("need at least one sample");
    if (!(eps > 0.0) || eps >= 1.0) throw std::invalid_argument("eps must lie in (0,1)");

    const int n = static_cast<int>(decision.size());
    PercentileEstimate out;
    out.sample.resize(samples);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (long long c = 0; c < samples; ++c) out.sample[c] = pick(rng);

    std::vector<long long> by_size(samples);
    std::iota(by_size.begin(), by_size.end(), 0);
    std::sort(by_size.begin(), by_size.end(), [&](long long a, long long b) {
        const double da = decision[out.sample[a]], db = decision[out.sample[b]];
        if (da != db) return da < db;
        if (out.sample[a] != out.sample[b]) return out.sample[a] < out.sample[b];
        return a < b;
    });
    long long rank = static_cast<long long>(std::ceil(eps * static_cast<double>(samples) - 1e-9));
    rank = std::clamp<long long>(rank, 1, samples);
    out.threshold_size = decision[out.sample[by_size[rank - 1]]];

    // Shared processing stops the instant the rank-th copy finishes; at that
    // moment the whole tie class has completed and every survivor has received
    // exactly threshold_size units.
    for (long long c = 0; c < samples; ++c) {
        if (decision[out.sample[c]] <= out.threshold_size) {
            ++out.completed_copies;
            out.time_spent += truth[out.sample[c]];
        } else {
            out.time_spent += out.threshold_size;
        }
    }
    const double scaled = (static_cast<double>(out.completed_copies) /
                           static_cast<double>(samples)) *
                          static_cast<double>(n);
    out.estimated_rank = std::clamp(scaled, 1.0, static_cast<double>(n));
    return out;
}

ClassifyResult classify_sequences(const std::vector<std::vector<int>>& prefixes,
                                  const std::vector<double>& decision,
                                  const std::vector<double>& truth, double threshold_size,
                                  long long samples, double bad_fraction, std::mt19937_64& rng) {
    if (samples < 1) throw std::invalid_argument("need at least one sample");
    if (decision.size() != truth.size())
        throw std::invalid_argument("decision/truth views must be equal-sized");
    ClassifyResult out;
    for (const auto& prefix : prefixes) {
        if (prefix.empty()) throw std::invalid_argument("empty sequence prefix");
        for (int id : prefix)
            if (id < 0 || static_cast<std::size_t>(id) >= decision.size())
                throw std::invalid_argument("prefix references an unknown job");
        std::uniform_int_distribution<int> pick(0, static_cast<int>(prefix.size()) - 1);
        long long big = 0;
        for (long long c = 0; c < samples; ++c) {
            const int id = prefix[pick(rng)];
            if (decision[id] > threshold_size) {
                ++big;
                out.time_spent += threshold_size;
            } else {
                out.time_spent += truth[id];
            }
        }
        const double frac = static_cast<double>(big) / static_cast<double>(samples);
        out.big_fraction.push_back(frac);
        out.bad.push_back(frac >= bad_fraction - 1e-12 ? 1 : 0);
    }
    return out;
}

SchedulerState make_scheduler(const std::vector<double>& sizes,
                              const std::vector<Permutation>& predictions, const Config& cfg) {
    validate_config(cfg);
    check_sizes(sizes);
    if (predictions.empty()) throw std::invalid_argument("need at least one prediction");
    for (const Permutation& p : predictions) check_permutation(sizes.size(), p);

    SchedulerState st;
    st.cfg = cfg;
    st.truth = sizes;
    st.predictions = predictions;
    st.rng = make_rng(cfg.seed, 0x5ced, 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    st.rho = unif(st.rng);
    st.decision.resize(sizes.size());
    if (!sizes.empty()) {
        const std::vector<double> down = round_sizes(sizes, cfg.eps, st.rho);
        const double scale = std::pow(1.0 + cfg.eps, st.rho);
        for (std::size_t j = 0; j < sizes.size(); ++j) st.decision[j] = down[j] * scale;
    }
    st.alive.assign(sizes.size(), 1);
    st.alive_count = static_cast<long long>(sizes.size());
    st.completion.assign(sizes.size(), 0.0);
    st.percentile_samples = percentile_sample_size(cfg, sizes.size(), predictions.size());
    st.classify_samples = classify_sample_size(cfg, sizes.size(), predictions.size());
    st.cutoff = terminal_cutoff(cfg, sizes.size(), predictions.size());
    return st;
}

bool scheduler_round(SchedulerState& st) {
    const long long n_r = st.alive_count;
    if (n_r == 0 || static_cast<double>(n_r) <= st.cutoff) return false;
    const double eps = st.cfg.eps;

    RoundTrace tr;
    tr.round = st.round++;
    tr.alive_count = n_r;
    tr.clock_start = st.clock;

    std::vector<int> ids;
    ids.reserve(n_r);
    for (std::size_t j = 0; j < st.alive.size(); ++j)
        if (st.alive[j]) ids.push_back(static_cast<int>(j));
    std::vector<double> dec(n_r), tru(n_r);
    for (long long i = 0; i < n_r; ++i) {
        dec[i] = st.decision[ids[i]];
        tru[i] = st.truth[ids[i]];
    }

    const PercentileEstimate est =
        estimate_percentile(dec, tru, st.percentile_samples, eps, st.rng);
    st.clock += est.time_spent;
    tr.threshold_size = est.threshold_size;
    tr.estimated_rank = est.estimated_rank;

    long long below = 0;
    for (double v : dec)
        if (v <= est.threshold_size) ++below;
    const double nr = static_cast<double>(n_r);
    tr.rank_failure = below < eps * (1.0 - eps) * nr - 1e-9 || below > eps * (1.0 + eps) * nr + 1e-9;
    tr.count_failure = std::abs(est.estimated_rank - static_cast<double>(below)) > eps * eps * nr + 1e-9;

    const long long prefix_len =
        std::clamp<long long>(std::llround(est.estimated_rank), 1, n_r);
    std::vector<std::vector<int>> prefixes(st.predictions.size());
    for (std::size_t l = 0; l < st.predictions.size(); ++l) {
        prefixes[l].reserve(prefix_len);
        for (int id : st.predictions[l]) {
            if (!st.alive[id]) continue;
            prefixes[l].push_back(id);
            if (static_cast<long long>(prefixes[l].size()) == prefix_len) break;
        }
    }
    const ClassifyResult cls =
        classify_sequences(prefixes, st.decision, st.truth, est.threshold_size,
                           st.classify_samples, st.cfg.bad_multiplier * eps * eps, st.rng);
    st.clock += cls.time_spent;
    tr.estimation_time = est.time_spent + cls.time_spent;
    tr.bad = cls.bad;

    int chosen = -1;
    for (std::size_t l = 0; l < cls.bad.size(); ++l)
        if (!cls.bad[l]) {
            chosen = static_cast<int>(l);
            break;
        }
    const std::vector<int>& todo = chosen >= 0 ? prefixes[chosen] : ids;
    tr.action = chosen >= 0 ? RoundAction::FollowSequence : RoundAction::ProcessAll;
    tr.chosen_sequence = chosen;
    for (int id : todo) {
        if (st.decision[id] <= est.threshold_size) {
            st.clock += st.truth[id];
            st.completion[id] = st.clock;
            st.alive[id] = 0;
            --st.alive_count;
            tr.completed.push_back(id);
        } else {
            st.clock += est.threshold_size; // run to the cap, then discard
        }
    }
    tr.duration = st.clock - tr.clock_start;
    st.rounds.push_back(std::move(tr));
    return true;
}

void finish_round_robin(SchedulerState& st) {
    if (st.alive_count == 0) return;
    RoundTrace tr;
    tr.round = st.round++;
    tr.alive_count = st.alive_count;
    tr.clock_start = st.clock;
    tr.action = RoundAction::FinalRoundRobin;

    std::vector<int> ids;
    std::vector<double> rest;
    for (std::size_t j = 0; j < st.alive.size(); ++j)
        if (st.alive[j]) {
            ids.push_back(static_cast<int>(j));
            rest.push_back(st.truth[j]);
        }
    const ScheduleResult rr = round_robin(rest, 1.0);
    double last = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        st.completion[ids[i]] = st.clock + rr.completion[i];
        st.alive[ids[i]] = 0;
        last = std::max(last, rr.completion[i]);
    }
    st.alive_count = 0;
    tr.completed = ids;
    std::sort(tr.completed.begin(), tr.completed.end(), [&](int a, int b) {
        return st.completion[a] != st.completion[b] ? st.completion[a] < st.completion[b] : a < b;
    });
    tr.duration = last;
    st.clock += last;
    st.rounds.push_back(std::move(tr));
}

RunResult schedule_with_predictions(const std::vector<double>& sizes,
                                    const std::vector<Permutation>& predictions,
                                    const Config& cfg) {
    SchedulerState st = make_scheduler(sizes, predictions, cfg);
    const long long round_cap = 4 * static_cast<long long>(sizes.size()) + 100;
    RunResult out;
    while (st.round < round_cap && scheduler_round(st)) {
    }
    if (st.round >= round_cap && st.alive_count > 0 &&
        static_cast<double>(st.alive_count) > st.cutoff)
        out.forced_round_robin = true;
    finish_round_robin(st);
    out.schedule.completion = st.completion;
    for (double c : out.schedule.completion) out.schedule.total += c;
    out.rounds = std::move(st.rounds);
    out.rho = st.rho;
    return out;
}

TimeShareResult preferential_time_share(const std::vector<double>& sizes,
                                        const std::vector<Permutation>& predictions,
                                        const Config& cfg) {
    validate_config(cfg);
    TimeShareResult out;
    out.primary = schedule_with_predictions(sizes, predictions, cfg);
    out.fallback = round_robin(sizes, cfg.share);
    out.completion.resize(sizes.size());
    const double slowdown = 1.0 / (1.0 - cfg.share);
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        out.completion[j] =
            std::min(out.primary.schedule.completion[j] * slowdown, out.fallback.completion[j]);
        out.total += out.completion[j];
    }
    return out;
}

} // namespace portfolio::sched
