#include "portfolio/loadbal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace portfolio::loadbal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRowSumTol = 1e-7;
constexpr double kMassTol = 1e-12;
// Multiplicative slack applied to every comparison against beta, so that a
// stream whose makespan equals beta exactly is kept rather than dropped.
constexpr double kBetaSlack = 1.0 + 1e-9;

void check_job_index(const Instance& inst, int job) {
    if (job < 0 || static_cast<std::size_t>(job) >= inst.jobs.size())
        throw std::invalid_argument("job index out of range");
}

// Throws unless `row` is a valid fraction vector for job j: correct length,
// no meaningful negative mass, total mass 1, support inside the neighborhood.
void check_row(const Instance& inst, int job, const std::vector<double>& row) {
    if (row.size() != static_cast<std::size_t>(inst.machines))
        throw std::invalid_argument("fraction row has wrong machine count");
    double sum = 0.0;
    for (int i = 0; i < inst.machines; ++i) {
        const double v = row[i];
        if (!(v > -kMassTol))
            throw std::invalid_argument("negative fraction in assignment row");
        if (v > kMassTol && size_on(inst, job, i) == kInf)
            throw std::invalid_argument("fraction assigned to a forbidden machine");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw std::invalid_argument("fractions of job " + std::to_string(job) +
                                    " sum to " + std::to_string(sum) + ", expected 1");
}

void accumulate_row(const Instance& inst, int job, const std::vector<double>& row,
                    std::vector<double>& loads) {
    for (int i = 0; i < inst.machines; ++i) {
        if (row[i] > 0.0)
            loads[i] += size_on(inst, job, i) * row[i];
    }
}

double max_load(const std::vector<double>& loads) {
    double mk = 0.0;
    for (double v : loads) mk = std::max(mk, v);
    return mk;
}

// Max-flow (Dinic) on double capacities; sizes here are tiny so the simple
// level-graph implementation is plenty.
class FlowNetwork {
public:
    explicit FlowNetwork(int nodes) : head_(nodes, -1) {}

    void add_edge(int from, int to, double cap) {
        edges_.push_back({to, head_[from], cap});
        head_[from] = static_cast<int>(edges_.size()) - 1;
        edges_.push_back({from, head_[to], 0.0});
        head_[to] = static_cast<int>(edges_.size()) - 1;
    }

    double max_flow(int s, int t, double eps) {
        double total = 0.0;
        while (bfs(s, t, eps)) {
            iter_ = head_;
            while (true) {
                const double pushed = dfs(s, t, kInf, eps);
                if (pushed <= eps) break;
                total += pushed;
            }
        }
        return total;
    }

private:
    struct Edge {
        int to;
        int next;
        double cap;
    };

    bool bfs(int s, int t, double eps) {
        level_.assign(head_.size(), -1);
        std::queue<int> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int e = head_[u]; e != -1; e = edges_[e].next) {
                if (edges_[e].cap > eps && level_[edges_[e].to] == -1) {
                    level_[edges_[e].to] = level_[u] + 1;
                    q.push(edges_[e].to);
                }
            }
        }
        return level_[t] != -1;
    }

    double dfs(int u, int t, double limit, double eps) {
        if (u == t) return limit;
        for (int& e = iter_[u]; e != -1; e = edges_[e].next) {
            Edge& ed = edges_[e];
            if (ed.cap > eps && level_[ed.to] == level_[u] + 1) {
                const double pushed = dfs(ed.to, t, std::min(limit, ed.cap), eps);
                if (pushed > eps) {
                    ed.cap -= pushed;
                    edges_[e ^ 1].cap += pushed;
                    return pushed;
                }
            }
        }
        return 0.0;
    }

    std::vector<Edge> edges_;
    std::vector<int> head_;
    std::vector<int> level_;
    std::vector<int> iter_;
};

// Can all jobs be fractionally placed with every machine load <= cap?
bool makespan_feasible(const Instance& inst, double cap, double total) {
    const int n = static_cast<int>(inst.jobs.size());
    const int m = inst.machines;
    const int source = 0;
    const int sink = n + m + 1;
    FlowNetwork net(n + m + 2);
    for (int j = 0; j < n; ++j) {
        net.add_edge(source, 1 + j, inst.jobs[j].p);
        for (int i : inst.jobs[j].nbhd)
            net.add_edge(1 + j, 1 + n + i, inst.jobs[j].p);
    }
    for (int i = 0; i < m; ++i)
        net.add_edge(1 + n + i, sink, cap);
    const double eps = std::max(total, 1.0) * 1e-13;
    const double flow = net.max_flow(source, sink, eps);
    return flow >= total - std::max(1e-9 * total, 1e-12);
}

} // namespace

bool is_restricted(const Instance& inst) {
    for (const Job& job : inst.jobs)
        if (!job.p_by_machine.empty()) return false;
    return true;
}

void validate(const Instance& inst) {
    if (inst.machines < 0) throw std::invalid_argument("negative machine count");
    for (std::size_t j = 0; j < inst.jobs.size(); ++j) {
        const Job& job = inst.jobs[j];
        if (job.nbhd.empty())
            throw std::invalid_argument("job " + std::to_string(j) + " has no admissible machine");
        for (int i : job.nbhd)
            if (i < 0 || i >= inst.machines)
                throw std::invalid_argument("job " + std::to_string(j) +
                                            " references machine out of range");
        if (job.p_by_machine.empty()) {
            if (!(job.p >= 0.0))
                throw std::invalid_argument("job sizes must be nonnegative");
        } else {
            if (job.p_by_machine.size() != static_cast<std::size_t>(inst.machines))
                throw std::invalid_argument("per-machine sizes must list every machine");
            for (int i : job.nbhd)
                if (!(job.p_by_machine[i] >= 0.0))
                    throw std::invalid_argument("job sizes must be nonnegative");
        }
    }
}

double size_on(const Instance& inst, int job, int machine) {
    check_job_index(inst, job);
    if (machine < 0 || machine >= inst.machines)
        throw std::invalid_argument("machine index out of range");
    const Job& jb = inst.jobs[job];
    const bool admissible = std::find(jb.nbhd.begin(), jb.nbhd.end(), machine) != jb.nbhd.end();
    if (!admissible) return kInf;
    return jb.p_by_machine.empty() ? jb.p : jb.p_by_machine[machine];
}

std::vector<double> proportional_row(const Instance& inst, int job, const WeightVector& w) {
    check_job_index(inst, job);
    if (w.size() != static_cast<std::size_t>(inst.machines))
        throw std::invalid_argument("weight vector has wrong machine count");
    for (double v : w)
        if (!(v > 0.0)) throw std::invalid_argument("weights must be strictly positive");
    const Job& jb = inst.jobs[job];
    double denom = 0.0;
    for (int i : jb.nbhd) denom += w[i];
    std::vector<double> row(inst.machines, 0.0);
    for (int i : jb.nbhd) row[i] = w[i] / denom;
    return row;
}

FractionalAssignment proportional_assignment(const Instance& inst, const WeightVector& w) {
    validate(inst);
    FractionalAssignment x;
    x.rows.reserve(inst.jobs.size());
    for (std::size_t j = 0; j < inst.jobs.size(); ++j)
        x.rows.push_back(proportional_row(inst, static_cast<int>(j), w));
    return x;
}

double fractional_makespan(const Instance& inst, const FractionalAssignment& x) {
    validate(inst);
    if (x.rows.size() != inst.jobs.size())
        throw std::invalid_argument("assignment has wrong job count");
    std::vector<double> loads(inst.machines, 0.0);
    for (std::size_t j = 0; j < x.rows.size(); ++j) {
        check_row(inst, static_cast<int>(j), x.rows[j]);
        accumulate_row(inst, static_cast<int>(j), x.rows[j], loads);
    }
    return max_load(loads);
}

double fractional_opt_makespan(const Instance& inst) {
    validate(inst);
    if (!is_restricted(inst))
        throw std::invalid_argument("flow oracle requires single-size (restricted) jobs");
    if (inst.jobs.empty() || inst.machines == 0) {
        if (!inst.jobs.empty()) throw std::invalid_argument("jobs but no machines");
        return 0.0;
    }
    double total = 0.0;
    double lo = 0.0;
    for (const Job& jb : inst.jobs) {
        total += jb.p;
        lo = std::max(lo, jb.p / static_cast<double>(jb.nbhd.size()));
    }
    if (total == 0.0) return 0.0;
    lo = std::max(lo, total / inst.machines);
    double hi = total;
    if (makespan_feasible(inst, lo, total)) return lo;
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (makespan_feasible(inst, mid, total))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

WeightFitResult fit_good_weights(const Instance& inst, double eps) {
    if (!(eps > 0.0) || eps >= 1.0)
        throw std::invalid_argument("eps must lie in (0,1)");
    validate(inst);
    WeightFitResult out;
    out.opt_makespan = fractional_opt_makespan(inst);
    out.weights.assign(inst.machines, 1.0);
    if (inst.jobs.empty() || out.opt_makespan == 0.0) {
        out.ratio = 1.0;
        out.certified = true;
        return out;
    }

    const int m = inst.machines;
    const std::size_t n = inst.jobs.size();
    const long long cap = static_cast<long long>(std::ceil(
        10.0 * m * std::ceil(1.0 / eps) *
        std::log(std::max(2.0, static_cast<double>(m) * static_cast<double>(n)))));
    const double gamma = 0.5 * eps;
    const double target = (1.0 + eps) * out.opt_makespan;

    WeightVector w(m, 1.0);
    WeightVector best_w = w;
    double best_mk = kInf;
    long long rounds = 0;
    std::vector<double> loads(m);
    while (rounds < cap) {
        ++rounds;
        std::fill(loads.begin(), loads.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            accumulate_row(inst, static_cast<int>(j), proportional_row(inst, static_cast<int>(j), w),
                           loads);
        const double mk = max_load(loads);
        if (mk < best_mk) {
            best_mk = mk;
            best_w = w;
        }
        if (best_mk <= target) break;
        // Shift weight away from overloaded machines, toward underloaded ones.
        double top = 0.0;
        for (int i = 0; i < m; ++i) {
            w[i] *= std::exp(gamma * (1.0 - loads[i] / out.opt_makespan));
            top = std::max(top, w[i]);
        }
        for (int i = 0; i < m; ++i) w[i] = std::max(w[i] / top, 1e-12);
    }
    out.weights = best_w;
    out.achieved_makespan = best_mk;
    out.ratio = best_mk / out.opt_makespan;
    out.certified = best_mk <= target;
    out.rounds_used = rounds;
    return out;
}

double weight_error(const WeightVector& a, const WeightVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("weight vectors differ in length");
    if (a.empty()) throw std::invalid_argument("empty weight vectors");
    double eta = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0.0) || !(b[i] > 0.0))
            throw std::invalid_argument("weights must be strictly positive");
        eta = std::max(eta, std::max(a[i] / b[i], b[i] / a[i]));
    }
    return eta;
}

double log_weight_distance(const WeightVector& a, const WeightVector& b) {
    return std::log(weight_error(a, b));
}

WeightVector snap_to_grid(const WeightVector& w, double eps, int machines) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (machines <= 0) throw std::invalid_argument("machine count must be positive");
    if (w.empty()) throw std::invalid_argument("empty weight vector");
    double mn = kInf;
    for (double v : w) {
        if (!(v > 0.0)) throw std::invalid_argument("weights must be strictly positive");
        mn = std::min(mn, v);
    }
    const double base = 1.0 + eps / machines;
    WeightVector out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double expo = std::round(std::log(w[i] / mn) / std::log(base));
        out[i] = std::pow(base, expo);
    }
    return out;
}

// ---- combiner --------------------------------------------------------------

CombinerState make_combiner(const Instance& inst, std::size_t streams, double beta) {
    validate(inst);
    if (streams == 0) throw std::invalid_argument("need at least one stream");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
    CombinerState st;
    st.beta = beta;
    st.active.assign(streams, 1);
    st.stream_load.assign(streams, std::vector<double>(inst.machines, 0.0));
    st.combined_load.assign(inst.machines, 0.0);
    st.contributions.assign(streams, std::vector<double>(inst.machines, 0.0));
    st.removed_at.assign(streams, -1);
    st.next_job = 0;
    return st;
}

CombineStep combine_step(const Instance& inst, CombinerState& state,
                         const std::vector<std::vector<double>>& stream_rows) {
    const int j = state.next_job;
    check_job_index(inst, j);
    if (stream_rows.size() != state.active.size())
        throw std::invalid_argument("one fraction row per stream is required");
    for (const auto& row : stream_rows) check_row(inst, j, row);

    CombineStep out;
    const std::size_t k = state.active.size();
    std::vector<std::size_t> eligible;
    bool any_active = false;
    for (std::size_t l = 0; l < k; ++l) {
        if (!state.active[l]) continue;
        any_active = true;
        bool ok = true;
        for (int i = 0; i < inst.machines && ok; ++i) {
            if (stream_rows[l][i] > kMassTol &&
                size_on(inst, j, i) * stream_rows[l][i] > state.beta * kBetaSlack)
                ok = false;
        }
        if (ok) eligible.push_back(l);
    }
    if (!any_active || eligible.empty()) {
        out.failed = true;
        return out;
    }

    const double alpha = 1.0 / static_cast<double>(eligible.size());
    out.emitted.assign(inst.machines, 0.0);
    for (std::size_t l : eligible)
        for (int i = 0; i < inst.machines; ++i)
            if (stream_rows[l][i] > 0.0) {
                out.emitted[i] += alpha * stream_rows[l][i];
                state.contributions[l][i] += alpha * size_on(inst, j, i) * stream_rows[l][i];
            }
    accumulate_row(inst, j, out.emitted, state.combined_load);
    for (std::size_t l = 0; l < k; ++l) {
        if (!state.active[l]) continue;
        accumulate_row(inst, j, stream_rows[l], state.stream_load[l]);
        if (max_load(state.stream_load[l]) > state.beta * kBetaSlack) {
            state.active[l] = 0;
            state.removed_at[l] = j;
        }
    }
    ++state.next_job;
    return out;
}

namespace {

std::vector<std::vector<double>> rows_for_job(const std::vector<FractionalAssignment>& streams,
                                              std::size_t j) {
    std::vector<std::vector<double>> rows;
    rows.reserve(streams.size());
    for (const FractionalAssignment& s : streams) rows.push_back(s.rows[j]);
    return rows;
}

void check_streams(const Instance& inst, const std::vector<FractionalAssignment>& streams) {
    if (streams.empty()) throw std::invalid_argument("need at least one stream");
    for (const FractionalAssignment& s : streams)
        if (s.rows.size() != inst.jobs.size())
            throw std::invalid_argument("stream has wrong job count");
}

} // namespace

CombineOutcome combine_run(const Instance& inst, const std::vector<FractionalAssignment>& streams,
                           double beta) {
    validate(inst);
    check_streams(inst, streams);
    CombineOutcome out;
    out.state = make_combiner(inst, streams.size(), beta);
    for (std::size_t j = 0; j < inst.jobs.size(); ++j) {
        CombineStep step = combine_step(inst, out.state, rows_for_job(streams, j));
        if (step.failed) {
            out.failed = true;
            out.fail_job = static_cast<int>(j);
            break;
        }
        out.assignment.rows.push_back(std::move(step.emitted));
    }
    out.combined_load = out.state.combined_load;
    out.makespan = max_load(out.combined_load);
    return out;
}

DoublingOutcome combine_with_doubling(const Instance& inst,
                                      const std::vector<FractionalAssignment>& streams) {
    validate(inst);
    check_streams(inst, streams);
    DoublingOutcome out;
    if (inst.jobs.empty()) {
        out.combined_load.assign(inst.machines, 0.0);
        return out;
    }
    for (std::size_t l = 0; l < streams.size(); ++l)
        check_row(inst, 0, streams[l].rows[0]);

    // First-job lower bound: prefer the largest single-machine piece that every
    // stream agrees to pay, fall back to the cheapest stream's largest piece.
    double beta0 = 0.0;
    for (int i = 0; i < inst.machines; ++i) {
        double shared = kInf;
        for (const FractionalAssignment& s : streams) {
            const double piece = s.rows[0][i] > 0.0 ? size_on(inst, 0, i) * s.rows[0][i] : 0.0;
            shared = std::min(shared, piece);
        }
        beta0 = std::max(beta0, shared);
    }
    if (beta0 <= 0.0) {
        double best = kInf;
        for (const FractionalAssignment& s : streams) {
            double peak = 0.0;
            for (int i = 0; i < inst.machines; ++i)
                if (s.rows[0][i] > 0.0)
                    peak = std::max(peak, size_on(inst, 0, i) * s.rows[0][i]);
            best = std::min(best, peak);
        }
        beta0 = best;
    }
    if (!(beta0 > 0.0)) beta0 = 1e-9;

    CombinerState state = make_combiner(inst, streams.size(), beta0);
    out.beta_initial = beta0;
    for (std::size_t j = 0; j < inst.jobs.size();) {
        CombineStep step = combine_step(inst, state, rows_for_job(streams, j));
        if (step.failed) {
            state.beta *= 2.0;
            ++out.doublings;
            std::fill(state.active.begin(), state.active.end(), 1);
            std::fill(state.removed_at.begin(), state.removed_at.end(), -1);
            if (out.doublings > 400)
                throw std::logic_error("combiner failed to stabilize");
            continue; // retry the same job with the doubled threshold
        }
        out.assignment.rows.push_back(std::move(step.emitted));
        ++j;
    }
    out.beta_final = state.beta;
    out.combined_load = state.combined_load;
    out.makespan = max_load(out.combined_load);
    return out;
}

} // namespace portfolio::loadbal
