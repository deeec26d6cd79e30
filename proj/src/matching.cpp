#include "portfolio/matching.hpp"

#include <stdexcept>
#include <utility>

namespace portfolio::matching {

namespace {

// Costs are stored as long long for serialization friendliness; gmpxx only
// overloads operators for built-in `long`, so route conversions through here.
inline Rational rat(long long v) { return Rational(static_cast<long>(v)); }

void check_dims(const Instance& inst, const DualVector& y, const char* what) {
    if (static_cast<int>(y.left.size()) != inst.n ||
        static_cast<int>(y.right.size()) != inst.n) {
        throw std::invalid_argument(std::string(what) + ": dual vector size does not match instance");
    }
}

} // namespace

void validate(const Instance& inst) {
    if (inst.n <= 0) throw std::invalid_argument("instance: n must be positive");
    if (static_cast<int>(inst.cost.size()) != inst.n)
        throw std::invalid_argument("instance: cost matrix must have n rows");
    for (const auto& row : inst.cost) {
        if (static_cast<int>(row.size()) != inst.n)
            throw std::invalid_argument("instance: cost matrix must be square");
    }
}

DualVector zero_duals(int n) {
    return DualVector{std::vector<Rational>(n, Rational(0)),
                      std::vector<Rational>(n, Rational(0))};
}

bool dual_feasible(const Instance& inst, const DualVector& y) {
    validate(inst);
    check_dims(inst, y, "dual_feasible");
    for (int i = 0; i < inst.n; ++i) {
        for (int j = 0; j < inst.n; ++j) {
            if (y.left[i] + y.right[j] > rat(inst.cost[i][j])) return false;
        }
    }
    return true;
}

Rational dual_objective(const DualVector& y) {
    Rational sum(0);
    for (const auto& v : y.left) sum += v;
    for (const auto& v : y.right) sum += v;
    return sum;
}

Rational l1_error(const DualVector& a, const DualVector& b) {
    if (a.left.size() != b.left.size() || a.right.size() != b.right.size())
        throw std::invalid_argument("l1_error: dual vectors differ in size");
    Rational sum(0);
    for (std::size_t i = 0; i < a.left.size(); ++i) sum += abs(a.left[i] - b.left[i]);
    for (std::size_t j = 0; j < a.right.size(); ++j) sum += abs(a.right[j] - b.right[j]);
    return sum;
}

DualVector make_feasible(const Instance& inst, const DualVector& predicted) {
    validate(inst);
    check_dims(inst, predicted, "make_feasible");
    DualVector out;
    out.left = predicted.left;
    out.right.resize(inst.n);
    for (int j = 0; j < inst.n; ++j) {
        Rational best = rat(inst.cost[0][j]) - out.left[0];
        for (int i = 1; i < inst.n; ++i) {
            Rational slack = rat(inst.cost[i][j]) - out.left[i];
            if (slack < best) best = slack;
        }
        out.right[j] = std::move(best);
    }
    return out;
}

std::size_t select_best_dual(const std::vector<DualVector>& candidates) {
    if (candidates.empty())
        throw std::invalid_argument("select_best_dual: empty candidate list");
    std::size_t best = 0;
    Rational best_obj = dual_objective(candidates[0]);
    for (std::size_t idx = 1; idx < candidates.size(); ++idx) {
        Rational obj = dual_objective(candidates[idx]);
        if (obj > best_obj) {  // strict: ties keep the lowest index
            best_obj = std::move(obj);
            best = idx;
        }
    }
    return best;
}

HungarianResult hungarian_with_duals(const Instance& inst, const DualVector& start) {
    validate(inst);
    check_dims(inst, start, "hungarian_with_duals");
    if (!dual_feasible(inst, start))
        throw std::invalid_argument("hungarian_with_duals: starting duals are infeasible");

    const int n = inst.n;
    DualVector y = start;
    std::vector<int> matchL(n, -1), matchR(n, -1);
    long long phases = 0;

    // Alternating-forest scratch space, rebuilt once per augmentation.
    std::vector<char> inL(n), inR(n);
    std::vector<int> way(n);          // way[j] = forest row whose tight edge reached column j
    std::vector<Rational> minSlack(n);
    std::vector<int> minSlackRow(n);  // -1 marks "no finite slack recorded yet"
    std::vector<int> queue;
    queue.reserve(n);

    auto augment = [&](int j) {
        while (j != -1) {
            const int i = way[j];
            const int next = matchL[i];
            matchL[i] = j;
            matchR[j] = i;
            j = next;
        }
    };

    for (int round = 0; round < n; ++round) {
        std::fill(inL.begin(), inL.end(), 0);
        std::fill(inR.begin(), inR.end(), 0);
        std::fill(way.begin(), way.end(), -1);
        std::fill(minSlackRow.begin(), minSlackRow.end(), -1);
        queue.clear();
        std::size_t head = 0;

        for (int i = 0; i < n; ++i) {
            if (matchL[i] == -1) {
                inL[i] = 1;
                queue.push_back(i);
            }
        }
        if (queue.empty()) break;  // matching already perfect

        bool augmented = false;
        // Attaches column j to the forest via row i; returns true on augmentation.
        auto attach = [&](int j, int i) {
            way[j] = i;
            inR[j] = 1;
            const int owner = matchR[j];
            if (owner == -1) {
                augment(j);
                return true;
            }
            inL[owner] = 1;
            queue.push_back(owner);
            return false;
        };

        while (!augmented) {
            while (head < queue.size() && !augmented) {
                const int i = queue[head++];
                for (int j = 0; j < n && !augmented; ++j) {
                    if (inR[j]) continue;
                    Rational slack = rat(inst.cost[i][j]) - y.left[i] - y.right[j];
                    if (slack == 0) {
                        augmented = attach(j, i);
                    } else if (minSlackRow[j] == -1 || slack < minSlack[j]) {
                        minSlack[j] = std::move(slack);
                        minSlackRow[j] = i;
                    }
                }
            }
            if (augmented) break;

            // Tight subgraph exhausted: one dual-update phase.
            bool found = false;
            Rational delta;
            for (int j = 0; j < n; ++j) {
                if (!inR[j] && minSlackRow[j] != -1 && (!found || minSlack[j] < delta)) {
                    delta = minSlack[j];
                    found = true;
                }
            }
            if (!found)
                throw std::logic_error("hungarian_with_duals: no admissible dual update");
            ++phases;
            for (int i = 0; i < n; ++i)
                if (inL[i]) y.left[i] += delta;
            for (int j = 0; j < n; ++j) {
                if (inR[j]) {
                    y.right[j] -= delta;
                } else if (minSlackRow[j] != -1) {
                    minSlack[j] -= delta;
                }
            }
            for (int j = 0; j < n && !augmented; ++j) {
                if (!inR[j] && minSlackRow[j] != -1 && minSlack[j] == 0)
                    augmented = attach(j, minSlackRow[j]);
            }
        }
    }

    HungarianResult res;
    res.matching.pairing = matchL;
    res.matching.total_cost = 0;
    for (int i = 0; i < n; ++i) res.matching.total_cost += inst.cost[i][matchL[i]];
    res.duals = std::move(y);
    res.stats.iterations = phases;
    return res;
}

HungarianResult solve_with_portfolio(const Instance& inst,
                                     const std::vector<DualVector>& predictions,
                                     ExecPolicy policy) {
    validate(inst);
    if (predictions.empty())
        throw std::invalid_argument("solve_with_portfolio: empty prediction portfolio");
    for (const auto& p : predictions) check_dims(inst, p, "solve_with_portfolio");

    const int k = static_cast<int>(predictions.size());
    std::vector<DualVector> repaired(k);
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::Parallel)
    for (int idx = 0; idx < k; ++idx) {
        repaired[idx] = make_feasible(inst, predictions[idx]);
    }

    const std::size_t chosen = select_best_dual(repaired);
    HungarianResult res = hungarian_with_duals(inst, repaired[chosen]);
    res.stats.chosen_index = static_cast<int>(chosen);
    res.stats.repair_work =
        static_cast<long long>(k) * static_cast<long long>(inst.n) * static_cast<long long>(inst.n);
    return res;
}

} // namespace portfolio::matching
