#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <vector>

#include "portfolio/parallel.hpp"

namespace portfolio::matching {

// Dual values are exact rationals so that feasibility checks, tie-breaks and
// the selection rule never depend on floating-point rounding.  Costs are
// integers, so duals stay on a fixed rational lattice throughout a solve.
using Rational = mpq_class;

// Square min-cost bipartite assignment instance with integer costs.
struct Instance {
    int n = 0;
    std::vector<std::vector<long long>> cost; // n rows (left side) x n columns (right side)
};

// One dual value per left vertex and per right vertex.
// Feasible iff left[i] + right[j] <= cost[i][j] for every edge.
struct DualVector {
    std::vector<Rational> left;
    std::vector<Rational> right;
};

struct PerfectMatching {
    std::vector<int> pairing;  // pairing[i] = column assigned to row i
    long long total_cost = 0;
};

struct SolveStats {
    long long iterations = 0;  // dual-update phases performed by the solver
    int chosen_index = -1;     // index of the selected prediction (-1 outside portfolio solves)
    long long repair_work = 0; // abstract unit count: edges scanned while repairing predictions
};

struct HungarianResult {
    PerfectMatching matching;
    DualVector duals;  // final duals; matched edges are tight (complementary slackness)
    SolveStats stats;
};

// Throws std::invalid_argument if the instance is not square/positive-size.
void validate(const Instance& inst);

DualVector zero_duals(int n);

// Exact feasibility check. Throws std::invalid_argument on dimension mismatch.
bool dual_feasible(const Instance& inst, const DualVector& y);

// Sum of all dual values (the dual LP objective).
Rational dual_objective(const DualVector& y);

// L1 distance between two dual vectors over all 2n coordinates.
Rational l1_error(const DualVector& a, const DualVector& b);

// Repairs a predicted dual vector: keeps the left duals untouched and resets
// every right dual to the largest feasible value, right[j] = min_i(cost[i][j] - left[i]).
// One linear pass over the edges; output is always feasible.
DualVector make_feasible(const Instance& inst, const DualVector& predicted);

// Index of the feasible dual vector with the highest dual objective
// (ties break to the lowest index). Throws std::invalid_argument if empty.
std::size_t select_best_dual(const std::vector<DualVector>& candidates);

// Primal-dual assignment solver warm-started from a feasible dual vector.
// Augments along tight edges for free; `iterations` counts only the dual-update
// phases needed when the tight subgraph has no augmenting path.  Starting from
// an optimal dual vector therefore costs zero iterations.
// Throws std::invalid_argument if `start` is infeasible or mis-sized.
HungarianResult hungarian_with_duals(const Instance& inst, const DualVector& start);

// Full prediction-portfolio pipeline: repair every predicted dual vector,
// select the one with the best dual objective, then solve warm-started from it.
// stats.chosen_index reports the selection; stats.repair_work = k * n^2.
// The repair step is data-parallel; both policies give identical results.
HungarianResult solve_with_portfolio(const Instance& inst,
                                     const std::vector<DualVector>& predictions,
                                     ExecPolicy policy = ExecPolicy::Parallel);

} // namespace portfolio::matching
