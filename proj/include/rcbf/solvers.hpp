#pragma once

#include <vector>

#include "rcbf/linalg.hpp"

namespace rcbf {

enum class SolveState { Optimal, Infeasible, Unbounded, NumericalFailure };

struct SolveStatus {
    SolveState state = SolveState::NumericalFailure;
    int iterations = 0;
    double kkt_residual = 0.0;

    bool ok() const { return state == SolveState::Optimal; }
};

// min c^T u  s.t.  A u <= b
struct LpProblem {
    Vector c;
    Matrix A;
    Vector b;
};

struct LpSolution {
    Vector u;
    double value = 0.0;
    SolveStatus status;
};

// min ||u - target||^2  s.t.  A u <= b  (identity Hessian throughout)
struct QpProblem {
    Vector target;
    Matrix A;
    Vector b;
};

struct QpSolution {
    Vector u;
    Vector lambda;  // multipliers, one per row of A
    SolveStatus status;
};

// Two-phase simplex with Bland's rule, then (for dim <= 4) the returned
// point is snapped to the lexicographically smallest optimal vertex so that
// non-unique arg-mins are deterministic.
LpSolution solve_lp(const LpProblem& p);

// Pure simplex path, no vertex snapping. Exposed so tests can cross-check
// the two routes against each other.
LpSolution solve_lp_simplex(const LpProblem& p);

// Primal active-set projection of target onto {u : Au <= b}.
QpSolution solve_qp(const QpProblem& p);

// All vertices of {u : Au <= b} by enumerating row subsets (oracle-grade,
// dim <= 4). Deduplicated at inf-norm tolerance `tol`.
std::vector<Vector> enumerate_polytope_vertices(const Matrix& A, const Vector& b,
                                                double tol = 1e-8);

}  // namespace rcbf
