#include "rcbf/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rcbf {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;
constexpr int kMaxSimplexIters = 10000;
constexpr int kMaxQpIters = 500;

bool lex_less(const Vector& a, const Vector& b, double tol = 1e-12) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - tol) return true;
        if (a[i] > b[i] + tol) return false;
    }
    return false;
}

// Dense tableau simplex on  min cost^T y  s.t.  M y = rhs, y >= 0.
// Bland's rule on both the entering and leaving variable.
struct Tableau {
    Matrix M;
    Vector rhs;
    Vector cost;
    std::vector<int> basis;

    // returns: 0 optimal, 1 unbounded, 2 iteration limit
    int run(int& iters) {
        const int rows = static_cast<int>(M.rows());
        const int cols = static_cast<int>(M.cols());
        for (; iters < kMaxSimplexIters; ++iters) {
            int enter = -1;
            for (int j = 0; j < cols; ++j) {
                if (cost[j] < -kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return 0;
            int leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < rows; ++i) {
                if (M(i, enter) > kPivotTol) {
                    double ratio = rhs[i] / M(i, enter);
                    if (ratio < best_ratio - kPivotTol) {
                        best_ratio = ratio;
                        leave = i;
                    } else if (ratio < best_ratio + kPivotTol && leave >= 0 &&
                               basis[i] < basis[leave]) {
                        leave = i;
                    }
                }
            }
            if (leave < 0) return 1;
            pivot(leave, enter);
        }
        return 2;
    }

    void pivot(int row, int col) {
        const int rows = static_cast<int>(M.rows());
        double piv = M(row, col);
        M.row(row) /= piv;
        rhs[row] /= piv;
        for (int i = 0; i < rows; ++i) {
            if (i == row) continue;
            double f = M(i, col);
            if (f != 0.0) {
                M.row(i) -= f * M.row(row);
                rhs[i] -= f * rhs[row];
            }
        }
        double cf = cost[col];
        if (cf != 0.0) {
            cost -= cf * M.row(row).transpose();
        }
        basis[row] = col;
    }
};

}  // namespace

LpSolution solve_lp_simplex(const LpProblem& p) {
    const int m = static_cast<int>(p.c.size());
    const int q = static_cast<int>(p.A.rows());
    LpSolution sol;
    sol.u = Vector::Zero(m);

    // Columns: u+ (m), u- (m), slack (q), artificial (q).
    const int n_struct = 2 * m + q;
    Matrix M = Matrix::Zero(q, n_struct + q);
    Vector rhs(q);
    for (int i = 0; i < q; ++i) {
        double s = (p.b[i] < 0.0) ? -1.0 : 1.0;
        for (int j = 0; j < m; ++j) {
            M(i, j) = s * p.A(i, j);
            M(i, m + j) = -s * p.A(i, j);
        }
        M(i, 2 * m + i) = s;  // slack
        M(i, n_struct + i) = 1.0;
        rhs[i] = s * p.b[i];
    }

    Tableau t;
    t.M = M;
    t.rhs = rhs;
    t.basis.resize(q);
    for (int i = 0; i < q; ++i) t.basis[i] = n_struct + i;

    // Phase 1: minimize the artificials, priced against the initial basis.
    t.cost = Vector::Zero(n_struct + q);
    for (int i = 0; i < q; ++i) t.cost[n_struct + i] = 1.0;
    for (int i = 0; i < q; ++i) t.cost -= t.M.row(i).transpose();

    int iters = 0;
    int rc = t.run(iters);
    sol.status.iterations = iters;
    if (rc == 2) {
        sol.status.state = SolveState::NumericalFailure;
        return sol;
    }
    double phase1_obj = 0.0;
    for (int i = 0; i < q; ++i) {
        if (t.basis[i] >= n_struct) phase1_obj += t.rhs[i];
    }
    if (phase1_obj > kFeasTol) {
        sol.status.state = SolveState::Infeasible;
        return sol;
    }

    // Pivot leftover artificial basics onto structural columns where possible;
    // rows that cannot host a pivot are redundant (all-zero structural part).
    for (int i = 0; i < q; ++i) {
        if (t.basis[i] >= n_struct) {
            for (int j = 0; j < n_struct; ++j) {
                if (std::abs(t.M(i, j)) > kPivotTol) {
                    t.pivot(i, j);
                    break;
                }
            }
        }
    }

    // Phase 2.
    Vector c2 = Vector::Zero(n_struct + q);
    for (int j = 0; j < m; ++j) {
        c2[j] = p.c[j];
        c2[m + j] = -p.c[j];
    }
    t.cost = c2;
    for (int i = 0; i < q; ++i) {
        double cb = c2[t.basis[i]];
        if (cb != 0.0) t.cost -= cb * t.M.row(i).transpose();
    }
    // Keep artificials out; their columns are only basic on redundant rows.
    for (int j = n_struct; j < n_struct + q; ++j) t.cost[j] = 1.0;

    rc = t.run(iters);
    sol.status.iterations = iters;
    if (rc == 1) {
        sol.status.state = SolveState::Unbounded;
        return sol;
    }
    if (rc == 2) {
        sol.status.state = SolveState::NumericalFailure;
        return sol;
    }

    Vector y = Vector::Zero(n_struct + q);
    for (int i = 0; i < q; ++i) y[t.basis[i]] = t.rhs[i];
    for (int j = 0; j < m; ++j) sol.u[j] = y[j] - y[m + j];
    sol.value = p.c.dot(sol.u);
    double viol = 0.0;
    if (q > 0) viol = (p.A * sol.u - p.b).maxCoeff();
    sol.status.kkt_residual = std::max(0.0, viol);
    sol.status.state = SolveState::Optimal;
    return sol;
}

std::vector<Vector> enumerate_polytope_vertices(const Matrix& A, const Vector& b,
                                                double tol) {
    const int m = static_cast<int>(A.cols());
    const int q = static_cast<int>(A.rows());
    std::vector<Vector> verts;
    if (q < m) return verts;

    std::vector<int> comb(m);
    for (int i = 0; i < m; ++i) comb[i] = i;
    auto advance = [&]() -> bool {
        int i = m - 1;
        while (i >= 0 && comb[i] == q - m + i) --i;
        if (i < 0) return false;
        ++comb[i];
        for (int j = i + 1; j < m; ++j) comb[j] = comb[j - 1] + 1;
        return true;
    };

    do {
        Matrix As(m, m);
        Vector bs(m);
        for (int i = 0; i < m; ++i) {
            As.row(i) = A.row(comb[i]);
            bs[i] = b[comb[i]];
        }
        Eigen::FullPivLU<Matrix> lu(As);
        if (!lu.isInvertible()) continue;
        Vector v = lu.solve(bs);
        if (!v.allFinite()) continue;
        if (((A * v - b).array() <= tol).all()) {
            bool dup = false;
            for (const auto& w : verts) {
                if ((w - v).lpNorm<Eigen::Infinity>() <= tol) {
                    dup = true;
                    break;
                }
            }
            if (!dup) verts.push_back(v);
        }
    } while (advance());

    std::sort(verts.begin(), verts.end(),
              [](const Vector& a, const Vector& b) { return lex_less(a, b); });
    return verts;
}

LpSolution solve_lp(const LpProblem& p) {
    LpSolution sol = solve_lp_simplex(p);
    if (sol.status.state != SolveState::Optimal) return sol;
    const int m = static_cast<int>(p.c.size());
    if (m <= 4) {
        // Deterministic arg-min: lexicographically smallest optimal vertex.
        auto verts = enumerate_polytope_vertices(p.A, p.b);
        for (const auto& v : verts) {
            double val = p.c.dot(v);
            if (val <= sol.value + 1e-8) {
                sol.u = v;
                sol.value = std::min(sol.value, val);
                break;  // verts are lex-sorted
            }
        }
    }
    return sol;
}

QpSolution solve_qp(const QpProblem& p) {
    const int m = static_cast<int>(p.target.size());
    const int q = static_cast<int>(p.A.rows());
    QpSolution sol;
    sol.lambda = Vector::Zero(q);

    if (q == 0) {
        sol.u = p.target;
        sol.status.state = SolveState::Optimal;
        return sol;
    }

    LpProblem feas{Vector::Zero(m), p.A, p.b};
    LpSolution start = solve_lp_simplex(feas);
    if (start.status.state == SolveState::Infeasible) {
        sol.status.state = SolveState::Infeasible;
        return sol;
    }
    if (start.status.state != SolveState::Optimal) {
        sol.status = start.status;
        return sol;
    }

    Vector x = start.u;
    std::vector<int> W;  // working set; stays linearly independent
    W.reserve(static_cast<size_t>(std::min(q, m)));

    auto solve_step = [&](Vector& pdir, Vector& lam) {
        Vector d = p.target - x;
        const int k = static_cast<int>(W.size());
        if (k == 0) {
            pdir = d;
            lam.resize(0);
            return;
        }
        Matrix Aw(k, m);
        for (int i = 0; i < k; ++i) Aw.row(i) = p.A.row(W[i]);
        Matrix G = Aw * Aw.transpose();
        Eigen::LDLT<Matrix> ldlt(G);
        if (ldlt.info() == Eigen::Success) {
            lam = ldlt.solve(Aw * d);
        } else {
            lam = G.completeOrthogonalDecomposition().solve(Aw * d);
        }
        pdir = d - Aw.transpose() * lam;
    };

    int iters = 0;
    for (; iters < kMaxQpIters; ++iters) {
        Vector pdir, lam;
        solve_step(pdir, lam);
        double scale = std::max(1.0, p.target.lpNorm<Eigen::Infinity>());
        if (pdir.lpNorm<Eigen::Infinity>() <= 1e-11 * scale) {
            int drop = -1;
            double most_neg = -1e-9;
            for (int i = 0; i < static_cast<int>(W.size()); ++i) {
                if (lam[i] < most_neg) {
                    most_neg = lam[i];
                    drop = i;
                }
            }
            if (drop < 0) {
                sol.u = x;
                sol.lambda.setZero();
                for (int i = 0; i < static_cast<int>(W.size()); ++i)
                    sol.lambda[W[i]] = std::max(0.0, lam[i]);
                Vector grad = x - p.target + p.A.transpose() * sol.lambda;
                double stat = grad.lpNorm<Eigen::Infinity>();
                double feas_viol = std::max(0.0, (p.A * x - p.b).maxCoeff());
                double comp = 0.0;
                for (int i = 0; i < q; ++i)
                    comp = std::max(comp, std::abs(sol.lambda[i] * (p.A.row(i).dot(x) - p.b[i])));
                sol.status.state = SolveState::Optimal;
                sol.status.iterations = iters;
                sol.status.kkt_residual = std::max({stat, feas_viol, comp});
                return sol;
            }
            W.erase(W.begin() + drop);
            continue;
        }

        // Longest feasible step; ties keep the smallest row index.
        double alpha = 1.0;
        int blocker = -1;
        for (int i = 0; i < q; ++i) {
            if (std::find(W.begin(), W.end(), i) != W.end()) continue;
            double adir = p.A.row(i).dot(pdir);
            if (adir > kPivotTol) {
                double a = (p.b[i] - p.A.row(i).dot(x)) / adir;
                if (a < alpha - 1e-14) {
                    alpha = std::max(0.0, a);
                    blocker = i;
                }
            }
        }
        x += alpha * pdir;
        if (blocker >= 0) {
            W.push_back(blocker);
            // Land exactly on the blocking hyperplane to stop drift.
            double viol = p.A.row(blocker).dot(x) - p.b[blocker];
            double nrm2 = p.A.row(blocker).squaredNorm();
            if (std::abs(viol) > 0 && nrm2 > 0)
                x -= (viol / nrm2) * p.A.row(blocker).transpose();
        }
    }

    sol.status.state = SolveState::NumericalFailure;
    sol.status.iterations = iters;
    return sol;
}

}  // namespace rcbf
