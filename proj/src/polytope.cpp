#include "rcbf/polytope.hpp"

#include <cmath>

#include "rcbf/errors.hpp"
#include "rcbf/solvers.hpp"

namespace rcbf {

PolytopeSpec PolytopeSpec::box(const Vector& lo, const Vector& hi) {
    PolytopeSpec s;
    s.kind = PolytopeKind::ConstantBox;
    s.input_dim = static_cast<int>(lo.size());
    s.lo = lo;
    s.hi = hi;
    return s;
}

PolytopeSpec PolytopeSpec::halfspaces(const Matrix& A, const Vector& b) {
    PolytopeSpec s;
    s.kind = PolytopeKind::ConstantHalfspaces;
    s.input_dim = static_cast<int>(A.cols());
    s.A = A;
    s.b = b;
    return s;
}

PolytopeSpec PolytopeSpec::state_dependent(int input_dim,
                                           std::function<Halfspaces(const Vector&)> builder) {
    PolytopeSpec s;
    s.kind = PolytopeKind::StateDependent;
    s.input_dim = input_dim;
    s.builder = std::move(builder);
    return s;
}

double chebyshev_radius(const Matrix& A, const Vector& b) {
    const int m = static_cast<int>(A.cols());
    const int q = static_cast<int>(A.rows());
    // max r  s.t.  A u + ||A_i|| r <= b  ==  min -r
    Matrix Ae(q, m + 1);
    Vector c = Vector::Zero(m + 1);
    c[m] = -1.0;
    for (int i = 0; i < q; ++i) {
        Ae.row(i).head(m) = A.row(i);
        Ae(i, m) = A.row(i).norm();
    }
    LpSolution sol = solve_lp_simplex({c, Ae, b});
    if (sol.status.state == SolveState::Unbounded)
        return std::numeric_limits<double>::infinity();
    if (sol.status.state != SolveState::Optimal) return -1.0;
    return sol.u[m];
}

Halfspaces instantiate(const PolytopeSpec& spec, const Vector& x) {
    Halfspaces hs;
    switch (spec.kind) {
        case PolytopeKind::ConstantBox: {
            const int m = spec.input_dim;
            hs.A = Matrix::Zero(2 * m, m);
            hs.b = Vector::Zero(2 * m);
            for (int j = 0; j < m; ++j) {
                hs.A(2 * j, j) = 1.0;
                hs.b[2 * j] = spec.hi[j];
                hs.A(2 * j + 1, j) = -1.0;
                hs.b[2 * j + 1] = -spec.lo[j];
            }
            break;
        }
        case PolytopeKind::ConstantHalfspaces:
            hs.A = spec.A;
            hs.b = spec.b;
            break;
        case PolytopeKind::StateDependent:
            hs = spec.builder(x);
            break;
    }
    if (chebyshev_radius(hs.A, hs.b) <= 1e-9) {
        throw DegeneratePolytope("input polytope has empty interior at queried state");
    }
    return hs;
}

bool contains(const Matrix& A, const Vector& b, const Vector& u, double tol) {
    return ((A * u - b).array() <= tol).all();
}

VertexSet enumerate_vertices(const Matrix& A, const Vector& b) {
    const int m = static_cast<int>(A.cols());
    VertexSet vs;
    vs.vertices = enumerate_polytope_vertices(A, b, vs.tolerance);
    // A bounded polytope supports every direction at a vertex; probe the
    // coordinate directions through the simplex to catch recession cones.
    for (int j = 0; j < m; ++j) {
        for (double s : {1.0, -1.0}) {
            Vector c = Vector::Zero(m);
            c[j] = s;
            LpSolution sol = solve_lp_simplex({c, A, b});
            if (sol.status.state == SolveState::Unbounded)
                throw UnboundedPolytope("polytope unbounded along a coordinate direction");
        }
    }
    return vs;
}

Vector unicycle_io_forward(const Vector& u_output, double theta, double b_offset) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Vector v(2);
    v << c * u_output[0] + s * u_output[1],
         (-s * u_output[0] + c * u_output[1]) / b_offset;
    return v;
}

Vector unicycle_io_inverse(const Vector& nu_omega, double theta, double b_offset) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Vector u(2);
    u << c * nu_omega[0] - b_offset * s * nu_omega[1],
         s * nu_omega[0] + b_offset * c * nu_omega[1];
    return u;
}

Halfspaces unicycle_input_halfspaces(double theta, double b_offset, double nu_max,
                                     double omega_max) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Halfspaces hs;
    hs.A = Matrix(4, 2);
    hs.A << c, s,
            -c, -s,
            -s / b_offset, c / b_offset,
            s / b_offset, -c / b_offset;
    hs.b = Vector(4);
    hs.b << nu_max, nu_max, omega_max, omega_max;
    return hs;
}

}  // namespace rcbf
