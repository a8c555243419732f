#pragma once

#include <functional>
#include <vector>

#include "rcbf/linalg.hpp"

namespace rcbf {

struct Halfspaces {
    Matrix A;
    Vector b;
};

enum class PolytopeKind { ConstantBox, ConstantHalfspaces, StateDependent };

// Input-constraint set U(x) = {u : A(x) u <= b(x)}. Must be bounded with
// nonempty interior at every queried state (Chebyshev radius > 1e-9).
struct PolytopeSpec {
    PolytopeKind kind = PolytopeKind::ConstantBox;
    int input_dim = 0;
    Vector lo, hi;                                       // ConstantBox
    Matrix A;                                            // ConstantHalfspaces
    Vector b;
    std::function<Halfspaces(const Vector&)> builder;    // StateDependent

    static PolytopeSpec box(const Vector& lo, const Vector& hi);
    static PolytopeSpec halfspaces(const Matrix& A, const Vector& b);
    static PolytopeSpec state_dependent(int input_dim,
                                        std::function<Halfspaces(const Vector&)> builder);
};

struct VertexSet {
    std::vector<Vector> vertices;
    double tolerance = 1e-8;
};

// Halfspace data at state x. Boxes expand to rows (+e_j, -e_j) per
// coordinate. Throws DegeneratePolytope when the interior collapses.
Halfspaces instantiate(const PolytopeSpec& spec, const Vector& x);

bool contains(const Matrix& A, const Vector& b, const Vector& u, double tol);

// Brute-force vertex enumeration (dim <= 4). Throws UnboundedPolytope when
// some support direction is unbounded.
VertexSet enumerate_vertices(const Matrix& A, const Vector& b);

// Radius of the largest inscribed ball; +inf for unbounded sets that admit
// arbitrarily large balls.
double chebyshev_radius(const Matrix& A, const Vector& b);

// Velocity-space constraint rows for a unicycle driven through the offset
// point ahead of the axle: |nu| <= nu_max and |omega| <= omega_max mapped
// into bounds on the offset-point velocity u.
Halfspaces unicycle_input_halfspaces(double theta, double b_offset, double nu_max,
                                     double omega_max);

// Offset-point velocity u to (nu, omega) and back. u satisfies the rows
// above iff the mapped (nu, omega) respects its box bounds.
Vector unicycle_io_forward(const Vector& u_output, double theta, double b_offset);
Vector unicycle_io_inverse(const Vector& nu_omega, double theta, double b_offset);

}  // namespace rcbf
