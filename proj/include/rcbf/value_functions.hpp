#pragma once

#include "rcbf/barrier.hpp"
#include "rcbf/dynamics.hpp"
#include "rcbf/polytope.hpp"
#include "rcbf/solvers.hpp"

namespace rcbf {

enum class Direction { Min, Max };

// How the safety programs see one agent: Lie terms of the constraint level
// and the constraint polytope, in filter coordinates. IO-linearized agents
// expose the offset-point velocity instead of (nu, omega).
struct ChannelTerms {
    double lf = 0.0;
    RowVector lg;
    Halfspaces input_set;
};

ChannelTerms channel_terms_h(const ComposedBarrier& barrier, const AgentModel& model, int agent,
                             const Vector& xbar);

ChannelTerms channel_terms_psi(const PsiCascade& cascade, int agent, const Vector& xbar);

// Filter-coordinate input back to the physical actuator input.
Vector channel_to_physical(const AgentModel& model, const Vector& x_i, const Vector& u_filter);

// gamma^min / gamma^max: extremal contribution of one agent to hdot over
// its input polytope, by parametric LP.
double gamma_value(const ComposedBarrier& barrier, const AgentModel& model, int agent,
                   const Vector& xbar, Direction dir);

double gamma_value_psi(const PsiCascade& cascade, int agent, const Vector& xbar, Direction dir);

// arg-min of L_g h . u over the polytope (best-effort input, filter
// coordinates). Ties resolve to the lexicographically smallest vertex.
Vector umin_point(const ComposedBarrier& barrier, const AgentModel& model, int agent,
                  const Vector& xbar);

Vector umin_point_psi(const PsiCascade& cascade, int agent, const Vector& xbar);

}  // namespace rcbf
