#include "rcbf/value_functions.hpp"

#include "rcbf/errors.hpp"

namespace rcbf {

ChannelTerms channel_terms_h(const ComposedBarrier& barrier, const AgentModel& model, int agent,
                             const Vector& xbar) {
    ChannelTerms ct;
    const Vector x_i = barrier.layout.block(xbar, agent);
    Vector gx = grad_h_state(barrier, xbar, agent);
    ct.lf = gx.dot(model.drift(x_i));
    if (model.io) {
        ct.lg = grad_h_position(barrier, xbar, agent).transpose();
        ct.input_set = unicycle_input_halfspaces(x_i[2], model.io->b_offset, model.io->nu_max,
                                                 model.io->omega_max);
    } else {
        ct.lg = gx.transpose() * model.actuation(x_i);
        ct.input_set = instantiate(model.input_set, x_i);
    }
    return ct;
}

ChannelTerms channel_terms_psi(const PsiCascade& cascade, int agent, const Vector& xbar) {
    const AgentModel& model = cascade.models()[static_cast<size_t>(agent)];
    ChannelTerms ct;
    LieTerms lt = cascade.lie_terms(xbar, agent);
    ct.lf = lt.lf;
    ct.lg = lt.lg;
    ct.input_set = instantiate(model.input_set, cascade.barrier().layout.block(xbar, agent));
    return ct;
}

Vector channel_to_physical(const AgentModel& model, const Vector& x_i, const Vector& u_filter) {
    if (!model.io) return u_filter;
    return unicycle_io_forward(u_filter, x_i[2], model.io->b_offset);
}

namespace {

LpSolution solve_channel_lp(const ChannelTerms& ct, Direction dir) {
    Vector c = ct.lg.transpose();
    if (dir == Direction::Max) c = -c;
    LpSolution sol = solve_lp({c, ct.input_set.A, ct.input_set.b});
    if (sol.status.state != SolveState::Optimal) {
        throw SimulationError("value-function LP failed (infeasible or unbounded polytope)");
    }
    return sol;
}

}  // namespace

double gamma_value(const ComposedBarrier& barrier, const AgentModel& model, int agent,
                   const Vector& xbar, Direction dir) {
    ChannelTerms ct = channel_terms_h(barrier, model, agent, xbar);
    LpSolution sol = solve_channel_lp(ct, dir);
    return dir == Direction::Min ? ct.lf + sol.value : ct.lf - sol.value;
}

double gamma_value_psi(const PsiCascade& cascade, int agent, const Vector& xbar, Direction dir) {
    ChannelTerms ct = channel_terms_psi(cascade, agent, xbar);
    LpSolution sol = solve_channel_lp(ct, dir);
    return dir == Direction::Min ? ct.lf + sol.value : ct.lf - sol.value;
}

Vector umin_point(const ComposedBarrier& barrier, const AgentModel& model, int agent,
                  const Vector& xbar) {
    ChannelTerms ct = channel_terms_h(barrier, model, agent, xbar);
    return solve_channel_lp(ct, Direction::Min).u;
}

Vector umin_point_psi(const PsiCascade& cascade, int agent, const Vector& xbar) {
    ChannelTerms ct = channel_terms_psi(cascade, agent, xbar);
    return solve_channel_lp(ct, Direction::Min).u;
}

}  // namespace rcbf
