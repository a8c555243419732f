#pragma once

#include <vector>

#include "rcbf/dynamics.hpp"
#include "rcbf/linalg.hpp"

namespace rcbf {

// One pairwise safe-set term, h_k <= 0 iff separation >= radius.
// PairCollision:  h = R^2 - ||p_i - p_j||^2
// AgentObstacle:  h = R^2 - ||p_i - c||^2
struct BarrierAtom {
    enum class Kind { PairCollision, AgentObstacle };
    Kind kind = Kind::PairCollision;
    int agent_i = -1;  // 0-based model index
    int agent_j = -1;
    Vector center;
    double radius = 0.0;

    static BarrierAtom pair(int i, int j, double radius);
    static BarrierAtom obstacle(int i, const Vector& center, double radius);
};

// Boolean-AND composition of atoms through the log-sum-exp smooth max.
struct ComposedBarrier {
    std::vector<BarrierAtom> atoms;
    double rho = 5.0;

    AgentLayout layout;
    std::vector<int> position_dim;
    std::vector<int> position_offset;  // blocks in stacked position space
    int position_total = 0;
    std::vector<std::function<Vector(const Vector&)>> position;
    std::vector<std::function<Matrix(const Vector&)>> position_jacobian;

    static ComposedBarrier compose(const std::vector<AgentModel>& models,
                                   std::vector<BarrierAtom> atoms, double rho);

    // Same maps/layout, different atom list (per-sample neighbor filtering).
    ComposedBarrier with_atoms(std::vector<BarrierAtom> atoms) const;

    Vector agent_position(const Vector& xbar, int agent) const {
        return position[agent](layout.block(xbar, agent));
    }
};

// sigma + (1/rho) ln sum exp(rho (h_k - sigma)), sigma = max_k h_k per call.
double eval_h(const ComposedBarrier& b, const Vector& xbar);

Vector atom_values(const ComposedBarrier& b, const Vector& xbar);

// LSE softmax weights of the atoms at xbar.
Vector lse_weights(const ComposedBarrier& b, const Vector& xbar);

// dh/dp_i in workspace coordinates. Throws GradientSingularity when two
// positions in an atom coincide within 1e-9.
Vector grad_h_position(const ComposedBarrier& b, const Vector& xbar, int agent);

// dh/dx_i = dh/dp_i * dp_i/dx_i.
Vector grad_h_state(const ComposedBarrier& b, const Vector& xbar, int agent);

// All agent blocks stacked; zero blocks for agents in no atom.
Vector grad_h(const ComposedBarrier& b, const Vector& xbar);

// Workspace-coordinate Hessian of the composed h (stacked position blocks).
Matrix hess_h_position(const ComposedBarrier& b, const Vector& xbar);

struct AlphaFunction {
    enum class Kind { Linear, Cubic };
    Kind kind = Kind::Linear;
    double gain = 1.0;

    double operator()(double s) const {
        return kind == Kind::Linear ? gain * s : gain * s * s * s;
    }
    double derivative(double s) const {
        return kind == Kind::Linear ? gain : 3.0 * gain * s * s;
    }

    static AlphaFunction linear(double gain) { return {Kind::Linear, gain}; }
    static AlphaFunction cubic(double gain) { return {Kind::Cubic, gain}; }
};

struct LieTerms {
    double lf = 0.0;
    RowVector lg;
};

// Per-agent pieces of hdot under the physical dynamics:
// lf + lg_u sums to hdot at zero disturbance; lphi_bound majorizes the
// disturbance contribution.
struct HdotTerm {
    double lf = 0.0;
    double lg_u = 0.0;
    double lphi_bound = 0.0;
};
std::vector<HdotTerm> decompose_hdot(const ComposedBarrier& b,
                                     const std::vector<AgentModel>& models, const Vector& xbar,
                                     const std::vector<Vector>& inputs);

// Chain psi_0 = h, psi_1 = sum_i L_f h + xi + alpha_1(h),
// psi_j = psi_{j-1}-dot + alpha_j(psi_{j-1}). Inputs first appear at level
// `order`; the level order-1 gradient feeds the safety programs.
class PsiCascade {
  public:
    PsiCascade(ComposedBarrier barrier, std::vector<AlphaFunction> alphas, double xi,
               std::vector<AgentModel> models);

    int order() const { return static_cast<int>(alphas_.size()); }
    double xi() const { return xi_; }
    const ComposedBarrier& barrier() const { return barrier_; }
    const std::vector<AgentModel>& models() const { return models_; }
    const AlphaFunction& alpha(int level) const { return alphas_.at(level - 1); }

    // psi_j as a state function, j in [0, order-1].
    double psi(int j, const Vector& xbar) const;

    // Top level, affine in the inputs.
    double psi_top(const Vector& xbar, const std::vector<Vector>& inputs) const;

    // d(psi_j)/dx, all agent blocks. Analytic for j=1 when every model has
    // affine drift and a linear position map; central differences (step
    // 1e-6) otherwise.
    Vector grad_psi_stacked(int j, const Vector& xbar) const;
    Vector grad_psi_state(int j, const Vector& xbar, int agent) const;

    // L_f psi_{q-1} and L_g psi_{q-1} per agent (physical channel).
    std::vector<LieTerms> lie_terms_all(const Vector& xbar) const;
    LieTerms lie_terms(const Vector& xbar, int agent) const;

    // Replace the barrier atom list, keeping alphas/xi/models.
    PsiCascade with_atoms(std::vector<BarrierAtom> atoms) const;

  private:
    ComposedBarrier barrier_;
    std::vector<AlphaFunction> alphas_;
    double xi_ = 0.0;
    std::vector<AgentModel> models_;
    bool analytic_level1_ = false;
};

// Validates Assumption-style relative degree at the probe states: inputs
// must be absent from every psi_j, j < order. Throws RelativeDegreeMismatch.
PsiCascade build_cascade(const ComposedBarrier& barrier, std::vector<AlphaFunction> alphas,
                         double xi, const std::vector<AgentModel>& models,
                         const std::vector<Vector>& probe_states = {});

}  // namespace rcbf
