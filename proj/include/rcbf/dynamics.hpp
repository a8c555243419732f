#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rcbf/linalg.hpp"
#include "rcbf/polytope.hpp"

namespace rcbf {

enum class AgentRole { Normal, Adversarial };

// Heterogeneous control-affine agent:  xdot = f(x) + g(x) u + phi(t).
struct AgentModel {
    int id = 0;  // 1..N
    int state_dim = 0;
    int input_dim = 0;
    AgentRole role = AgentRole::Normal;
    double disturbance_bound = 0.0;  // phi_max

    std::function<Vector(const Vector&)> drift;      // f(x)
    std::function<Matrix(const Vector&)> actuation;  // g(x), state_dim x input_dim
    PolytopeSpec input_set;                          // physical input constraints

    // Workspace position used by pairwise safe-set atoms.
    int position_dim = 0;
    bool linear_position = false;  // constant Jacobian
    std::function<Vector(const Vector&)> position;          // x -> p
    std::function<Matrix(const Vector&)> position_jacobian; // dp/dx

    // Drift is affine (f(x) = Fx + f0); enables analytic cascade derivatives.
    bool affine_drift = false;
    Matrix drift_matrix;

    // Unicycles are filtered through the velocity of the offset point; the
    // safety programs then see a single integrator with the state-dependent
    // constraint polytope instead of the (nu, omega) box.
    struct IoLinearization {
        double b_offset = 1.0;
        double nu_max = 0.0;
        double omega_max = 0.0;
    };
    std::optional<IoLinearization> io;
};

// Factories for the model families used in the simulations.
AgentModel make_single_integrator(int id, int dim, const PolytopeSpec& input_set,
                                  double phi_max, AgentRole role);
AgentModel make_double_integrator(int id, int dim, double beta, const PolytopeSpec& input_set,
                                  double phi_max, AgentRole role);
AgentModel make_unicycle(int id, double b_offset, double nu_max, double omega_max,
                         double phi_max, AgentRole role);

// Offsets of each agent's state block inside the stacked vector.
struct AgentLayout {
    std::vector<int> offset;
    std::vector<int> dim;
    int total = 0;

    static AgentLayout from_models(const std::vector<AgentModel>& models);
    Eigen::VectorBlock<const Vector> block(const Vector& xbar, int agent) const {
        return xbar.segment(offset[agent], dim[agent]);
    }
};

struct SystemState {
    double time = 0.0;
    Vector xbar;
    std::vector<Vector> held_inputs;  // physical inputs, one per agent
};

struct DisturbanceProcess {
    enum class Kind { None, PiecewiseConstantRandom, Sinusoidal };
    Kind kind = Kind::None;
    double resample_dt = 0.05;
    std::vector<double> frequencies = {0.5, 1.3};
    std::uint64_t rng_seed = 0;

    // phi_i(t); norm never exceeds phi_max. Pure in (agent_id, t) so query
    // order and thread count cannot change realizations.
    Vector sample(int agent_id, int dim, double phi_max, double t) const;
};

// Fixed-step RK4 over [state.time, t_end] with zero-order-hold inputs.
// Throws NonFiniteState on blow-up.
SystemState integrate_interval(const std::vector<AgentModel>& models, const AgentLayout& layout,
                               const SystemState& state, const DisturbanceProcess& disturbance,
                               double t_end, double dt_max);

// Same, but invokes `on_step(t, xbar)` after every internal RK4 step.
SystemState integrate_interval(const std::vector<AgentModel>& models, const AgentLayout& layout,
                               const SystemState& state, const DisturbanceProcess& disturbance,
                               double t_end, double dt_max,
                               const std::function<void(double, const Vector&)>& on_step);

struct StateBounds {
    Vector lo, hi;  // stacked
    bool empty() const { return lo.size() == 0; }
};

// Sampled bound on the stacked flow speed, inflated by a 1.1 safety factor.
// Inputs are drawn from polytope vertices and random interior points.
double max_flow_speed(const std::vector<AgentModel>& models, const StateBounds& bounds,
                      int sample_count, std::uint64_t rng_seed);
double max_flow_speed_serial(const std::vector<AgentModel>& models, const StateBounds& bounds,
                             int sample_count, std::uint64_t rng_seed);

}  // namespace rcbf
