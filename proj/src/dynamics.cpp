#include "rcbf/dynamics.hpp"

#include <cmath>

#include "rcbf/errors.hpp"
#include "rcbf/rng.hpp"
#include "rcbf/solvers.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rcbf {

AgentModel make_single_integrator(int id, int dim, const PolytopeSpec& input_set,
                                  double phi_max, AgentRole role) {
    AgentModel m;
    m.id = id;
    m.state_dim = dim;
    m.input_dim = dim;
    m.role = role;
    m.disturbance_bound = phi_max;
    m.drift = [dim](const Vector&) { return Vector::Zero(dim).eval(); };
    m.actuation = [dim](const Vector&) { return Matrix::Identity(dim, dim).eval(); };
    m.input_set = input_set;
    m.position_dim = dim;
    m.linear_position = true;
    m.position = [](const Vector& x) { return x; };
    m.position_jacobian = [dim](const Vector&) { return Matrix::Identity(dim, dim).eval(); };
    m.affine_drift = true;
    m.drift_matrix = Matrix::Zero(dim, dim);
    return m;
}

AgentModel make_double_integrator(int id, int dim, double beta, const PolytopeSpec& input_set,
                                  double phi_max, AgentRole role) {
    AgentModel m;
    m.id = id;
    m.state_dim = 2 * dim;
    m.input_dim = dim;
    m.role = role;
    m.disturbance_bound = phi_max;
    Matrix F = Matrix::Zero(2 * dim, 2 * dim);
    F.topRightCorner(dim, dim) = Matrix::Identity(dim, dim);
    F.bottomRightCorner(dim, dim) = -beta * Matrix::Identity(dim, dim);
    m.drift = [F](const Vector& x) { return (F * x).eval(); };
    Matrix G = Matrix::Zero(2 * dim, dim);
    G.bottomRows(dim) = Matrix::Identity(dim, dim);
    m.actuation = [G](const Vector&) { return G; };
    m.input_set = input_set;
    m.position_dim = dim;
    m.linear_position = true;
    m.position = [dim](const Vector& x) { return x.head(dim).eval(); };
    Matrix J = Matrix::Zero(dim, 2 * dim);
    J.leftCols(dim) = Matrix::Identity(dim, dim);
    m.position_jacobian = [J](const Vector&) { return J; };
    m.affine_drift = true;
    m.drift_matrix = F;
    return m;
}

AgentModel make_unicycle(int id, double b_offset, double nu_max, double omega_max,
                         double phi_max, AgentRole role) {
    AgentModel m;
    m.id = id;
    m.state_dim = 3;
    m.input_dim = 2;
    m.role = role;
    m.disturbance_bound = phi_max;
    m.drift = [](const Vector&) { return Vector::Zero(3).eval(); };
    m.actuation = [](const Vector& x) {
        Matrix g(3, 2);
        g << std::cos(x[2]), 0.0,
             std::sin(x[2]), 0.0,
             0.0, 1.0;
        return g;
    };
    Vector lo(2), hi(2);
    lo << -nu_max, -omega_max;
    hi << nu_max, omega_max;
    m.input_set = PolytopeSpec::box(lo, hi);
    m.position_dim = 2;
    m.position = [b_offset](const Vector& x) {
        Vector p(2);
        p << x[0] + b_offset * std::cos(x[2]), x[1] + b_offset * std::sin(x[2]);
        return p;
    };
    m.position_jacobian = [b_offset](const Vector& x) {
        Matrix J(2, 3);
        J << 1.0, 0.0, -b_offset * std::sin(x[2]),
             0.0, 1.0, b_offset * std::cos(x[2]);
        return J;
    };
    m.affine_drift = true;  // drift is identically zero
    m.drift_matrix = Matrix::Zero(3, 3);
    m.io = AgentModel::IoLinearization{b_offset, nu_max, omega_max};
    return m;
}

AgentLayout AgentLayout::from_models(const std::vector<AgentModel>& models) {
    AgentLayout l;
    l.offset.reserve(models.size());
    l.dim.reserve(models.size());
    int off = 0;
    for (const auto& m : models) {
        l.offset.push_back(off);
        l.dim.push_back(m.state_dim);
        off += m.state_dim;
    }
    l.total = off;
    return l;
}

Vector DisturbanceProcess::sample(int agent_id, int dim, double phi_max, double t) const {
    if (kind == Kind::None || phi_max <= 0.0) return Vector::Zero(dim);
    if (kind == Kind::PiecewiseConstantRandom) {
        auto bucket = static_cast<std::uint64_t>(std::floor(t / resample_dt));
        SplitMix64 rng(mix_seed(rng_seed, static_cast<std::uint64_t>(agent_id) + 1, bucket));
        double norm = rng.uniform(0.0, phi_max);
        return norm * rng.unit_vector(dim);
    }
    // Sinusoidal: fixed direction per agent, averaged sinusoids keep the
    // norm within phi_max.
    SplitMix64 rng(mix_seed(rng_seed, static_cast<std::uint64_t>(agent_id) + 1, 0x5151));
    Vector dir = rng.unit_vector(dim);
    double s = 0.0;
    for (double f : frequencies) {
        double phase = rng.uniform(0.0, 6.283185307179586);
        s += std::sin(6.283185307179586 * f * t + phase);
    }
    s /= static_cast<double>(frequencies.size());
    return (phi_max * s) * dir;
}

namespace {

Vector stacked_rhs(const std::vector<AgentModel>& models, const AgentLayout& layout,
                   const Vector& xbar, const std::vector<Vector>& inputs,
                   const DisturbanceProcess& dist, double t) {
    Vector dx(layout.total);
    for (size_t i = 0; i < models.size(); ++i) {
        const Vector xi = layout.block(xbar, static_cast<int>(i));
        Vector di = models[i].drift(xi) + models[i].actuation(xi) * inputs[i];
        if (dist.kind != DisturbanceProcess::Kind::None && models[i].disturbance_bound > 0.0) {
            di += dist.sample(models[i].id, models[i].state_dim, models[i].disturbance_bound, t);
        }
        dx.segment(layout.offset[i], layout.dim[i]) = di;
    }
    return dx;
}

}  // namespace

SystemState integrate_interval(const std::vector<AgentModel>& models, const AgentLayout& layout,
                               const SystemState& state, const DisturbanceProcess& disturbance,
                               double t_end, double dt_max,
                               const std::function<void(double, const Vector&)>& on_step) {
    if (!(t_end > state.time)) {
        throw SimulationError("integrate_interval: t_end must exceed state.time");
    }
    for (size_t i = 0; i < models.size(); ++i) {
        Halfspaces hs = instantiate(models[i].input_set, layout.block(state.xbar, static_cast<int>(i)));
        if (!contains(hs.A, hs.b, state.held_inputs[i], 1e-9)) {
            throw SimulationError("integrate_interval: held input outside its polytope");
        }
    }

    const double span = t_end - state.time;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-12)));
    const double dt = span / steps;

    SystemState out = state;
    for (int k = 0; k < steps; ++k) {
        const double t = state.time + k * dt;
        const Vector& x = out.xbar;
        Vector k1 = stacked_rhs(models, layout, x, out.held_inputs, disturbance, t);
        Vector k2 = stacked_rhs(models, layout, x + 0.5 * dt * k1, out.held_inputs, disturbance, t + 0.5 * dt);
        Vector k3 = stacked_rhs(models, layout, x + 0.5 * dt * k2, out.held_inputs, disturbance, t + 0.5 * dt);
        Vector k4 = stacked_rhs(models, layout, x + dt * k3, out.held_inputs, disturbance, t + dt);
        out.xbar += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!out.xbar.allFinite()) {
            throw NonFiniteState("state became non-finite during integration");
        }
        out.time = (k + 1 == steps) ? t_end : state.time + (k + 1) * dt;
        if (on_step) on_step(out.time, out.xbar);
    }
    return out;
}

SystemState integrate_interval(const std::vector<AgentModel>& models, const AgentLayout& layout,
                               const SystemState& state, const DisturbanceProcess& disturbance,
                               double t_end, double dt_max) {
    return integrate_interval(models, layout, state, disturbance, t_end, dt_max, nullptr);
}

namespace {

// One deterministic flow-speed probe; pure in (seed, k).
double flow_speed_sample(const std::vector<AgentModel>& models, const AgentLayout& layout,
                         const StateBounds& bounds, std::uint64_t seed, int k) {
    SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(k) + 1));
    Vector xbar = rng.uniform_vector(bounds.lo, bounds.hi);
    double norm2 = 0.0;
    for (size_t i = 0; i < models.size(); ++i) {
        const Vector xi = layout.block(xbar, static_cast<int>(i));
        Halfspaces hs = instantiate(models[i].input_set, xi);
        auto verts = enumerate_polytope_vertices(hs.A, hs.b);
        Vector u;
        if (verts.empty()) {
            u = Vector::Zero(models[i].input_dim);
        } else if (k % 2 == 0) {
            u = verts[rng.next() % verts.size()];
        } else {
            // random convex combination of vertices (interior point)
            Vector w(static_cast<Eigen::Index>(verts.size()));
            for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = rng.uniform01();
            w /= w.sum();
            u = Vector::Zero(models[i].input_dim);
            for (size_t j = 0; j < verts.size(); ++j) u += w[static_cast<Eigen::Index>(j)] * verts[j];
        }
        Vector rate = models[i].drift(xi) + models[i].actuation(xi) * u;
        norm2 += rate.squaredNorm();
    }
    return std::sqrt(norm2);
}

}  // namespace

double max_flow_speed_serial(const std::vector<AgentModel>& models, const StateBounds& bounds,
                             int sample_count, std::uint64_t rng_seed) {
    if (bounds.empty()) throw EmptyBoundingBox("max_flow_speed: scenario has no state bounds");
    AgentLayout layout = AgentLayout::from_models(models);
    double best = 0.0;
    for (int k = 0; k < sample_count; ++k) {
        best = std::max(best, flow_speed_sample(models, layout, bounds, rng_seed, k));
    }
    double phi_sum = 0.0;
    for (const auto& m : models) phi_sum += m.disturbance_bound;
    return 1.1 * (best + phi_sum);
}

double max_flow_speed(const std::vector<AgentModel>& models, const StateBounds& bounds,
                      int sample_count, std::uint64_t rng_seed) {
    if (bounds.empty()) throw EmptyBoundingBox("max_flow_speed: scenario has no state bounds");
    AgentLayout layout = AgentLayout::from_models(models);
    double best = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(max : best) schedule(static)
#endif
    for (int k = 0; k < sample_count; ++k) {
        double v = flow_speed_sample(models, layout, bounds, rng_seed, k);
        if (v > best) best = v;
    }
    double phi_sum = 0.0;
    for (const auto& m : models) phi_sum += m.disturbance_bound;
    return 1.1 * (best + phi_sum);
}

}  // namespace rcbf
