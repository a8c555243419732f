#include "rcbf/controllers.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

#include "rcbf/errors.hpp"

namespace rcbf {

namespace {

double clamp01(double s) { return std::min(1.0, std::max(0.0, s)); }

std::atomic<bool> warned_time_range{false};

// Forward-time Bezier parameter; the shipped timing law runs the published
// countdown s(t) = (tf - t)/(tf - t0), i.e. tau = 1 - s.
double bezier_tau(const BezierCurve& c, double t) {
    if (t < c.t0 - 1e-12 || t > c.tf + 1e-12) {
        if (!warned_time_range.exchange(true)) {
            std::cerr << "[rcbf] warning: nominal trajectory queried outside [t0, tf]; clamping\n";
        }
    }
    return clamp01((t - c.t0) / (c.tf - c.t0));
}

}  // namespace

Vector BezierCurve::position(double t) const {
    const double s = bezier_tau(*this, t);
    const double r = 1.0 - s;
    return r * r * r * points[0] + 3.0 * r * r * s * points[1] + 3.0 * r * s * s * points[2] +
           s * s * s * points[3];
}

Vector BezierCurve::velocity(double t) const {
    const double s = bezier_tau(*this, t);
    const double r = 1.0 - s;
    Vector d = 3.0 * r * r * (points[1] - points[0]) + 6.0 * r * s * (points[2] - points[1]) +
               3.0 * s * s * (points[3] - points[2]);
    return d / (tf - t0);
}

Vector BezierCurve::acceleration(double t) const {
    const double s = bezier_tau(*this, t);
    const double r = 1.0 - s;
    Vector d = 6.0 * r * (points[2] - 2.0 * points[1] + points[0]) +
               6.0 * s * (points[3] - 2.0 * points[2] + points[1]);
    return d / ((tf - t0) * (tf - t0));
}

BroadcastTable BroadcastTable::initialize(const std::vector<AgentModel>& models) {
    BroadcastTable t;
    t.slots.resize(models.size());
    for (size_t r = 0; r < models.size(); ++r) {
        t.slots[r].resize(models.size());
        for (size_t s = 0; s < models.size(); ++s) {
            int dim = models[s].io ? 2 : models[s].input_dim;
            t.slots[r][s].input = Vector::Zero(dim);
            t.slots[r][s].timestamp = 0.0;
        }
    }
    return t;
}

void BroadcastTable::store(int sender, const Vector& u_filter, double t,
                           const std::vector<AgentModel>& models) {
    if (models[static_cast<size_t>(sender)].role != AgentRole::Normal) return;
    for (size_t r = 0; r < slots.size(); ++r) {
        if (static_cast<int>(r) == sender) continue;
        slots[r][static_cast<size_t>(sender)] = {u_filter, t};
    }
}

Vector adversarial_input(const ComposedBarrier& barrier, const std::vector<AgentModel>& models,
                         int agent, const Vector& xbar_sampled) {
    ChannelTerms ct = channel_terms_h(barrier, models[static_cast<size_t>(agent)], agent,
                                      xbar_sampled);
    LpSolution sol = solve_lp({-ct.lg.transpose(), ct.input_set.A, ct.input_set.b});
    if (!sol.status.ok()) {
        throw SimulationError("adversarial_input: LP failed");
    }
    return sol.u;
}

namespace {

struct RowPieces {
    double constant = 0.0;  // everything except the deciding agents' inputs
    bool present = true;
};

// Shared assembly of the distributed/high-order constraint row so the two
// paths stay numerically identical for q = 1.
RowPieces assemble_row_constant(int agent, const std::vector<int>& team,
                                const std::vector<int>& opponents,
                                const std::vector<double>& lf,
                                const std::vector<RowVector>& lg,
                                const std::vector<double>& gamma_max,
                                const BroadcastTable& broadcast, double alpha_of_level,
                                double margin_term) {
    RowPieces rp;
    double c = lf[static_cast<size_t>(agent)];
    for (int l : team) {
        if (l == agent) continue;
        const auto& e = broadcast.get(agent, l);
        c += lf[static_cast<size_t>(l)] + lg[static_cast<size_t>(l)].dot(e.input);
    }
    for (int j : opponents) c += gamma_max[static_cast<size_t>(j)];
    c += alpha_of_level + margin_term;
    rp.constant = c;
    return rp;
}

FilterOutcome solve_agent_qp(const ChannelTerms& ct, const RowPieces& row, const Vector& u_nom,
                             bool has_row) {
    FilterOutcome out;
    const int m = static_cast<int>(u_nom.size());
    const int q = static_cast<int>(ct.input_set.A.rows());
    Matrix A(q + (has_row ? 1 : 0), m);
    Vector b(q + (has_row ? 1 : 0));
    A.topRows(q) = ct.input_set.A;
    b.head(q) = ct.input_set.b;
    if (has_row) {
        A.row(q) = ct.lg;
        b[q] = -row.constant;
    }
    QpSolution qp = solve_qp({u_nom, A, b});
    if (qp.status.state == SolveState::Optimal) {
        out.u_filter = qp.u;
        out.status = FilterStatus::Optimal;
    } else if (qp.status.state == SolveState::Infeasible) {
        // Best-effort input: strongest push against the row (Eq.-style
        // arg-min of the agent's contribution).
        LpSolution lp = solve_lp({ct.lg.transpose(), ct.input_set.A, ct.input_set.b});
        if (!lp.status.ok()) {
            out.status = FilterStatus::NumericalFailure;
            out.u_filter = Vector::Zero(m);
            return out;
        }
        out.u_filter = lp.u;
        out.status = FilterStatus::Fallback;
    } else {
        out.status = FilterStatus::NumericalFailure;
        out.u_filter = Vector::Zero(m);
        return out;
    }
    if (has_row) {
        out.row_present = true;
        out.row_value = row.constant + ct.lg.dot(out.u_filter);
    }
    return out;
}

std::vector<int> default_team(const std::vector<AgentModel>& models, AgentRole role) {
    std::vector<int> idx;
    for (size_t i = 0; i < models.size(); ++i) {
        if (models[i].role == role) idx.push_back(static_cast<int>(i));
    }
    return idx;
}

}  // namespace

CentralizedOutcome centralized_filter(const ComposedBarrier& barrier,
                                      const std::vector<AgentModel>& models,
                                      const AlphaFunction& alpha, const MarginConfig& margin,
                                      double interval, const Vector& xbar_sampled,
                                      const std::vector<Vector>& u_nom) {
    CentralizedOutcome out;
    out.u_filter.resize(models.size());

    std::vector<int> normals = default_team(models, AgentRole::Normal);
    std::vector<int> adversaries = default_team(models, AgentRole::Adversarial);

    const bool has_row = !barrier.atoms.empty();
    std::vector<ChannelTerms> terms(models.size());
    double row_const = 0.0;
    int total_dim = 0;
    for (int i : normals) {
        terms[static_cast<size_t>(i)] =
            channel_terms_h(barrier, models[static_cast<size_t>(i)], i, xbar_sampled);
        row_const += terms[static_cast<size_t>(i)].lf;
        total_dim += static_cast<int>(terms[static_cast<size_t>(i)].lg.size());
    }
    if (has_row) {
        for (int j : adversaries) {
            row_const += gamma_value(barrier, models[static_cast<size_t>(j)], j, xbar_sampled,
                                     Direction::Max);
        }
        row_const += alpha(eval_h(barrier, xbar_sampled)) + eta(margin, interval);
    }

    // Stack the per-agent polytopes block-diagonally plus one safety row.
    int rows = 0;
    for (int i : normals) rows += static_cast<int>(terms[static_cast<size_t>(i)].input_set.A.rows());
    Matrix A = Matrix::Zero(rows + (has_row ? 1 : 0), total_dim);
    Vector b(rows + (has_row ? 1 : 0));
    Vector target(total_dim);
    int r0 = 0, c0 = 0;
    for (int i : normals) {
        const auto& ct = terms[static_cast<size_t>(i)];
        const int qi = static_cast<int>(ct.input_set.A.rows());
        const int mi = static_cast<int>(ct.lg.size());
        A.block(r0, c0, qi, mi) = ct.input_set.A;
        b.segment(r0, qi) = ct.input_set.b;
        if (has_row) A.block(rows, c0, 1, mi) = ct.lg;
        target.segment(c0, mi) = u_nom[static_cast<size_t>(i)];
        r0 += qi;
        c0 += mi;
    }
    if (has_row) b[rows] = -row_const;

    QpSolution qp = solve_qp({target, A, b});
    if (qp.status.state == SolveState::Optimal) {
        out.status = FilterStatus::Optimal;
        c0 = 0;
        for (int i : normals) {
            const int mi = static_cast<int>(terms[static_cast<size_t>(i)].lg.size());
            out.u_filter[static_cast<size_t>(i)] = qp.u.segment(c0, mi);
            c0 += mi;
        }
    } else if (qp.status.state == SolveState::Infeasible) {
        out.status = FilterStatus::Fallback;
        for (int i : normals) {
            out.u_filter[static_cast<size_t>(i)] =
                umin_point(barrier, models[static_cast<size_t>(i)], i, xbar_sampled);
        }
    } else {
        out.status = FilterStatus::NumericalFailure;
        for (int i : normals) {
            out.u_filter[static_cast<size_t>(i)] =
                Vector::Zero(terms[static_cast<size_t>(i)].lg.size());
        }
        return out;
    }
    if (has_row) {
        out.row_present = true;
        out.row_value = row_const;
        for (int i : normals) {
            out.row_value += terms[static_cast<size_t>(i)].lg.dot(out.u_filter[static_cast<size_t>(i)]);
        }
    }
    return out;
}

FilterOutcome distributed_filter(const ComposedBarrier& barrier,
                                 const std::vector<AgentModel>& models, const AlphaFunction& alpha,
                                 const MarginConfig& margin, double interval, int agent,
                                 const Vector& xbar_sampled, const BroadcastTable& broadcast,
                                 const Vector& u_nom, const std::vector<int>* team) {
    std::vector<int> coop = team ? *team : default_team(models, AgentRole::Normal);
    std::vector<int> opponents;
    if (!team) opponents = default_team(models, AgentRole::Adversarial);

    const bool has_row = !barrier.atoms.empty();
    std::vector<double> lf(models.size(), 0.0);
    std::vector<RowVector> lg(models.size());
    std::vector<double> gmax(models.size(), 0.0);
    ChannelTerms self = channel_terms_h(barrier, models[static_cast<size_t>(agent)], agent,
                                        xbar_sampled);
    if (has_row) {
        for (int l : coop) {
            if (l == agent) {
                lf[static_cast<size_t>(l)] = self.lf;
                lg[static_cast<size_t>(l)] = self.lg;
                continue;
            }
            ChannelTerms ct = channel_terms_h(barrier, models[static_cast<size_t>(l)], l,
                                              xbar_sampled);
            lf[static_cast<size_t>(l)] = ct.lf;
            lg[static_cast<size_t>(l)] = ct.lg;
        }
        for (int j : opponents) {
            gmax[static_cast<size_t>(j)] =
                gamma_value(barrier, models[static_cast<size_t>(j)], j, xbar_sampled,
                            Direction::Max);
        }
    }

    // Row over u_i: lf_self + lg_self u_i + (neighbors) + (gamma) + alpha + eta <= 0.
    RowPieces row;
    if (has_row) {
        row = assemble_row_constant(agent, coop, opponents, lf, lg, gmax, broadcast,
                                    alpha(eval_h(barrier, xbar_sampled)), eta(margin, interval));
    }
    return solve_agent_qp(self, row, u_nom, has_row);
}

FilterOutcome high_order_filter(const PsiCascade& cascade, const MarginConfig& margin,
                                double interval, int agent, const Vector& xbar_sampled,
                                const BroadcastTable& broadcast, const Vector& u_nom,
                                const std::vector<int>* team) {
    const auto& models = cascade.models();
    std::vector<int> coop = team ? *team : default_team(models, AgentRole::Normal);
    std::vector<int> opponents;
    if (!team) opponents = default_team(models, AgentRole::Adversarial);

    const bool has_row = !cascade.barrier().atoms.empty();
    const int q = cascade.order();
    ChannelTerms self = channel_terms_psi(cascade, agent, xbar_sampled);

    RowPieces row;
    if (has_row) {
        std::vector<double> lf(models.size(), 0.0);
        std::vector<RowVector> lg(models.size());
        std::vector<double> gmax(models.size(), 0.0);
        auto terms = cascade.lie_terms_all(xbar_sampled);
        for (int l : coop) {
            lf[static_cast<size_t>(l)] = terms[static_cast<size_t>(l)].lf;
            lg[static_cast<size_t>(l)] = terms[static_cast<size_t>(l)].lg;
        }
        for (int j : opponents) {
            gmax[static_cast<size_t>(j)] =
                gamma_value_psi(cascade, j, xbar_sampled, Direction::Max);
        }
        const double level = cascade.psi(q - 1, xbar_sampled);
        double margin_term = eta_prime(margin, interval);
        if (q == 1) margin_term += cascade.xi();  // disturbance bound enters at level 1
        row = assemble_row_constant(agent, coop, opponents, lf, lg, gmax, broadcast,
                                    cascade.alpha(q)(level), margin_term);
    }
    return solve_agent_qp(self, row, u_nom, has_row);
}

Vector nominal_input(const NominalPolicy& policy, const std::vector<AgentModel>& models,
                     int agent, const Vector& xbar, double t) {
    AgentLayout layout = AgentLayout::from_models(models);
    const AgentModel& self = models[static_cast<size_t>(agent)];
    const Vector x_i = layout.block(xbar, agent);
    const bool velocity_channel = self.io || self.state_dim == self.input_dim;
    const int d = self.position_dim;

    switch (policy.kind) {
        case NominalPolicy::Kind::Zero:
            return Vector::Zero(velocity_channel ? d : self.input_dim);

        case NominalPolicy::Kind::FormationBezier: {
            Vector pd = policy.curve.position(t) + policy.offset;
            Vector vd = policy.curve.velocity(t);
            if (velocity_channel) {
                Vector p = self.position(x_i);
                return vd + policy.k1 * (pd - p);
            }
            Vector ad = policy.curve.acceleration(t);
            Vector e_pos = pd - x_i.head(d);
            Vector e_vel = vd - x_i.tail(d);
            if (policy.literal_paper_sign) {
                return (-policy.k1 * e_pos - policy.k2 * e_vel - ad).eval();
            }
            return (policy.k1 * e_pos + policy.k2 * e_vel + ad).eval();
        }

        case NominalPolicy::Kind::PursuitPD: {
            const int tgt = policy.target_id - 1;
            const AgentModel& other = models[static_cast<size_t>(tgt)];
            const Vector x_t = layout.block(xbar, tgt);
            if (velocity_channel) {
                Vector p = self.position(x_i);
                Vector pt = other.position(x_t);
                return policy.k1 * (pt - p);
            }
            Vector e_pos = other.position(x_t) - x_i.head(d);
            Vector e_vel = x_t.tail(d) - x_i.tail(d);
            return policy.k1 * e_pos + policy.k2 * e_vel;
        }
    }
    return Vector::Zero(self.input_dim);
}

}  // namespace rcbf
