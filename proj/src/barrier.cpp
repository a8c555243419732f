#include "rcbf/barrier.hpp"

#include <cmath>

#include "rcbf/errors.hpp"

namespace rcbf {

BarrierAtom BarrierAtom::pair(int i, int j, double radius) {
    BarrierAtom a;
    a.kind = Kind::PairCollision;
    a.agent_i = i;
    a.agent_j = j;
    a.radius = radius;
    return a;
}

BarrierAtom BarrierAtom::obstacle(int i, const Vector& center, double radius) {
    BarrierAtom a;
    a.kind = Kind::AgentObstacle;
    a.agent_i = i;
    a.center = center;
    a.radius = radius;
    return a;
}

ComposedBarrier ComposedBarrier::compose(const std::vector<AgentModel>& models,
                                         std::vector<BarrierAtom> atoms, double rho) {
    ComposedBarrier b;
    b.atoms = std::move(atoms);
    b.rho = rho;
    b.layout = AgentLayout::from_models(models);
    int off = 0;
    for (const auto& m : models) {
        b.position_dim.push_back(m.position_dim);
        b.position_offset.push_back(off);
        off += m.position_dim;
        b.position.push_back(m.position);
        b.position_jacobian.push_back(m.position_jacobian);
    }
    b.position_total = off;
    return b;
}

ComposedBarrier ComposedBarrier::with_atoms(std::vector<BarrierAtom> atoms) const {
    ComposedBarrier b = *this;
    b.atoms = std::move(atoms);
    return b;
}

namespace {

Vector atom_separation(const ComposedBarrier& b, const BarrierAtom& a, const Vector& xbar) {
    Vector pi = b.agent_position(xbar, a.agent_i);
    if (a.kind == BarrierAtom::Kind::PairCollision) {
        return pi - b.agent_position(xbar, a.agent_j);
    }
    return pi - a.center;
}

}  // namespace

Vector atom_values(const ComposedBarrier& b, const Vector& xbar) {
    Vector h(static_cast<Eigen::Index>(b.atoms.size()));
    for (size_t k = 0; k < b.atoms.size(); ++k) {
        const auto& a = b.atoms[k];
        Vector d = atom_separation(b, a, xbar);
        h[static_cast<Eigen::Index>(k)] = a.radius * a.radius - d.squaredNorm();
    }
    return h;
}

double eval_h(const ComposedBarrier& b, const Vector& xbar) {
    Vector h = atom_values(b, xbar);
    if (h.size() == 0) return -std::numeric_limits<double>::infinity();
    double sigma = h.maxCoeff();
    double s = 0.0;
    for (Eigen::Index k = 0; k < h.size(); ++k) s += std::exp(b.rho * (h[k] - sigma));
    return sigma + std::log(s) / b.rho;
}

Vector lse_weights(const ComposedBarrier& b, const Vector& xbar) {
    Vector h = atom_values(b, xbar);
    double sigma = h.size() ? h.maxCoeff() : 0.0;
    Vector w(h.size());
    double s = 0.0;
    for (Eigen::Index k = 0; k < h.size(); ++k) {
        w[k] = std::exp(b.rho * (h[k] - sigma));
        s += w[k];
    }
    if (s > 0.0) w /= s;
    return w;
}

namespace {

void check_separation(const Vector& d) {
    if (d.norm() <= 1e-9) {
        throw GradientSingularity("barrier gradient undefined: coincident positions");
    }
}

// dh/dp over the stacked position space (softmax-weighted atom gradients).
Vector grad_h_position_stacked(const ComposedBarrier& b, const Vector& xbar) {
    Vector g = Vector::Zero(b.position_total);
    Vector w = lse_weights(b, xbar);
    for (size_t k = 0; k < b.atoms.size(); ++k) {
        const auto& a = b.atoms[k];
        Vector d = atom_separation(b, a, xbar);
        check_separation(d);
        Vector gi = -2.0 * d;  // datom/dp_i
        g.segment(b.position_offset[a.agent_i], b.position_dim[a.agent_i]) +=
            w[static_cast<Eigen::Index>(k)] * gi;
        if (a.kind == BarrierAtom::Kind::PairCollision) {
            g.segment(b.position_offset[a.agent_j], b.position_dim[a.agent_j]) -=
                w[static_cast<Eigen::Index>(k)] * gi;
        }
    }
    return g;
}

}  // namespace

Vector grad_h_position(const ComposedBarrier& b, const Vector& xbar, int agent) {
    Vector g = grad_h_position_stacked(b, xbar);
    return g.segment(b.position_offset[agent], b.position_dim[agent]);
}

Vector grad_h_state(const ComposedBarrier& b, const Vector& xbar, int agent) {
    Vector gp = grad_h_position(b, xbar, agent);
    Matrix J = b.position_jacobian[agent](b.layout.block(xbar, agent));
    return J.transpose() * gp;
}

Vector grad_h(const ComposedBarrier& b, const Vector& xbar) {
    Vector gp = grad_h_position_stacked(b, xbar);
    Vector g = Vector::Zero(b.layout.total);
    for (size_t i = 0; i < b.position_dim.size(); ++i) {
        Matrix J = b.position_jacobian[i](b.layout.block(xbar, static_cast<int>(i)));
        g.segment(b.layout.offset[i], b.layout.dim[i]) =
            J.transpose() * gp.segment(b.position_offset[i], b.position_dim[i]);
    }
    return g;
}

Matrix hess_h_position(const ComposedBarrier& b, const Vector& xbar) {
    const int n = b.position_total;
    Matrix H = Matrix::Zero(n, n);
    Vector w = lse_weights(b, xbar);
    Vector gbar = Vector::Zero(n);

    for (size_t k = 0; k < b.atoms.size(); ++k) {
        const auto& a = b.atoms[k];
        const double wk = w[static_cast<Eigen::Index>(k)];
        Vector d = atom_separation(b, a, xbar);
        check_separation(d);
        const int oi = b.position_offset[a.agent_i];
        const int di = b.position_dim[a.agent_i];

        Vector gk = Vector::Zero(n);  // datom/dp stacked
        gk.segment(oi, di) = -2.0 * d;

        // datom Hessian: -2I on (i,i); pair atoms add the cross blocks.
        H.block(oi, oi, di, di) -= wk * 2.0 * Matrix::Identity(di, di);
        if (a.kind == BarrierAtom::Kind::PairCollision) {
            const int oj = b.position_offset[a.agent_j];
            const int dj = b.position_dim[a.agent_j];
            gk.segment(oj, dj) = 2.0 * d;
            H.block(oj, oj, dj, dj) -= wk * 2.0 * Matrix::Identity(dj, dj);
            H.block(oi, oj, di, dj) += wk * 2.0 * Matrix::Identity(di, dj);
            H.block(oj, oi, dj, di) += wk * 2.0 * Matrix::Identity(dj, di);
        }

        H += (b.rho * wk) * (gk * gk.transpose());
        gbar += wk * gk;
    }
    H -= b.rho * (gbar * gbar.transpose());
    return H;
}

std::vector<HdotTerm> decompose_hdot(const ComposedBarrier& b,
                                     const std::vector<AgentModel>& models, const Vector& xbar,
                                     const std::vector<Vector>& inputs) {
    std::vector<HdotTerm> terms(models.size());
    for (size_t i = 0; i < models.size(); ++i) {
        Vector gx = grad_h_state(b, xbar, static_cast<int>(i));
        const Vector xi = b.layout.block(xbar, static_cast<int>(i));
        terms[i].lf = gx.dot(models[i].drift(xi));
        terms[i].lg_u = gx.dot(models[i].actuation(xi) * inputs[i]);
        terms[i].lphi_bound = gx.norm() * models[i].disturbance_bound;
    }
    return terms;
}

PsiCascade::PsiCascade(ComposedBarrier barrier, std::vector<AlphaFunction> alphas, double xi,
                       std::vector<AgentModel> models)
    : barrier_(std::move(barrier)),
      alphas_(std::move(alphas)),
      xi_(xi),
      models_(std::move(models)) {
    analytic_level1_ = true;
    for (const auto& m : models_) {
        if (!m.affine_drift || !m.linear_position) analytic_level1_ = false;
    }
}

double PsiCascade::psi(int j, const Vector& xbar) const {
    if (j == 0) return eval_h(barrier_, xbar);
    double prev = psi(j - 1, xbar);
    Vector g = grad_psi_stacked(j - 1, xbar);
    double drift_sum = 0.0;
    for (size_t i = 0; i < models_.size(); ++i) {
        const auto& lay = barrier_.layout;
        drift_sum += g.segment(lay.offset[i], lay.dim[i])
                         .dot(models_[i].drift(lay.block(xbar, static_cast<int>(i))));
    }
    if (j == 1) return drift_sum + xi_ + alphas_[0](prev);
    return drift_sum + alphas_[static_cast<size_t>(j - 1)](prev);
}

double PsiCascade::psi_top(const Vector& xbar, const std::vector<Vector>& inputs) const {
    const int q = order();
    double prev = psi(q - 1, xbar);
    double sum = (q == 1) ? xi_ : 0.0;
    auto terms = lie_terms_all(xbar);
    for (size_t i = 0; i < models_.size(); ++i) {
        sum += terms[i].lf + terms[i].lg.dot(inputs[i]);
    }
    return sum + alphas_[static_cast<size_t>(q - 1)](prev);
}

Vector PsiCascade::grad_psi_stacked(int j, const Vector& xbar) const {
    if (j == 0) return grad_h(barrier_, xbar);

    if (j == 1 && analytic_level1_) {
        // psi_1 = sum_l gp_l . (J_l f_l) + xi + alpha_1(h) in workspace
        // coordinates; all maps are linear so the chain rule closes on the
        // workspace Hessian of h.
        const auto& lay = barrier_.layout;
        Vector ybar = Vector::Zero(barrier_.position_total);
        for (size_t l = 0; l < models_.size(); ++l) {
            const Vector xl = lay.block(xbar, static_cast<int>(l));
            Matrix Jl = barrier_.position_jacobian[l](xl);
            ybar.segment(barrier_.position_offset[l], barrier_.position_dim[l]) =
                Jl * models_[l].drift(xl);
        }
        Matrix H = hess_h_position(barrier_, xbar);
        Vector z = H * ybar;
        double h = eval_h(barrier_, xbar);
        double ap = alphas_[0].derivative(h);
        Vector gp_all = grad_h_position_stacked(barrier_, xbar);

        Vector row = Vector::Zero(lay.total);
        for (size_t i = 0; i < models_.size(); ++i) {
            const Vector xi_state = lay.block(xbar, static_cast<int>(i));
            Matrix Ji = barrier_.position_jacobian[i](xi_state);
            Vector gp = gp_all.segment(barrier_.position_offset[i], barrier_.position_dim[i]);
            Vector blk = Ji.transpose() * z.segment(barrier_.position_offset[i],
                                                    barrier_.position_dim[i]);
            blk += models_[i].drift_matrix.transpose() * (Ji.transpose() * gp);
            blk += ap * (Ji.transpose() * gp);
            row.segment(lay.offset[i], lay.dim[i]) = blk;
        }
        return row;
    }

    // Central finite differences on a state function.
    const double step = 1e-6;
    Vector row = Vector::Zero(barrier_.layout.total);
    Vector x = xbar;
    for (int idx = 0; idx < barrier_.layout.total; ++idx) {
        const double saved = x[idx];
        x[idx] = saved + step;
        double up = psi(j, x);
        x[idx] = saved - step;
        double dn = psi(j, x);
        x[idx] = saved;
        row[idx] = (up - dn) / (2.0 * step);
    }
    return row;
}

Vector PsiCascade::grad_psi_state(int j, const Vector& xbar, int agent) const {
    Vector g = grad_psi_stacked(j, xbar);
    return g.segment(barrier_.layout.offset[agent], barrier_.layout.dim[agent]);
}

std::vector<LieTerms> PsiCascade::lie_terms_all(const Vector& xbar) const {
    const int q = order();
    Vector g = grad_psi_stacked(q - 1, xbar);
    std::vector<LieTerms> terms(models_.size());
    for (size_t i = 0; i < models_.size(); ++i) {
        const auto& lay = barrier_.layout;
        Vector gx = g.segment(lay.offset[i], lay.dim[i]);
        const Vector xi_state = lay.block(xbar, static_cast<int>(i));
        terms[i].lf = gx.dot(models_[i].drift(xi_state));
        terms[i].lg = gx.transpose() * models_[i].actuation(xi_state);
    }
    return terms;
}

LieTerms PsiCascade::lie_terms(const Vector& xbar, int agent) const {
    return lie_terms_all(xbar)[static_cast<size_t>(agent)];
}

PsiCascade PsiCascade::with_atoms(std::vector<BarrierAtom> atoms) const {
    return PsiCascade(barrier_.with_atoms(std::move(atoms)), alphas_, xi_, models_);
}

PsiCascade build_cascade(const ComposedBarrier& barrier, std::vector<AlphaFunction> alphas,
                         double xi, const std::vector<AgentModel>& models,
                         const std::vector<Vector>& probe_states) {
    PsiCascade cascade(barrier, std::move(alphas), xi, models);
    const int q = cascade.order();
    for (const Vector& x : probe_states) {
        for (int j = 0; j + 1 < q; ++j) {
            // Inputs must be absent below the top level.
            for (size_t i = 0; i < models.size(); ++i) {
                Vector gx = cascade.grad_psi_state(j, x, static_cast<int>(i));
                RowVector lg =
                    gx.transpose() * models[i].actuation(barrier.layout.block(x, static_cast<int>(i)));
                if (lg.lpNorm<Eigen::Infinity>() > 1e-7) {
                    throw RelativeDegreeMismatch(
                        "input appears below the top cascade level");
                }
            }
        }
    }
    return cascade;
}

}  // namespace rcbf
