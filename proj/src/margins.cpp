#include "rcbf/margins.hpp"

#include <cmath>

#include "rcbf/errors.hpp"
#include "rcbf/rng.hpp"

namespace rcbf {

double epsilon_bound(double interval, double mu, double l_prime) {
    return (mu / l_prime) * (std::exp(l_prime * interval) - 1.0);
}

namespace {

struct PairQuotients {
    double qf = 0.0, qg = 0.0, qalpha = 0.0, qgamma = 0.0, grad_norm = 0.0, u_vert = 0.0;
};

// One deterministic sampled difference quotient; pure in (seed, k).
PairQuotients constant_sample(const std::vector<AgentModel>& models,
                              const ComposedBarrier& barrier, const AlphaFunction& alpha,
                              const StateBounds& bounds, std::uint64_t seed, int k) {
    SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(k) + 1, 0xc0de));
    Vector x1 = rng.uniform_vector(bounds.lo, bounds.hi);
    Vector x2 = rng.uniform_vector(bounds.lo, bounds.hi);
    double gap = (x1 - x2).norm();
    PairQuotients out;
    if (gap < 1e-9) return out;

    double sf = 0.0, sg = 0.0, sgamma = 0.0;
    for (size_t i = 0; i < models.size(); ++i) {
        const int ai = static_cast<int>(i);
        ChannelTerms t1 = channel_terms_h(barrier, models[i], ai, x1);
        ChannelTerms t2 = channel_terms_h(barrier, models[i], ai, x2);
        if (models[i].role == AgentRole::Normal) {
            sf += std::abs(t1.lf - t2.lf);
            sg += (t1.lg - t2.lg).norm();
            for (const Vector& v : enumerate_polytope_vertices(t1.input_set.A, t1.input_set.b))
                out.u_vert = std::max(out.u_vert, v.norm());
        } else {
            double g1 = gamma_value(barrier, models[i], ai, x1, Direction::Max);
            double g2 = gamma_value(barrier, models[i], ai, x2, Direction::Max);
            sgamma += std::abs(g1 - g2);
        }
        out.grad_norm = std::max(out.grad_norm, grad_h_state(barrier, x1, ai).norm());
        out.grad_norm = std::max(out.grad_norm, grad_h_state(barrier, x2, ai).norm());
    }
    out.qf = sf / gap;
    out.qg = sg / gap;
    out.qalpha = std::abs(alpha(eval_h(barrier, x1)) - alpha(eval_h(barrier, x2))) / gap;
    out.qgamma = sgamma / gap;
    return out;
}

ConstantEstimates reduce_to_estimates(const PairQuotients& best) {
    ConstantEstimates est;
    est.c_f = 1.2 * best.qf;
    est.c_g = 1.2 * best.qg;
    est.c_alpha = 1.2 * best.qalpha;
    est.c_gamma = 1.2 * best.qgamma;
    est.c_h = 1.2 * best.grad_norm;
    est.u_max = best.u_vert;
    return est;
}

void fold_max(PairQuotients& acc, const PairQuotients& s) {
    acc.qf = std::max(acc.qf, s.qf);
    acc.qg = std::max(acc.qg, s.qg);
    acc.qalpha = std::max(acc.qalpha, s.qalpha);
    acc.qgamma = std::max(acc.qgamma, s.qgamma);
    acc.grad_norm = std::max(acc.grad_norm, s.grad_norm);
    acc.u_vert = std::max(acc.u_vert, s.u_vert);
}

}  // namespace

ConstantEstimates estimate_constants_serial(const std::vector<AgentModel>& models,
                                            const ComposedBarrier& barrier,
                                            const AlphaFunction& alpha, const StateBounds& bounds,
                                            int sample_count, std::uint64_t rng_seed) {
    if (bounds.empty()) throw EmptyBoundingBox("estimate_constants: no state bounds");
    PairQuotients best;
    for (int k = 0; k < sample_count; ++k) {
        fold_max(best, constant_sample(models, barrier, alpha, bounds, rng_seed, k));
    }
    return reduce_to_estimates(best);
}

ConstantEstimates estimate_constants(const std::vector<AgentModel>& models,
                                     const ComposedBarrier& barrier, const AlphaFunction& alpha,
                                     const StateBounds& bounds, int sample_count,
                                     std::uint64_t rng_seed) {
    if (bounds.empty()) throw EmptyBoundingBox("estimate_constants: no state bounds");
    PairQuotients best;
#ifdef _OPENMP
#pragma omp parallel
    {
        PairQuotients local;
#pragma omp for schedule(static) nowait
        for (int k = 0; k < sample_count; ++k) {
            fold_max(local, constant_sample(models, barrier, alpha, bounds, rng_seed, k));
        }
#pragma omp critical
        fold_max(best, local);
    }
#else
    for (int k = 0; k < sample_count; ++k) {
        fold_max(best, constant_sample(models, barrier, alpha, bounds, rng_seed, k));
    }
#endif
    return reduce_to_estimates(best);
}

double eta(const MarginConfig& m, double interval) {
    if (m.override_eta) return *m.override_eta;
    return (m.c_f + m.c_g * m.u_max + m.c_alpha + m.c_gamma) *
               epsilon_bound(interval, m.mu, m.l_prime) +
           m.c_h * m.phi_sum;
}

double eta_prime(const MarginConfig& m, double interval) {
    if (m.override_eta) return *m.override_eta;
    return (m.c_f + m.c_g * m.u_max + m.c_alpha + m.c_gamma) *
           epsilon_bound(interval, m.mu, m.l_prime);
}

double xi_value(const MarginConfig& m) {
    if (m.override_xi) return *m.override_xi;
    return m.c_h * m.phi_sum;
}

namespace {

// Distance from x (inside S) to the zero level set of h, by Newton
// projection along the gradient. Sampled estimate, not certified.
struct BoundaryProjection {
    double distance = 0.0;
    Vector point;
    bool valid = false;
};

BoundaryProjection project_to_boundary(const ComposedBarrier& barrier, const Vector& x) {
    BoundaryProjection out;
    Vector y = x;
    for (int it = 0; it < 30; ++it) {
        double h = eval_h(barrier, y);
        Vector g = grad_h(barrier, y);
        double g2 = g.squaredNorm();
        if (g2 < 1e-14) return out;
        y -= (h / g2) * g;
        if (std::abs(eval_h(barrier, y)) < 1e-10) break;
    }
    if (std::abs(eval_h(barrier, y)) > 1e-6) return out;
    out.point = y;
    out.distance = (y - x).norm();
    out.valid = true;
    return out;
}

struct T3Sample {
    double value = -std::numeric_limits<double>::infinity();
    Vector state;
    bool valid = false;
};

double condition_value(const std::vector<AgentModel>& models, const ComposedBarrier& barrier,
                       const AlphaFunction& alpha, const Vector& x, double eps_star,
                       double eta_val, int ball_samples, std::uint64_t seed, int k) {
    double sum = 0.0;
    SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(k) + 1, 0xba11));
    const double inv_dim = 1.0 / static_cast<double>(x.size());
    for (size_t i = 0; i < models.size(); ++i) {
        const int ai = static_cast<int>(i);
        if (models[i].role == AgentRole::Normal) {
            // max of gamma_i^min over a sampled ball around x
            double best = gamma_value(barrier, models[i], ai, x, Direction::Min);
            for (int s = 0; s < ball_samples && eps_star > 0.0; ++s) {
                Vector dir = rng.unit_vector(static_cast<int>(x.size()));
                double r = eps_star * std::pow(rng.uniform01(), inv_dim);
                Vector xs = x + r * dir;
                best = std::max(best, gamma_value(barrier, models[i], ai, xs, Direction::Min));
            }
            sum += best;
        } else {
            sum += gamma_value(barrier, models[i], ai, x, Direction::Max);
        }
    }
    return sum + alpha(eval_h(barrier, x)) + eta_val;
}

template <typename Body>
Theorem3Report run_theorem3(const std::vector<AgentModel>& models, const ComposedBarrier& barrier,
                            const AlphaFunction& alpha, const MarginConfig& margin,
                            const StateBounds& bounds, int grid_resolution, double interval,
                            int ball_samples, Body&& for_each_index) {
    const int n = static_cast<int>(bounds.lo.size());
    if (n > 6) throw DimensionTooLarge("theorem-3 grid check limited to stacked dimension 6");

    const double eps_star = epsilon_bound(interval, margin.mu, margin.l_prime);
    const double eta_val = eta(margin, interval);
    long total = 1;
    for (int d = 0; d < n; ++d) total *= grid_resolution;

    auto evaluate_index = [&](long flat) -> T3Sample {
        T3Sample out;
        Vector x(n);
        long rem = flat;
        for (int d = 0; d < n; ++d) {
            int idx = static_cast<int>(rem % grid_resolution);
            rem /= grid_resolution;
            double t = (grid_resolution == 1) ? 0.5 : static_cast<double>(idx) / (grid_resolution - 1);
            x[d] = bounds.lo[d] + t * (bounds.hi[d] - bounds.lo[d]);
        }
        if (eval_h(barrier, x) > 0.0) return out;
        BoundaryProjection proj = project_to_boundary(barrier, x);
        if (!proj.valid) return out;

        // Evaluate on the boundary itself, and at the grid point when it
        // falls inside the 2 eps* band.
        out.value = condition_value(models, barrier, alpha, proj.point, eps_star, eta_val,
                                    ball_samples, 0x7e3, static_cast<int>(flat));
        out.state = proj.point;
        out.valid = true;
        if (eps_star > 0.0 && proj.distance <= 2.0 * eps_star) {
            double v = condition_value(models, barrier, alpha, x, eps_star, eta_val,
                                       ball_samples, 0x7e4, static_cast<int>(flat));
            if (v > out.value) {
                out.value = v;
                out.state = x;
            }
        }
        return out;
    };

    return for_each_index(total, evaluate_index);
}

}  // namespace

Theorem3Report check_theorem3_condition_serial(const std::vector<AgentModel>& models,
                                               const ComposedBarrier& barrier,
                                               const AlphaFunction& alpha,
                                               const MarginConfig& margin,
                                               const StateBounds& bounds, int grid_resolution,
                                               double interval, int ball_samples) {
    return run_theorem3(models, barrier, alpha, margin, bounds, grid_resolution, interval,
                        ball_samples, [&](long total, auto&& eval) {
                            Theorem3Report rep;
                            double best = -std::numeric_limits<double>::infinity();
                            for (long k = 0; k < total; ++k) {
                                T3Sample s = eval(k);
                                if (!s.valid) continue;
                                ++rep.samples_evaluated;
                                if (s.value > best) {
                                    best = s.value;
                                    rep.witness_state = s.state;
                                }
                            }
                            rep.worst_margin = best;
                            rep.holds = rep.samples_evaluated > 0 && best <= 0.0;
                            return rep;
                        });
}

Theorem3Report check_theorem3_condition(const std::vector<AgentModel>& models,
                                        const ComposedBarrier& barrier, const AlphaFunction& alpha,
                                        const MarginConfig& margin, const StateBounds& bounds,
                                        int grid_resolution, double interval, int ball_samples) {
    return run_theorem3(
        models, barrier, alpha, margin, bounds, grid_resolution, interval, ball_samples,
        [&](long total, auto&& eval) {
            Theorem3Report rep;
            double best = -std::numeric_limits<double>::infinity();
            long best_idx = -1;
            Vector best_state;
            int evaluated = 0;
#ifdef _OPENMP
#pragma omp parallel
            {
                double lbest = -std::numeric_limits<double>::infinity();
                long lidx = -1;
                Vector lstate;
                int leval = 0;
#pragma omp for schedule(dynamic, 8) nowait
                for (long k = 0; k < total; ++k) {
                    T3Sample s = eval(k);
                    if (!s.valid) continue;
                    ++leval;
                    if (s.value > lbest || (s.value == lbest && (lidx < 0 || k < lidx))) {
                        lbest = s.value;
                        lidx = k;
                        lstate = s.state;
                    }
                }
#pragma omp critical
                {
                    evaluated += leval;
                    if (lidx >= 0 && (lbest > best || (lbest == best && (best_idx < 0 || lidx < best_idx)))) {
                        best = lbest;
                        best_idx = lidx;
                        best_state = lstate;
                    }
                }
            }
#else
            for (long k = 0; k < total; ++k) {
                T3Sample s = eval(k);
                if (!s.valid) continue;
                ++evaluated;
                if (s.value > best) {
                    best = s.value;
                    best_idx = k;
                    best_state = s.state;
                }
            }
#endif
            rep.samples_evaluated = evaluated;
            rep.worst_margin = best;
            rep.witness_state = best_state;
            rep.holds = evaluated > 0 && best <= 0.0;
            return rep;
        });
}

}  // namespace rcbf
