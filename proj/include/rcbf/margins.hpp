#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcbf/barrier.hpp"
#include "rcbf/dynamics.hpp"
#include "rcbf/value_functions.hpp"

namespace rcbf {

// Sampled-data robustness constants. The sum (c_f + c_g u_max + c_alpha +
// c_gamma) eps(interval) + c_h sum(phi_max) compensates inter-sample drift
// and disturbances; overrides win verbatim when set.
struct MarginConfig {
    double mu = 0.0;
    double l_prime = 1.0;
    double c_f = 0.0, c_g = 0.0, c_alpha = 0.0, c_gamma = 0.0, c_h = 0.0;
    double u_max = 0.0;
    double phi_sum = 0.0;
    std::optional<double> override_eta;
    std::optional<double> override_xi;
    std::string provenance = "user-supplied";  // or "sampled-estimate"
};

// (mu / l') (e^{l' interval} - 1); class-K in the interval.
double epsilon_bound(double interval, double mu, double l_prime);

struct ConstantEstimates {
    double c_f = 0.0, c_g = 0.0, c_alpha = 0.0, c_gamma = 0.0, c_h = 0.0;
    double u_max = 0.0;
};

// 1.2-inflated sampled Lipschitz quotients of the constraint-row terms over
// random state pairs in `bounds`; u_max is the largest polytope vertex norm
// (uninflated). Nondecreasing in sample_count on a fixed seed.
ConstantEstimates estimate_constants(const std::vector<AgentModel>& models,
                                     const ComposedBarrier& barrier, const AlphaFunction& alpha,
                                     const StateBounds& bounds, int sample_count,
                                     std::uint64_t rng_seed);
ConstantEstimates estimate_constants_serial(const std::vector<AgentModel>& models,
                                            const ComposedBarrier& barrier,
                                            const AlphaFunction& alpha, const StateBounds& bounds,
                                            int sample_count, std::uint64_t rng_seed);

double eta(const MarginConfig& margin, double interval);

// Cascade variant: no disturbance term (that lives in xi).
double eta_prime(const MarginConfig& margin, double interval);

double xi_value(const MarginConfig& margin);

struct MarginReport {
    double epsilon = 0.0;
    std::vector<double> eta_per_agent;
    std::optional<double> eta_prime;
    double xi = 0.0;
    MarginConfig config;
};

struct Theorem3Report {
    bool holds = false;
    double worst_margin = 0.0;
    Vector witness_state;
    int samples_evaluated = 0;
};

// Sampled (non-certified) sufficient-condition check on the inner boundary
// band of S: sup over sampled band states of
//   sum_i max_{ball} gamma_i^min + sum_j gamma_j^max + alpha(h) + eta(...)
// must be <= 0. `interval` is Gamma_max + 2 delta_max. Throws
// DimensionTooLarge for stacked dimension > 6.
Theorem3Report check_theorem3_condition(const std::vector<AgentModel>& models,
                                        const ComposedBarrier& barrier,
                                        const AlphaFunction& alpha, const MarginConfig& margin,
                                        const StateBounds& bounds, int grid_resolution,
                                        double interval, int ball_samples = 16);
Theorem3Report check_theorem3_condition_serial(const std::vector<AgentModel>& models,
                                               const ComposedBarrier& barrier,
                                               const AlphaFunction& alpha,
                                               const MarginConfig& margin,
                                               const StateBounds& bounds, int grid_resolution,
                                               double interval, int ball_samples = 16);

}  // namespace rcbf
