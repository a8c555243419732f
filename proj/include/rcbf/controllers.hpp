#pragma once

#include <array>
#include <vector>

#include "rcbf/barrier.hpp"
#include "rcbf/margins.hpp"
#include "rcbf/value_functions.hpp"

namespace rcbf {

struct BezierCurve {
    std::array<Vector, 4> points;  // start .. end
    double t0 = 0.0, tf = 1.0;

    Vector position(double t) const;
    Vector velocity(double t) const;
    Vector acceleration(double t) const;
};

struct NominalPolicy {
    enum class Kind { Zero, FormationBezier, PursuitPD };
    Kind kind = Kind::Zero;

    BezierCurve curve;  // FormationBezier
    Vector offset;
    double k1 = 1.0;
    double k2 = 0.0;
    bool literal_paper_sign = false;  // apply -K e - xddot verbatim

    int target_id = -1;  // PursuitPD

    static NominalPolicy zero() { return {}; }
};

enum class ControllerKind {
    NormalCentralized,
    NormalDistributed,
    NormalHighOrder,
    AdversarialMax,
    NominalOnly,
    NominalOwnFilter,  // nominal law filtered through the agent team's own barrier
};

// Most recently received inputs (filter coordinates), normal senders only.
struct BroadcastTable {
    struct Entry {
        Vector input;
        double timestamp = 0.0;
    };
    std::vector<std::vector<Entry>> slots;  // [receiver][sender]

    static BroadcastTable initialize(const std::vector<AgentModel>& models);
    void store(int sender, const Vector& u_filter, double t,
               const std::vector<AgentModel>& models);
    const Entry& get(int receiver, int sender) const { return slots[receiver][sender]; }
};

enum class FilterStatus { Optimal, Fallback, NumericalFailure };

struct FilterOutcome {
    Vector u_filter;
    FilterStatus status = FilterStatus::Optimal;
    bool row_present = false;
    double row_value = 0.0;  // safety-row LHS at the returned input
};

// Worst-case misbehaving input: arg max of L_f h + L_g h u over the
// polytope, held until the adversary's next sample.
Vector adversarial_input(const ComposedBarrier& barrier, const std::vector<AgentModel>& models,
                         int agent, const Vector& xbar_sampled);

struct CentralizedOutcome {
    std::vector<Vector> u_filter;  // per agent; empty for adversaries
    FilterStatus status = FilterStatus::Optimal;
    bool row_present = false;
    double row_value = 0.0;
};

// One QP over all normal inputs jointly: polytope rows per agent plus the
// single safety row with the adversaries bounded by gamma^max. Infeasible
// instances fall back to per-agent best-effort inputs.
CentralizedOutcome centralized_filter(const ComposedBarrier& barrier,
                                      const std::vector<AgentModel>& models,
                                      const AlphaFunction& alpha, const MarginConfig& margin,
                                      double interval, const Vector& xbar_sampled,
                                      const std::vector<Vector>& u_nom);

// Agent-local QP using the most recently received neighbor inputs.
FilterOutcome distributed_filter(const ComposedBarrier& barrier,
                                 const std::vector<AgentModel>& models, const AlphaFunction& alpha,
                                 const MarginConfig& margin, double interval, int agent,
                                 const Vector& xbar_sampled, const BroadcastTable& broadcast,
                                 const Vector& u_nom,
                                 const std::vector<int>* team = nullptr);

// Same shape one cascade level up: h -> psi_{q-1}, alpha -> alpha_q,
// eta -> eta'(interval); the fallback cost uses L_g psi_{q-1}.
FilterOutcome high_order_filter(const PsiCascade& cascade, const MarginConfig& margin,
                                double interval, int agent, const Vector& xbar_sampled,
                                const BroadcastTable& broadcast, const Vector& u_nom,
                                const std::vector<int>* team = nullptr);

// Tracking input in filter coordinates (offset-point velocity for
// unicycles, acceleration for double integrators).
Vector nominal_input(const NominalPolicy& policy, const std::vector<AgentModel>& models,
                     int agent, const Vector& xbar, double t);

}  // namespace rcbf
