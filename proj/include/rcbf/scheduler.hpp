#pragma once

#include <cstdint>
#include <vector>

namespace rcbf {

// Per-agent nominal period with bounded uniform jitter:
// t_i^{k+1} - t_i^k = period_i + delta_i(k), |delta_i(k)| <= jitter_max_i.
struct SampleSchedule {
    struct AgentTiming {
        double period = 0.01;
        double jitter_max = 0.0;
    };
    std::vector<AgentTiming> agents;
    std::uint64_t rng_seed = 0;
};

// First event at t = 0 for every agent. Throws JitterExceedsPeriod when
// jitter_max >= period for some agent.
std::vector<std::vector<double>> generate_schedule(const SampleSchedule& schedule, double horizon);

struct Event {
    double time = 0.0;
    int agent = 0;  // 0-based
};

// Time-ordered events; ties pop in ascending agent order.
struct EventQueue {
    std::vector<Event> events;
    size_t next = 0;

    static EventQueue build(const std::vector<std::vector<double>>& per_agent_times);
    bool empty() const { return next >= events.size(); }
    const Event& peek() const { return events[next]; }
    Event pop() { return events[next++]; }
};

}  // namespace rcbf
