#pragma once

#include <stdexcept>
#include <string>

namespace rcbf {

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteState : SimulationError {
    using SimulationError::SimulationError;
};

struct EmptyBoundingBox : SimulationError {
    using SimulationError::SimulationError;
};

struct DegeneratePolytope : SimulationError {
    using SimulationError::SimulationError;
};

struct UnboundedPolytope : SimulationError {
    using SimulationError::SimulationError;
};

struct GradientSingularity : SimulationError {
    using SimulationError::SimulationError;
};

struct RelativeDegreeMismatch : SimulationError {
    using SimulationError::SimulationError;
};

struct JitterExceedsPeriod : SimulationError {
    using SimulationError::SimulationError;
};

struct DimensionTooLarge : SimulationError {
    using SimulationError::SimulationError;
};

struct ScenarioError : SimulationError {
    using SimulationError::SimulationError;
};

}  // namespace rcbf
