#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kto/operators.hpp"

namespace kto {

enum class Direction { Minimize, Maximize };
enum class StartPolicy { BestObserved, MeanSnapshot };

struct Bounds {
    double lo;
    double hi;
};

// Backtracking gradient ascent/descent settings. Unset fields are resolved
// per run: eta0 = 0.1 * (bounds range or 1.0), eta_min = 1e-8 * eta0,
// tol = 1e-10 * |phi(x0)|.
struct OptimizeConfig {
    std::optional<double> eta0;
    std::optional<double> eta_min;
    double shrink = 0.5;
    double grow = 1.1;
    std::size_t max_iters = 10000;
    std::optional<double> tol;
    std::optional<Bounds> bounds;
};

struct TracePoint {
    std::size_t iteration;
    double value;    // Re phi at the iterate
    double eta;
    double imag_abs; // |Im phi| diagnostic
};

struct OptimizationResult {
    Eigen::VectorXd x_star;
    double value;
    std::size_t iterations; // accepted improvement steps
    std::vector<TracePoint> trace;
    bool converged;
    Direction direction;
};

// Maximizes or minimizes Re phi by projected gradient steps
// x <- clamp(x -/+ eta * grad Re phi). A step that improves the objective by
// more than tol is accepted and eta grows (capped at 10 * eta0); otherwise
// the step is rejected and eta shrinks. The run converges when eta falls
// below eta_min; hitting max_iters accepted steps reports converged = false.
// The trace records the initial point and every accepted iterate, so it is
// strictly monotone after the first entry.
OptimizationResult optimize(const Eigenfunction& ef, const Eigen::VectorXd& x0,
                            Direction direction, const OptimizeConfig& cfg = {});

struct SummaryPair {
    std::size_t index; // 1-based eigenfunction number
    OptimizationResult min_result;
    OptimizationResult max_result;
};

// Runs optimize in both directions for each requested eigenfunction.
// BestObserved starts from the training snapshots attaining the min/max of
// the eigenfunction series; MeanSnapshot starts both runs from the mean.
std::vector<SummaryPair> summarize_all(const EigenDecomposition& decomp,
                                       const std::vector<std::size_t>& indices,
                                       StartPolicy starts = StartPolicy::BestObserved,
                                       const OptimizeConfig& cfg = {});

}  // namespace kto
