#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <vector>

#include "kto/operators.hpp"

namespace kto {

// Implied relaxation time -lag_time / ln|lambda|. Returns +infinity for
// |lambda| >= 1 and 0 for lambda == 0.
double timescale(std::complex<double> lambda, double lag_time);

struct ChangePointEvent {
    std::size_t time_index;  // in [1, series length - 1]
    std::size_t eigen_index; // 1-based eigenfunction number
    double jump;             // signed first difference of the Re series
    double timescale;
};

struct DetectOptions {
    double rel_threshold = 0.4;
    std::size_t min_separation = 5;
    bool rolling_median = false;   // median-filter the series before differencing
    std::size_t median_window = 5; // odd window size for the filter
};

struct ChangePointReport {
    std::vector<ChangePointEvent> events; // sorted by timescale desc, time asc
    std::map<std::size_t, double> threshold_used; // absolute threshold per eigen index
    std::map<std::size_t, Eigen::VectorXd> series; // Re phi_j along traj, for audit
};

// Flags time steps where the first difference of Re phi_j exceeds
// rel_threshold times the series range, suppressing events within
// min_separation steps of a larger jump on the same eigenfunction.
// A constant series produces no events.
ChangePointReport detect(const EigenDecomposition& decomp, const SnapshotSet& traj,
                         const std::vector<std::size_t>& indices,
                         const DetectOptions& options = {});

}  // namespace kto
