#include "kto/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kto/errors.hpp"

namespace kto {

double timescale(std::complex<double> lambda, double lag_time) {
    if (!(lag_time > 0.0)) throw InvalidArgument("timescale: lag_time must be positive");
    const double mod = std::abs(lambda);
    if (mod >= 1.0) return std::numeric_limits<double>::infinity();
    if (mod == 0.0) return 0.0;
    return -lag_time / std::log(mod);
}

namespace {

Eigen::VectorXd rolling_median(const Eigen::VectorXd& s, std::size_t window) {
    if (window < 1 || window % 2 == 0) {
        throw InvalidArgument("detect: median_window must be odd and positive");
    }
    const Eigen::Index n = s.size();
    const Eigen::Index half = static_cast<Eigen::Index>(window / 2);
    Eigen::VectorXd out(n);
    std::vector<double> buf;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
        buf.assign(s.data() + lo, s.data() + hi + 1);
        const std::size_t mid = buf.size() / 2;
        std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid), buf.end());
        double m = buf[mid];
        if (buf.size() % 2 == 0) {
            const double below = *std::max_element(buf.begin(),
                                                   buf.begin() + static_cast<std::ptrdiff_t>(mid));
            m = 0.5 * (m + below);
        }
        out[i] = m;
    }
    return out;
}

}  // namespace

ChangePointReport detect(const EigenDecomposition& decomp, const SnapshotSet& traj,
                         const std::vector<std::size_t>& indices, const DetectOptions& options) {
    if (!(options.rel_threshold > 0.0 && options.rel_threshold <= 1.0)) {
        throw InvalidArgument("detect: rel_threshold must be in (0, 1]");
    }
    if (!traj.same_layout(decomp.training_x())) {
        throw ShapeMismatch("detect: trajectory shape differs from the training snapshots");
    }
    if (traj.count() < 2) throw EmptySeries("detect: need at least two snapshots");

    ChangePointReport report;
    const double lag_time = decomp.lag_time();
    for (std::size_t j : indices) {
        if (j < 1 || j > decomp.num_eigenpairs()) {
            throw InvalidArgument("detect: eigen index " + std::to_string(j) + " out of range");
        }
        Eigen::VectorXd s = eigenfunction_series(decomp, traj, j).real();
        if (options.rolling_median) s = rolling_median(s, options.median_window);
        report.series[j] = s;

        const double range = s.maxCoeff() - s.minCoeff();
        const double threshold = options.rel_threshold * range;
        report.threshold_used[j] = threshold;
        if (range == 0.0) continue;

        std::vector<ChangePointEvent> candidates;
        const double ts = timescale(decomp.eigenvalues()[static_cast<Eigen::Index>(j - 1)],
                                    lag_time);
        for (Eigen::Index t = 1; t < s.size(); ++t) {
            const double jump = s[t] - s[t - 1];
            if (std::abs(jump) >= threshold) {
                candidates.push_back({static_cast<std::size_t>(t), j, jump, ts});
            }
        }

        // Non-maximum suppression: keep the largest |jump| within each window.
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const ChangePointEvent& a, const ChangePointEvent& b) {
                             if (std::abs(a.jump) != std::abs(b.jump)) {
                                 return std::abs(a.jump) > std::abs(b.jump);
                             }
                             return a.time_index < b.time_index;
                         });
        std::vector<ChangePointEvent> kept;
        for (const auto& cand : candidates) {
            const bool suppressed = std::any_of(
                kept.begin(), kept.end(), [&](const ChangePointEvent& k) {
                    const std::size_t lo = std::min(k.time_index, cand.time_index);
                    const std::size_t hi = std::max(k.time_index, cand.time_index);
                    return hi - lo <= options.min_separation;
                });
            if (!suppressed) kept.push_back(cand);
        }
        report.events.insert(report.events.end(), kept.begin(), kept.end());
    }

    std::stable_sort(report.events.begin(), report.events.end(),
                     [](const ChangePointEvent& a, const ChangePointEvent& b) {
                         if (a.timescale != b.timescale) return a.timescale > b.timescale;
                         if (a.time_index != b.time_index) return a.time_index < b.time_index;
                         return a.eigen_index < b.eigen_index;
                     });
    return report;
}

}  // namespace kto
