#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace kto {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Ordered collection of equally-shaped real tensors representing system
/// states over time. Snapshots are stored flattened row-major; all kernel
/// math operates on the flat vectors (the Frobenius norm of a tensor equals
/// the Euclidean norm of its flattening, so nothing is lost).
class SnapshotSet {
public:
    /// Validates that data.size() == count * prod(shape) and that every
    /// entry is finite. Throws DimensionMismatch / NonFinite otherwise.
    SnapshotSet(std::vector<std::size_t> shape, std::size_t count,
                std::vector<double> data, std::optional<double> dt = std::nullopt);

    /// Convenience: one snapshot per matrix row, shape is [cols].
    static SnapshotSet from_matrix(const Eigen::MatrixXd& rows,
                                   std::optional<double> dt = std::nullopt);

    std::size_t count() const { return count_; }
    std::size_t dim() const { return dim_; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::optional<double> dt() const { return dt_; }
    const std::vector<double>& data() const { return data_; }

    /// Flat view of snapshot i (length dim()).
    Eigen::Map<const Eigen::VectorXd> snapshot(std::size_t i) const {
        return {data_.data() + i * dim_, static_cast<Eigen::Index>(dim_)};
    }

    /// count() x dim() view, one snapshot per row.
    Eigen::Map<const RowMatrixXd> as_matrix() const {
        return {data_.data(), static_cast<Eigen::Index>(count_),
                static_cast<Eigen::Index>(dim_)};
    }

    /// Subset of snapshots at indices begin, begin+stride, ... (count taken).
    SnapshotSet slice(std::size_t begin, std::size_t count, std::size_t stride = 1) const;

    /// Mean snapshot over the set.
    Eigen::VectorXd mean_snapshot() const;

    bool same_layout(const SnapshotSet& other) const { return shape_ == other.shape_; }

private:
    std::vector<std::size_t> shape_;
    std::size_t count_;
    std::size_t dim_;
    std::vector<double> data_;
    std::optional<double> dt_;
};

/// Aligned (X, Y) snapshot pairs with y_i the lag-tau successor of x_i.
/// lag_steps is measured in indices of the source trajectory; dt is the
/// source trajectory's snapshot spacing, so the lag time is lag_steps * dt.
struct PairedDataset {
    SnapshotSet x;
    SnapshotSet y;
    std::size_t lag_steps = 1;
    std::optional<double> dt;

    std::size_t count() const { return x.count(); }
    std::optional<double> lag_time() const {
        if (!dt) return std::nullopt;
        return static_cast<double>(lag_steps) * *dt;
    }
};

/// Builds lag-tau pairs from a single trajectory with a sliding window.
/// Pair i is (traj[i * stride], traj[i * stride + lag_steps]); stride
/// subsamples the window starts (stride 1 keeps every pair, giving
/// count == traj.count() - lag_steps).
PairedDataset from_trajectory(const SnapshotSet& traj, std::size_t lag_steps,
                              std::size_t stride = 1);

}  // namespace kto
