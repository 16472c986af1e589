#include "kto/snapshot.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "kto/errors.hpp"

namespace kto {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t p = 1;
    for (std::size_t s : shape) {
        if (s == 0) throw InvalidArgument("SnapshotSet: shape axes must be positive");
        p *= s;
    }
    return p;
}

}  // namespace

SnapshotSet::SnapshotSet(std::vector<std::size_t> shape, std::size_t count,
                         std::vector<double> data, std::optional<double> dt)
    : shape_(std::move(shape)), count_(count), dim_(shape_product(shape_)),
      data_(std::move(data)), dt_(dt) {
    if (shape_.empty()) throw InvalidArgument("SnapshotSet: shape must have at least one axis");
    if (data_.size() != count_ * dim_) {
        throw DimensionMismatch("SnapshotSet: data length " + std::to_string(data_.size()) +
                                " != count * prod(shape) = " + std::to_string(count_ * dim_));
    }
    for (double v : data_) {
        if (!std::isfinite(v)) throw NonFinite("SnapshotSet: non-finite entry in data");
    }
    if (dt_ && !(*dt_ > 0.0)) throw InvalidArgument("SnapshotSet: dt must be positive");
}

SnapshotSet SnapshotSet::from_matrix(const Eigen::MatrixXd& rows, std::optional<double> dt) {
    std::vector<double> data(static_cast<std::size_t>(rows.size()));
    Eigen::Map<RowMatrixXd>(data.data(), rows.rows(), rows.cols()) = rows;
    return SnapshotSet({static_cast<std::size_t>(rows.cols())},
                       static_cast<std::size_t>(rows.rows()), std::move(data), dt);
}

SnapshotSet SnapshotSet::slice(std::size_t begin, std::size_t count, std::size_t stride) const {
    if (stride == 0) throw InvalidArgument("SnapshotSet::slice: stride must be positive");
    if (count > 0 && begin + (count - 1) * stride >= count_) {
        throw InvalidArgument("SnapshotSet::slice: range exceeds snapshot count");
    }
    std::vector<double> out;
    out.reserve(count * dim_);
    for (std::size_t i = 0; i < count; ++i) {
        const double* src = data_.data() + (begin + i * stride) * dim_;
        out.insert(out.end(), src, src + dim_);
    }
    std::optional<double> dt = dt_;
    if (dt) dt = *dt * static_cast<double>(stride);
    return SnapshotSet(shape_, count, std::move(out), dt);
}

Eigen::VectorXd SnapshotSet::mean_snapshot() const {
    if (count_ == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    return as_matrix().colwise().mean().transpose();
}

PairedDataset from_trajectory(const SnapshotSet& traj, std::size_t lag_steps,
                              std::size_t stride) {
    if (lag_steps == 0) throw InvalidArgument("from_trajectory: lag_steps must be >= 1");
    if (stride == 0) throw InvalidArgument("from_trajectory: stride must be >= 1");
    if (lag_steps >= traj.count()) {
        throw LagTooLarge("from_trajectory: lag_steps " + std::to_string(lag_steps) +
                          " >= trajectory length " + std::to_string(traj.count()));
    }
    const std::size_t max_pairs = traj.count() - lag_steps;
    const std::size_t n = (max_pairs + stride - 1) / stride;
    SnapshotSet x = traj.slice(0, n, stride);
    SnapshotSet y = traj.slice(lag_steps, n, stride);
    return PairedDataset{std::move(x), std::move(y), lag_steps, traj.dt()};
}

}  // namespace kto
