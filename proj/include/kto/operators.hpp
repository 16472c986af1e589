#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>

#include "kto/kernel.hpp"
#include "kto/snapshot.hpp"

namespace kto {

enum class OperatorKind { Koopman, PerronFrobenius };

const char* operator_kind_name(OperatorKind kind);
OperatorKind operator_kind_from_name(const std::string& name);

// One eigenfunction phi(x) = sum_i alpha_i k(x, x_i) over the training points.
class Eigenfunction {
public:
    Eigenfunction(Eigen::VectorXcd alpha, KernelSpec kernel,
                  std::shared_ptr<const SnapshotSet> training_x, std::complex<double> eigenvalue);

    const Eigen::VectorXcd& alpha() const { return alpha_; }
    const KernelSpec& kernel() const { return kernel_; }
    const SnapshotSet& training_x() const { return *training_x_; }
    std::complex<double> eigenvalue() const { return eigenvalue_; }

private:
    Eigen::VectorXcd alpha_;
    KernelSpec kernel_;
    std::shared_ptr<const SnapshotSet> training_x_;
    std::complex<double> eigenvalue_;
};

std::complex<double> eval_eigenfunction(const Eigenfunction& ef, const Eigen::VectorXd& x);
Eigen::VectorXcd grad_eigenfunction(const Eigenfunction& ef, const Eigen::VectorXd& x);

class EigenDecomposition {
public:
    EigenDecomposition(OperatorKind kind, Eigen::VectorXcd eigenvalues, Eigen::MatrixXcd coefficients,
                       double epsilon, KernelSpec kernel,
                       std::shared_ptr<const SnapshotSet> training_x, std::size_t lag_steps,
                       std::optional<double> dt);

    OperatorKind operator_kind() const { return kind_; }
    const Eigen::VectorXcd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXcd& coefficients() const { return coefficients_; }
    double epsilon() const { return epsilon_; }
    const KernelSpec& kernel() const { return kernel_; }
    const SnapshotSet& training_x() const { return *training_x_; }
    std::shared_ptr<const SnapshotSet> training_x_ptr() const { return training_x_; }
    std::size_t lag_steps() const { return lag_steps_; }
    std::optional<double> dt() const { return dt_; }

    std::size_t num_eigenpairs() const { return static_cast<std::size_t>(eigenvalues_.size()); }

    // Physical time spanned by one lag step pairing; unit steps when dt is unknown.
    double lag_time() const { return static_cast<double>(lag_steps_) * dt_.value_or(1.0); }

    // j is 1-based: eigenfunction 1 belongs to the leading eigenvalue.
    Eigenfunction eigenfunction(std::size_t j) const;

private:
    OperatorKind kind_;
    Eigen::VectorXcd eigenvalues_;
    Eigen::MatrixXcd coefficients_;
    double epsilon_;
    KernelSpec kernel_;
    std::shared_ptr<const SnapshotSet> training_x_;
    std::size_t lag_steps_;
    std::optional<double> dt_;
};

// Gram-matrix estimation of the kernel transfer operator eigenpairs.
// Koopman: (G_XX + eps I)^{-1} G_YX v = lambda v, alpha = v.
// Perron-Frobenius: (G_XX + eps I)^{-1} G_XY v = lambda v, alpha = (G_XX + eps I)^{-1} v.
// Eigenvalues are sorted by decreasing real part, ties by decreasing imaginary
// part. Coefficient columns are scaled so max_i |phi_j(x_i)| = 1 with the
// attaining entry real positive. m defaults to min(10, n).
EigenDecomposition fit(const PairedDataset& data, const KernelSpec& kernel, double epsilon,
                       OperatorKind kind, std::optional<std::size_t> m = std::nullopt);

// phi_j evaluated along a trajectory, one value per snapshot. 1-based j.
Eigen::VectorXcd eigenfunction_series(const EigenDecomposition& decomp, const SnapshotSet& traj,
                                      std::size_t j);

// All eigenfunction series at once: traj.count x m.
Eigen::MatrixXcd eigenfunction_series_all(const EigenDecomposition& decomp,
                                          const SnapshotSet& traj);

// JSON serialization; the training snapshots are written next to `path` as
// "<stem>_training.kto1" and referenced by name plus content hash.
void save_decomposition(const EigenDecomposition& decomp, const std::filesystem::path& path);
EigenDecomposition load_decomposition(const std::filesystem::path& path);

}  // namespace kto
