#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "kto/snapshot.hpp"

namespace kto {

enum class KernelKind { Gaussian, Polynomial };

/// Positive-definite kernel on flattened snapshots.
///   Gaussian:   k(x, x') = exp(-|x - x'|^2 / (2 sigma^2))
///   Polynomial: k(x, x') = (<x, x'> + c)^p
class KernelSpec {
public:
    static KernelSpec gaussian(double sigma);
    static KernelSpec polynomial(int degree, double offset);

    KernelKind kind() const { return kind_; }
    double sigma() const { return sigma_; }
    int degree() const { return degree_; }
    double offset() const { return offset_; }

private:
    KernelSpec(KernelKind kind, double sigma, int degree, double offset)
        : kind_(kind), sigma_(sigma), degree_(degree), offset_(offset) {}

    KernelKind kind_;
    double sigma_;
    int degree_;
    double offset_;
};

/// Single kernel evaluation. Symmetric in its vector arguments.
double kernel_eval(const KernelSpec& k, Eigen::Ref<const Eigen::VectorXd> x,
                   Eigen::Ref<const Eigen::VectorXd> x2);

/// Gradient of k(x, xi) with respect to x.
///   Gaussian:   -(x - xi) k(x, xi) / sigma^2
///   Polynomial: p (<x, xi> + c)^(p-1) xi
Eigen::VectorXd kernel_grad(const KernelSpec& k, Eigen::Ref<const Eigen::VectorXd> x,
                            Eigen::Ref<const Eigen::VectorXd> xi);

/// Gram matrix with entry (i, j) = k(a_i, b_j). Gaussian squared distances
/// are assembled via |x|^2 + |x'|^2 - 2<x, x'> with a single matrix product,
/// clamped at zero to remove negative round-off.
Eigen::MatrixXd gram(const KernelSpec& k, const SnapshotSet& a, const SnapshotSet& b);

/// The three Gram matrices of a paired dataset. g_yx is the exact transpose
/// of g_xy (computed once).
struct GramPack {
    Eigen::MatrixXd g_xx;
    Eigen::MatrixXd g_xy;
    Eigen::MatrixXd g_yx;
};

GramPack compute_gram_pack(const KernelSpec& k, const PairedDataset& data);

/// Median pairwise Euclidean distance over the set, subsampled to at most
/// max_samples snapshots. A common bandwidth heuristic; not a prescription
/// from any particular source, just a reasonable starting point.
double median_pairwise_distance(const SnapshotSet& a, std::size_t max_samples = 1000,
                                std::uint64_t seed = 0);

}  // namespace kto
