#pragma once

#include <filesystem>
#include <optional>

#include "kto/kernel.hpp"
#include "kto/operators.hpp"
#include "kto/snapshot.hpp"

namespace kto {

struct DmdResult {
    Eigen::VectorXcd eigenvalues; // sorted: Re desc, ties Im desc
    Eigen::MatrixXcd modes;       // d x r, column j goes with eigenvalue j
    std::size_t rank_used;
};

// Exact DMD: thin SVD X = U S V^T, eigendecomposition of U^T Y V S^{-1},
// modes Y V S^{-1} W. Singular values below svd_tol * sigma_max (or beyond
// `rank`, if given) are truncated.
DmdResult exact_dmd(const PairedDataset& data, std::optional<std::size_t> rank = std::nullopt,
                    double svd_tol = 1e-10);

void save_dmd(const DmdResult& result, const std::filesystem::path& path);

// Dimension of the explicit monomial feature map reproducing the polynomial
// kernel (<x,x'> + c)^p on d-dimensional inputs.
std::size_t polynomial_feature_dim(std::size_t d, int degree, double offset);

// Rows are feature vectors: all monomials of total degree exactly p in
// z = [x; sqrt(c)] (z = x when c == 0), with square-root multinomial weights
// so that <row_i, row_j> == (<x_i, x_j> + c)^p exactly.
Eigen::MatrixXd polynomial_features(const SnapshotSet& set, const KernelSpec& kernel);

// Eigenvalues of (C_XX + eps_tilde I)^{-1} C_XY (Koopman) or
// (C_XX + eps_tilde I)^{-1} C_YX (Perron-Frobenius) in explicit feature
// space, with C_XX = (1/n) Phi Phi^T etc. Their nonzero part must match the
// Gram-matrix fit with epsilon = n * eps_tilde.
Eigen::VectorXcd covariance_eigs(const PairedDataset& data, const KernelSpec& kernel,
                                 double eps_tilde, OperatorKind kind);

}  // namespace kto
