#pragma once

#include <Eigen/Dense>
#include <complex>

namespace kto::detail {

struct EigResult {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;  // right eigenvectors, one per column
};

// Dense nonsymmetric eigendecomposition of a real square matrix via LAPACK
// dgeev. The input is copied (dgeev overwrites its argument).
EigResult eig_dense(const Eigen::MatrixXd& a);

// Sorting convention for spectra: decreasing real part, ties broken by
// decreasing imaginary part.
inline bool eig_less(const std::complex<double>& a, const std::complex<double>& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

}  // namespace kto::detail
