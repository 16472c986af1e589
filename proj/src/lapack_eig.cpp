#include "lapack_eig.hpp"

#include <lapacke.h>

#include "kto/errors.hpp"

namespace kto::detail {

EigResult eig_dense(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("eig_dense: matrix must be square");
    const lapack_int n = static_cast<lapack_int>(a.rows());
    EigResult out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    if (n == 0) return out;

    Eigen::MatrixXd work = a;  // destroyed by dgeev
    Eigen::VectorXd wr(n), wi(n);
    Eigen::MatrixXd vr(n, n);
    const lapack_int info =
        LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, wr.data(), wi.data(),
                      nullptr, 1, vr.data(), n);
    if (info < 0) throw InvalidArgument("dgeev: illegal argument " + std::to_string(-info));
    if (info > 0) throw ConvergenceFailure("dgeev: QR iteration failed to converge");

    // Unpack conjugate pairs from the packed real storage.
    for (lapack_int j = 0; j < n; ++j) {
        out.values[j] = {wr[j], wi[j]};
        if (wi[j] > 0.0 && j + 1 < n) {
            out.vectors.col(j) = vr.col(j) + std::complex<double>(0, 1) * vr.col(j + 1);
            out.vectors.col(j + 1) = vr.col(j) - std::complex<double>(0, 1) * vr.col(j + 1);
            out.values[j + 1] = {wr[j + 1], wi[j + 1]};
            ++j;
        } else {
            out.vectors.col(j) = vr.col(j);
        }
    }
    return out;
}

}  // namespace kto::detail
