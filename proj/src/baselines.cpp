#include "kto/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

#include "json.hpp"
#include "kto/base64.hpp"
#include "kto/errors.hpp"
#include "kto/io.hpp"
#include "lapack_eig.hpp"

namespace kto {

DmdResult exact_dmd(const PairedDataset& data, std::optional<std::size_t> rank, double svd_tol) {
    const std::size_t n = data.count();
    if (n == 0) throw InvalidArgument("exact_dmd: dataset is empty");
    if (!(svd_tol >= 0.0)) throw InvalidArgument("exact_dmd: svd_tol must be nonnegative");
    const Eigen::MatrixXd x = data.x.as_matrix().transpose(); // d x n, snapshots as columns
    const Eigen::MatrixXd y = data.y.as_matrix().transpose();
    const std::size_t max_rank = std::min<std::size_t>(x.rows(), x.cols());
    if (rank && (*rank < 1 || *rank > max_rank)) {
        throw InvalidArgument("exact_dmd: rank must be in [1, min(d, n)]");
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    if (!(smax > 0.0)) throw RankDeficient("exact_dmd: all singular values are zero");
    std::size_t r = 0;
    while (r < static_cast<std::size_t>(sv.size()) && sv[static_cast<Eigen::Index>(r)] >= svd_tol * smax) {
        ++r;
    }
    if (rank) r = std::min(r, *rank);
    if (r == 0) throw RankDeficient("exact_dmd: no singular value passes the tolerance");

    const Eigen::Index ri = static_cast<Eigen::Index>(r);
    const Eigen::MatrixXd u = svd.matrixU().leftCols(ri);
    const Eigen::MatrixXd yv_sinv =
        y * svd.matrixV().leftCols(ri) * sv.head(ri).cwiseInverse().asDiagonal();
    const Eigen::MatrixXd atilde = u.transpose() * yv_sinv;

    detail::EigResult eig = detail::eig_dense(atilde);
    std::vector<Eigen::Index> order(r);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return detail::eig_less(eig.values[a], eig.values[b]);
    });

    DmdResult out;
    out.rank_used = r;
    out.eigenvalues.resize(ri);
    Eigen::MatrixXcd w(ri, ri);
    for (Eigen::Index j = 0; j < ri; ++j) {
        out.eigenvalues[j] = eig.values[order[static_cast<std::size_t>(j)]];
        w.col(j) = eig.vectors.col(order[static_cast<std::size_t>(j)]);
    }
    Eigen::MatrixXcd modes(y.rows(), ri);
    modes.real() = yv_sinv * w.real();
    modes.imag() = yv_sinv * w.imag();
    out.modes = std::move(modes);
    return out;
}

void save_dmd(const DmdResult& result, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "kto-dmd-v1";
    j["rank_used"] = result.rank_used;
    nlohmann::json evs = nlohmann::json::array();
    for (Eigen::Index i = 0; i < result.eigenvalues.size(); ++i) {
        evs.push_back({result.eigenvalues[i].real(), result.eigenvalues[i].imag()});
    }
    j["eigenvalues"] = evs;
    std::string blob;
    blob.reserve(static_cast<std::size_t>(result.modes.size()) * 16);
    for (Eigen::Index c = 0; c < result.modes.cols(); ++c) {
        for (Eigen::Index r = 0; r < result.modes.rows(); ++r) {
            for (double v : {result.modes(r, c).real(), result.modes(r, c).imag()}) {
                const auto u = std::bit_cast<std::uint64_t>(v);
                for (int i = 0; i < 8; ++i) {
                    blob.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
                }
            }
        }
    }
    j["mode_rows"] = result.modes.rows();
    j["modes_b64"] = base64_encode(reinterpret_cast<const std::uint8_t*>(blob.data()), blob.size());
    write_file_atomic(path, j.dump(2) + "\n");
}

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::size_t out = 1;
    for (std::size_t i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

// p! / (k_1! ... k_m!) as a product of binomials, exact in 64-bit for the
// small degrees used here.
double multinomial(int p, const std::vector<int>& k) {
    std::size_t out = 1;
    std::size_t rest = static_cast<std::size_t>(p);
    for (int ki : k) {
        out *= binomial(rest, static_cast<std::size_t>(ki));
        rest -= static_cast<std::size_t>(ki);
    }
    return static_cast<double>(out);
}

// All compositions of `degree` into `vars` nonnegative parts.
void enumerate_exponents(int vars, int degree, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
    if (static_cast<int>(current.size()) == vars - 1) {
        current.push_back(degree);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int e = 0; e <= degree; ++e) {
        current.push_back(e);
        enumerate_exponents(vars, degree - e, current, out);
        current.pop_back();
    }
}

std::size_t feature_dim_of(std::size_t vars, int degree) {
    // C(vars + degree - 1, degree), computed in floating point first to
    // reject absurd sizes without overflow.
    double approx = 1.0;
    for (int i = 1; i <= degree; ++i) {
        approx *= static_cast<double>(vars - 1 + i) / i;
        if (approx > 1e15) return static_cast<std::size_t>(-1);
    }
    return binomial(vars + static_cast<std::size_t>(degree) - 1,
                    static_cast<std::size_t>(degree));
}

void require_polynomial(const KernelSpec& kernel) {
    if (kernel.kind() != KernelKind::Polynomial) {
        throw InvalidArgument("explicit feature maps exist only for the polynomial kernel");
    }
}

}  // namespace

std::size_t polynomial_feature_dim(std::size_t d, int degree, double offset) {
    const std::size_t vars = offset > 0.0 ? d + 1 : d;
    return feature_dim_of(vars, degree);
}

Eigen::MatrixXd polynomial_features(const SnapshotSet& set, const KernelSpec& kernel) {
    require_polynomial(kernel);
    const int p = kernel.degree();
    const double c = kernel.offset();
    const std::size_t d = set.dim();
    const std::size_t vars = c > 0.0 ? d + 1 : d;
    const std::size_t df = feature_dim_of(vars, p);
    if (df > 5000) {
        throw FeatureDimensionTooLarge("polynomial_features: feature dimension " +
                                       std::to_string(df) + " exceeds 5000");
    }

    std::vector<std::vector<int>> exponents;
    std::vector<int> scratch;
    enumerate_exponents(static_cast<int>(vars), p, scratch, exponents);

    std::vector<double> weights(exponents.size());
    for (std::size_t f = 0; f < exponents.size(); ++f) {
        weights[f] = std::sqrt(multinomial(p, exponents[f]));
    }

    const double sqrt_c = std::sqrt(c);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(set.count()), static_cast<Eigen::Index>(df));
    Eigen::VectorXd z(static_cast<Eigen::Index>(vars));
    for (std::size_t i = 0; i < set.count(); ++i) {
        z.head(static_cast<Eigen::Index>(d)) = set.snapshot(i);
        if (vars > d) z[static_cast<Eigen::Index>(d)] = sqrt_c;
        for (std::size_t f = 0; f < exponents.size(); ++f) {
            double v = weights[f];
            for (std::size_t a = 0; a < vars; ++a) {
                for (int e = 0; e < exponents[f][a]; ++e) v *= z[static_cast<Eigen::Index>(a)];
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = v;
        }
    }
    return out;
}

Eigen::VectorXcd covariance_eigs(const PairedDataset& data, const KernelSpec& kernel,
                                 double eps_tilde, OperatorKind kind) {
    require_polynomial(kernel);
    if (eps_tilde < 0.0) throw InvalidArgument("covariance_eigs: eps_tilde must be nonnegative");
    const double n = static_cast<double>(data.count());
    const Eigen::MatrixXd fx = polynomial_features(data.x, kernel);
    const Eigen::MatrixXd fy = polynomial_features(data.y, kernel);

    Eigen::MatrixXd cxx = fx.transpose() * fx / n;
    cxx.diagonal().array() += eps_tilde;
    const Eigen::MatrixXd cross = kind == OperatorKind::Koopman
                                      ? Eigen::MatrixXd(fx.transpose() * fy / n)
                                      : Eigen::MatrixXd(fy.transpose() * fx / n);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(cxx);
    if (!(lu.rcond() > 1e-14)) {
        throw SingularProblem("covariance_eigs: C_XX + eps_tilde*I is numerically singular");
    }
    detail::EigResult eig = detail::eig_dense(lu.solve(cross));

    std::vector<Eigen::Index> order(eig.values.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return detail::eig_less(eig.values[a], eig.values[b]);
    });
    Eigen::VectorXcd out(eig.values.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = eig.values[order[static_cast<std::size_t>(i)]];
    return out;
}

}  // namespace kto
