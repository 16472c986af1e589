#include "kto/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kto/errors.hpp"
#include "kto/rng.hpp"

namespace kto {

KernelSpec KernelSpec::gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("gaussian kernel: sigma must be positive and finite");
    }
    return KernelSpec(KernelKind::Gaussian, sigma, 0, 0.0);
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
    if (degree < 1) throw InvalidArgument("polynomial kernel: degree must be >= 1");
    if (!(offset >= 0.0) || !std::isfinite(offset)) {
        throw InvalidArgument("polynomial kernel: offset must be >= 0 and finite");
    }
    return KernelSpec(KernelKind::Polynomial, 0.0, degree, offset);
}

namespace {

void check_same_length(Eigen::Index a, Eigen::Index b, const char* where) {
    if (a != b) {
        throw DimensionMismatch(std::string(where) + ": vector lengths " + std::to_string(a) +
                                " and " + std::to_string(b) + " differ");
    }
}

double ipow(double base, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= base;
    return r;
}

}  // namespace

double kernel_eval(const KernelSpec& k, Eigen::Ref<const Eigen::VectorXd> x,
                   Eigen::Ref<const Eigen::VectorXd> x2) {
    check_same_length(x.size(), x2.size(), "kernel_eval");
    switch (k.kind()) {
        case KernelKind::Gaussian: {
            const double sq = (x - x2).squaredNorm();
            return std::exp(-sq / (2.0 * k.sigma() * k.sigma()));
        }
        case KernelKind::Polynomial:
            return ipow(x.dot(x2) + k.offset(), k.degree());
    }
    throw InvalidArgument("kernel_eval: unknown kernel kind");
}

Eigen::VectorXd kernel_grad(const KernelSpec& k, Eigen::Ref<const Eigen::VectorXd> x,
                            Eigen::Ref<const Eigen::VectorXd> xi) {
    check_same_length(x.size(), xi.size(), "kernel_grad");
    switch (k.kind()) {
        case KernelKind::Gaussian: {
            const double kxxi = kernel_eval(k, x, xi);
            return (-kxxi / (k.sigma() * k.sigma())) * (x - xi);
        }
        case KernelKind::Polynomial: {
            const double base = x.dot(xi) + k.offset();
            return static_cast<double>(k.degree()) * ipow(base, k.degree() - 1) * xi;
        }
    }
    throw InvalidArgument("kernel_grad: unknown kernel kind");
}

Eigen::MatrixXd gram(const KernelSpec& k, const SnapshotSet& a, const SnapshotSet& b) {
    if (!a.same_layout(b)) throw ShapeMismatch("gram: snapshot sets have different shapes");
    const auto am = a.as_matrix();
    const auto bm = b.as_matrix();
    Eigen::MatrixXd prod = am * bm.transpose();  // <a_i, b_j>
    switch (k.kind()) {
        case KernelKind::Gaussian: {
            const Eigen::VectorXd sa = am.rowwise().squaredNorm();
            const Eigen::VectorXd sb = bm.rowwise().squaredNorm();
            Eigen::MatrixXd sq = (-2.0 * prod).colwise() + sa;
            sq.rowwise() += sb.transpose();
            sq = sq.cwiseMax(0.0);
            return (-sq / (2.0 * k.sigma() * k.sigma())).array().exp();
        }
        case KernelKind::Polynomial: {
            const int p = k.degree();
            Eigen::ArrayXXd base = prod.array() + k.offset();
            Eigen::ArrayXXd out = Eigen::ArrayXXd::Ones(base.rows(), base.cols());
            for (int i = 0; i < p; ++i) out *= base;
            return out.matrix();
        }
    }
    throw InvalidArgument("gram: unknown kernel kind");
}

GramPack compute_gram_pack(const KernelSpec& k, const PairedDataset& data) {
    GramPack pack;
    pack.g_xx = gram(k, data.x, data.x);
    pack.g_xy = gram(k, data.x, data.y);
    pack.g_yx = pack.g_xy.transpose();
    return pack;
}

double median_pairwise_distance(const SnapshotSet& a, std::size_t max_samples,
                                std::uint64_t seed) {
    if (a.count() < 2) throw InvalidArgument("median_pairwise_distance: need >= 2 snapshots");
    std::vector<std::size_t> idx(a.count());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (a.count() > max_samples) {
        Rng rng(seed);
        // Fisher-Yates prefix shuffle, then keep the first max_samples.
        for (std::size_t i = 0; i < max_samples; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(max_samples);
        std::sort(idx.begin(), idx.end());
    }
    std::vector<double> dists;
    dists.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            dists.push_back((a.snapshot(idx[i]) - a.snapshot(idx[j])).norm());
        }
    }
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
    return dists[mid];
}

}  // namespace kto
