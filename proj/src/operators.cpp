#include "kto/operators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <vector>

#include "json.hpp"
#include "kto/base64.hpp"
#include "kto/errors.hpp"
#include "kto/io.hpp"
#include "lapack_eig.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace kto {

const char* operator_kind_name(OperatorKind kind) {
    return kind == OperatorKind::Koopman ? "koopman" : "perron_frobenius";
}

OperatorKind operator_kind_from_name(const std::string& name) {
    if (name == "koopman") return OperatorKind::Koopman;
    if (name == "perron_frobenius" || name == "pf") return OperatorKind::PerronFrobenius;
    throw InvalidArgument("unknown operator kind: " + name);
}

Eigenfunction::Eigenfunction(Eigen::VectorXcd alpha, KernelSpec kernel,
                             std::shared_ptr<const SnapshotSet> training_x,
                             std::complex<double> eigenvalue)
    : alpha_(std::move(alpha)),
      kernel_(kernel),
      training_x_(std::move(training_x)),
      eigenvalue_(eigenvalue) {
    if (!training_x_) throw InvalidArgument("Eigenfunction: null training set");
    if (static_cast<std::size_t>(alpha_.size()) != training_x_->count()) {
        throw DimensionMismatch("Eigenfunction: alpha length must equal training count");
    }
}

namespace {

// k(x, x_i) for all training points at once.
Eigen::VectorXd kernel_vector(const KernelSpec& k, const Eigen::VectorXd& x,
                              const SnapshotSet& train) {
    const auto mat = train.as_matrix();
    if (x.size() != mat.cols()) {
        throw DimensionMismatch("eigenfunction input has length " + std::to_string(x.size()) +
                                ", training snapshots have " + std::to_string(mat.cols()));
    }
    if (k.kind() == KernelKind::Gaussian) {
        Eigen::VectorXd sq = (mat.rowwise() - x.transpose()).rowwise().squaredNorm();
        return (-sq / (2.0 * k.sigma() * k.sigma())).array().exp();
    }
    Eigen::ArrayXd base = (mat * x).array() + k.offset();
    Eigen::ArrayXd out = Eigen::ArrayXd::Ones(mat.rows());
    for (int i = 0; i < k.degree(); ++i) out *= base;
    return out.matrix();
}

}  // namespace

std::complex<double> eval_eigenfunction(const Eigenfunction& ef, const Eigen::VectorXd& x) {
    const Eigen::VectorXd kv = kernel_vector(ef.kernel(), x, ef.training_x());
    return {ef.alpha().real().dot(kv), ef.alpha().imag().dot(kv)};
}

Eigen::VectorXcd grad_eigenfunction(const Eigenfunction& ef, const Eigen::VectorXd& x) {
    const KernelSpec& k = ef.kernel();
    const auto mat = ef.training_x().as_matrix();
    const Eigen::VectorXd kv = kernel_vector(k, x, ef.training_x());
    Eigen::VectorXd wr, wi;
    if (k.kind() == KernelKind::Gaussian) {
        // grad = sum_i alpha_i k_i (x_i - x) / sigma^2
        const double inv_s2 = 1.0 / (k.sigma() * k.sigma());
        wr = (ef.alpha().real().array() * kv.array()).matrix() * inv_s2;
        wi = (ef.alpha().imag().array() * kv.array()).matrix() * inv_s2;
        Eigen::VectorXd gr = mat.transpose() * wr - x * wr.sum();
        Eigen::VectorXd gi = mat.transpose() * wi - x * wi.sum();
        Eigen::VectorXcd out(x.size());
        out.real() = gr;
        out.imag() = gi;
        return out;
    }
    // grad = sum_i alpha_i p (<x,x_i>+c)^{p-1} x_i
    Eigen::ArrayXd base = (mat * x).array() + k.offset();
    Eigen::ArrayXd factor = Eigen::ArrayXd::Constant(mat.rows(), double(k.degree()));
    for (int i = 0; i + 1 < k.degree(); ++i) factor *= base;
    wr = (ef.alpha().real().array() * factor).matrix();
    wi = (ef.alpha().imag().array() * factor).matrix();
    Eigen::VectorXcd out(x.size());
    out.real() = mat.transpose() * wr;
    out.imag() = mat.transpose() * wi;
    return out;
}

EigenDecomposition::EigenDecomposition(OperatorKind kind, Eigen::VectorXcd eigenvalues,
                                       Eigen::MatrixXcd coefficients, double epsilon,
                                       KernelSpec kernel,
                                       std::shared_ptr<const SnapshotSet> training_x,
                                       std::size_t lag_steps, std::optional<double> dt)
    : kind_(kind),
      eigenvalues_(std::move(eigenvalues)),
      coefficients_(std::move(coefficients)),
      epsilon_(epsilon),
      kernel_(kernel),
      training_x_(std::move(training_x)),
      lag_steps_(lag_steps),
      dt_(dt) {
    if (!training_x_) throw InvalidArgument("EigenDecomposition: null training set");
    if (coefficients_.cols() != eigenvalues_.size()) {
        throw DimensionMismatch("EigenDecomposition: one coefficient column per eigenvalue");
    }
    if (static_cast<std::size_t>(coefficients_.rows()) != training_x_->count()) {
        throw DimensionMismatch("EigenDecomposition: coefficient rows must equal training count");
    }
}

Eigenfunction EigenDecomposition::eigenfunction(std::size_t j) const {
    if (j < 1 || j > num_eigenpairs()) {
        throw InvalidArgument("eigenfunction index " + std::to_string(j) + " out of range [1, " +
                              std::to_string(num_eigenpairs()) + "]");
    }
    return Eigenfunction(coefficients_.col(static_cast<Eigen::Index>(j - 1)), kernel_, training_x_,
                         eigenvalues_[static_cast<Eigen::Index>(j - 1)]);
}

namespace {

// (G_XX + eps I) factored once, reused for the eigenproblem matrix and the
// Perron-Frobenius coefficient solve.
class RegularizedGram {
public:
    RegularizedGram(const Eigen::MatrixXd& g_xx, double epsilon) {
        Eigen::MatrixXd a = g_xx;
        a.diagonal().array() += epsilon;
        use_llt_ = epsilon > 0.0;
        if (use_llt_) {
            llt_.compute(a);
            if (llt_.info() != Eigen::Success) use_llt_ = false;
        }
        if (!use_llt_) lu_.compute(a);
        const double rc = use_llt_ ? llt_.rcond() : lu_.rcond();
        if (!(rc > 1e-14)) {
            throw SingularProblem("fit: G_XX + epsilon*I is numerically singular "
                                  "(condition estimate > 1e14)");
        }
    }

    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
        if (use_llt_) return llt_.solve(b);
        return lu_.solve(b);
    }

    Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const {
        Eigen::VectorXcd out(b.size());
        out.real() = solve_vec(b.real());
        out.imag() = solve_vec(b.imag());
        return out;
    }

private:
    Eigen::VectorXd solve_vec(const Eigen::VectorXd& b) const {
        if (use_llt_) return llt_.solve(b);
        return lu_.solve(b);
    }

    bool use_llt_ = false;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace

EigenDecomposition fit(const PairedDataset& data, const KernelSpec& kernel, double epsilon,
                       OperatorKind kind, std::optional<std::size_t> m_opt) {
    if (epsilon < 0.0) throw InvalidArgument("fit: epsilon must be nonnegative");
    const std::size_t n = data.count();
    if (n == 0) throw InvalidArgument("fit: dataset is empty");
    const std::size_t m = m_opt.value_or(std::min<std::size_t>(10, n));
    if (m < 1 || m > n) throw InvalidArgument("fit: m must be in [1, count]");

    const GramPack gp = compute_gram_pack(kernel, data);
    const RegularizedGram reg(gp.g_xx, epsilon);
    const Eigen::MatrixXd big_m =
        reg.solve(kind == OperatorKind::Koopman ? gp.g_yx : gp.g_xy);

    detail::EigResult eig = detail::eig_dense(big_m);

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return detail::eig_less(eig.values[a], eig.values[b]);
    });

    Eigen::VectorXcd values(m);
    Eigen::MatrixXcd vectors(n, m);
    for (std::size_t j = 0; j < m; ++j) {
        values[static_cast<Eigen::Index>(j)] = eig.values[order[j]];
        vectors.col(static_cast<Eigen::Index>(j)) = eig.vectors.col(order[j]);
    }

    for (std::size_t j = 0; j < m; ++j) {
        const auto v = vectors.col(static_cast<Eigen::Index>(j));
        const double resid =
            (big_m * v - values[static_cast<Eigen::Index>(j)] * v).norm();
        if (!(resid <= 1e-6 * v.norm())) {
            throw ConvergenceFailure("fit: eigenpair " + std::to_string(j + 1) +
                                     " residual " + std::to_string(resid) + " exceeds tolerance");
        }
    }

    Eigen::MatrixXcd coeff(n, m);
    for (std::size_t j = 0; j < m; ++j) {
        const Eigen::Index c = static_cast<Eigen::Index>(j);
        coeff.col(c) = kind == OperatorKind::Koopman ? vectors.col(c)
                                                     : reg.solve(Eigen::VectorXcd(vectors.col(c)));
    }

    // Scale each column so max_i |phi(x_i)| = 1 with that entry real positive.
    Eigen::MatrixXd series_re = gp.g_xx * coeff.real();
    Eigen::MatrixXd series_im = gp.g_xx * coeff.imag();
    for (std::size_t j = 0; j < m; ++j) {
        const Eigen::Index c = static_cast<Eigen::Index>(j);
        Eigen::Index k = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
            const double mod = std::hypot(series_re(i, c), series_im(i, c));
            if (mod > best) {
                best = mod;
                k = i;
            }
        }
        const std::complex<double> pivot(series_re(k, c), series_im(k, c));
        if (std::abs(pivot) > 0.0) coeff.col(c) /= pivot;
    }

    auto train = std::make_shared<SnapshotSet>(data.x);
    return EigenDecomposition(kind, std::move(values), std::move(coeff), epsilon, kernel,
                              std::move(train), data.lag_steps, data.dt);
}

Eigen::VectorXcd eigenfunction_series(const EigenDecomposition& decomp, const SnapshotSet& traj,
                                      std::size_t j) {
    if (j < 1 || j > decomp.num_eigenpairs()) {
        throw InvalidArgument("eigenfunction index out of range");
    }
    const Eigen::MatrixXd k = gram(decomp.kernel(), traj, decomp.training_x());
    const auto col = decomp.coefficients().col(static_cast<Eigen::Index>(j - 1));
    Eigen::VectorXcd out(k.rows());
    out.real() = k * col.real();
    out.imag() = k * col.imag();
    return out;
}

Eigen::MatrixXcd eigenfunction_series_all(const EigenDecomposition& decomp,
                                          const SnapshotSet& traj) {
    const Eigen::MatrixXd k = gram(decomp.kernel(), traj, decomp.training_x());
    Eigen::MatrixXcd out(k.rows(), decomp.coefficients().cols());
    out.real() = k * decomp.coefficients().real();
    out.imag() = k * decomp.coefficients().imag();
    return out;
}

namespace {

void append_f64le(std::string& out, double v) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

double read_f64le(const std::uint8_t* p) {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

json kernel_to_json(const KernelSpec& k) {
    if (k.kind() == KernelKind::Gaussian) {
        return {{"kind", "gaussian"}, {"sigma", k.sigma()}};
    }
    return {{"kind", "polynomial"}, {"degree", k.degree()}, {"offset", k.offset()}};
}

KernelSpec kernel_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") return KernelSpec::gaussian(j.at("sigma").get<double>());
    if (kind == "polynomial") {
        return KernelSpec::polynomial(j.at("degree").get<int>(), j.at("offset").get<double>());
    }
    throw ParseError("unknown kernel kind: " + kind);
}

}  // namespace

void save_decomposition(const EigenDecomposition& decomp, const fs::path& path) {
    const std::string training_name = path.stem().string() + "_training.kto1";
    const fs::path training_path =
        path.has_parent_path() ? path.parent_path() / training_name : fs::path(training_name);
    save_kto1(decomp.training_x(), training_path);

    const Eigen::MatrixXcd& coeff = decomp.coefficients();
    std::string blob;
    blob.reserve(static_cast<std::size_t>(coeff.size()) * 16);
    for (Eigen::Index c = 0; c < coeff.cols(); ++c) {
        for (Eigen::Index r = 0; r < coeff.rows(); ++r) {
            append_f64le(blob, coeff(r, c).real());
            append_f64le(blob, coeff(r, c).imag());
        }
    }

    json j;
    j["format"] = "kto-eigendecomposition-v1";
    j["operator_kind"] = operator_kind_name(decomp.operator_kind());
    j["epsilon"] = decomp.epsilon();
    j["lag_steps"] = decomp.lag_steps();
    if (decomp.dt()) {
        j["dt"] = *decomp.dt();
    } else {
        j["dt"] = nullptr;
    }
    j["kernel"] = kernel_to_json(decomp.kernel());
    j["num_training"] = decomp.training_x().count();
    j["num_eigenpairs"] = decomp.num_eigenpairs();
    json evs = json::array();
    for (Eigen::Index i = 0; i < decomp.eigenvalues().size(); ++i) {
        evs.push_back({decomp.eigenvalues()[i].real(), decomp.eigenvalues()[i].imag()});
    }
    j["eigenvalues"] = evs;
    j["coefficients_b64"] =
        base64_encode(reinterpret_cast<const std::uint8_t*>(blob.data()), blob.size());
    j["training"] = {{"file", training_name}, {"fnv1a64", file_hash_hex(training_path)}};

    write_file_atomic(path, j.dump(2) + "\n");
}

EigenDecomposition load_decomposition(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure(path.string() + ": cannot open for reading");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "kto-eigendecomposition-v1") {
            throw ParseError(path.string() + ": unknown format tag");
        }
        const fs::path training_path =
            (path.has_parent_path() ? path.parent_path() : fs::path(".")) /
            j.at("training").at("file").get<std::string>();
        const std::string want_hash = j.at("training").at("fnv1a64").get<std::string>();
        if (file_hash_hex(training_path) != want_hash) {
            throw ParseError(training_path.string() + ": training data hash mismatch");
        }
        auto train = std::make_shared<SnapshotSet>(load_kto1(training_path));

        const std::size_t n = j.at("num_training").get<std::size_t>();
        const std::size_t m = j.at("num_eigenpairs").get<std::size_t>();
        if (train->count() != n) throw ParseError(path.string() + ": training count mismatch");

        Eigen::VectorXcd values(static_cast<Eigen::Index>(m));
        const json& evs = j.at("eigenvalues");
        if (evs.size() != m) throw ParseError(path.string() + ": eigenvalue count mismatch");
        for (std::size_t i = 0; i < m; ++i) {
            values[static_cast<Eigen::Index>(i)] = {evs[i][0].get<double>(),
                                                    evs[i][1].get<double>()};
        }

        const std::vector<std::uint8_t> blob =
            base64_decode(j.at("coefficients_b64").get<std::string>());
        if (blob.size() != n * m * 16) throw ParseError(path.string() + ": coefficient blob size");
        Eigen::MatrixXcd coeff(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
        const std::uint8_t* p = blob.data();
        for (Eigen::Index c = 0; c < coeff.cols(); ++c) {
            for (Eigen::Index r = 0; r < coeff.rows(); ++r) {
                const double re = read_f64le(p);
                const double im = read_f64le(p + 8);
                coeff(r, c) = {re, im};
                p += 16;
            }
        }

        std::optional<double> dt;
        if (!j.at("dt").is_null()) dt = j.at("dt").get<double>();

        return EigenDecomposition(operator_kind_from_name(j.at("operator_kind").get<std::string>()),
                                  std::move(values), std::move(coeff),
                                  j.at("epsilon").get<double>(), kernel_from_json(j.at("kernel")),
                                  std::move(train), j.at("lag_steps").get<std::size_t>(), dt);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace kto
