#include <cmath>
#include <complex>
#include <fstream>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "helpers.hpp"
#include "kto/errors.hpp"
#include "kto/io.hpp"
#include "kto/operators.hpp"
#include "kto/rng.hpp"

using namespace kto;
using testutil::TempDir;

namespace {

SnapshotSet random_states(std::uint64_t seed, std::size_t count, std::size_t dim) {
    Rng rng(seed);
    std::vector<double> data(count * dim);
    for (double& v : data) v = rng.normal();
    return SnapshotSet({dim}, count, std::move(data));
}

PairedDataset random_pairs(std::uint64_t seed, std::size_t count, std::size_t dim) {
    return {random_states(seed, count, dim), random_states(seed + 1, count, dim), 1, std::nullopt};
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

}  // namespace

TEST_CASE("operator kind names round trip") {
    CHECK(operator_kind_from_name(operator_kind_name(OperatorKind::Koopman)) ==
          OperatorKind::Koopman);
    CHECK(operator_kind_from_name("pf") == OperatorKind::PerronFrobenius);
    CHECK_THROWS_AS(operator_kind_from_name("galerkin"), InvalidArgument);
}

TEST_CASE("single-pair fit reduces to one kernel evaluation") {
    const PairedDataset data{SnapshotSet({1}, 1, {0.0}), SnapshotSet({1}, 1, {1.0}), 1,
                             std::nullopt};
    const KernelSpec k = KernelSpec::gaussian(1.0);
    for (OperatorKind kind : {OperatorKind::Koopman, OperatorKind::PerronFrobenius}) {
        const EigenDecomposition d = fit(data, k, 0.0, kind);
        REQUIRE(d.num_eigenpairs() == 1);
        CHECK(std::abs(d.eigenvalues()[0] - std::exp(-0.5)) < 1e-14);
        CHECK(std::abs(d.coefficients()(0, 0) - 1.0) < 1e-14);
    }
}

TEST_CASE("fixed-point data gives the identity spectrum") {
    const SnapshotSet x({1}, 5, {0.0, 2.0, 4.0, 6.0, 8.0});
    const PairedDataset data{x, x, 1, std::nullopt};
    for (OperatorKind kind : {OperatorKind::Koopman, OperatorKind::PerronFrobenius}) {
        const EigenDecomposition d = fit(data, KernelSpec::gaussian(0.5), 0.0, kind, 5);
        for (Eigen::Index i = 0; i < 5; ++i) {
            CHECK(std::abs(d.eigenvalues()[i] - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("linear map with a linear kernel recovers the slope") {
    // y = 0.5 x with k(x, x') = <x, x'>: the Gram path sees one nonzero
    // eigenvalue 0.5 |x|^2 / (|x|^2 + eps).
    const SnapshotSet x({1}, 3, {1.0, -2.0, 3.0});
    const SnapshotSet y({1}, 3, {0.5, -1.0, 1.5});
    const PairedDataset data{x, y, 1, std::nullopt};
    const double eps = 1e-6;
    const EigenDecomposition d = fit(data, KernelSpec::polynomial(1, 0.0), eps,
                                     OperatorKind::Koopman, 3);
    const double expected = 0.5 * 14.0 / (14.0 + eps);
    CHECK(std::abs(d.eigenvalues()[0] - expected) < 1e-12);
    // The epsilon-scaled inverse amplifies round-off in the defective part.
    CHECK(std::abs(d.eigenvalues()[1]) < 1e-8);
    CHECK(std::abs(d.eigenvalues()[2]) < 1e-8);
}

TEST_CASE("eigenfunction evaluation matches the explicit sum") {
    const PairedDataset data = random_pairs(31, 30, 2);
    Rng rng(32);
    for (const KernelSpec& k : {KernelSpec::gaussian(1.5), KernelSpec::polynomial(3, 1.0)}) {
        const EigenDecomposition d = fit(data, k, 0.1, OperatorKind::Koopman, 5);
        for (std::size_t j = 1; j <= 5; ++j) {
            const Eigenfunction ef = d.eigenfunction(j);
            CHECK(ef.eigenvalue() == d.eigenvalues()[Eigen::Index(j - 1)]);
            for (int t = 0; t < 3; ++t) {
                Eigen::VectorXd pt(2);
                pt << rng.normal(), rng.normal();
                std::complex<double> direct = 0.0;
                for (std::size_t i = 0; i < 30; ++i) {
                    direct += ef.alpha()[Eigen::Index(i)] *
                              kernel_eval(k, pt, data.x.snapshot(i));
                }
                const std::complex<double> got = eval_eigenfunction(ef, pt);
                CHECK(std::abs(got - direct) < 1e-13 * std::max(1.0, std::abs(direct)));
            }
        }
    }
}

TEST_CASE("eigenfunction gradient matches central differences") {
    const PairedDataset data = random_pairs(33, 25, 3);
    Rng rng(34);
    for (const KernelSpec& k : {KernelSpec::gaussian(1.2), KernelSpec::polynomial(2, 0.5)}) {
        const EigenDecomposition d = fit(data, k, 0.1, OperatorKind::PerronFrobenius, 4);
        const Eigenfunction ef = d.eigenfunction(2);
        Eigen::VectorXd pt(3);
        pt << rng.normal(), rng.normal(), rng.normal();
        const Eigen::VectorXcd g = grad_eigenfunction(ef, pt);
        const double h = 1e-5;
        for (int c = 0; c < 3; ++c) {
            Eigen::VectorXd lo = pt, hi = pt;
            lo[c] -= h;
            hi[c] += h;
            const std::complex<double> fd =
                (eval_eigenfunction(ef, hi) - eval_eigenfunction(ef, lo)) / (2.0 * h);
            CHECK(std::abs(g[c] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("series on the training data equals G_XX times the coefficients") {
    const PairedDataset data = random_pairs(35, 20, 2);
    const KernelSpec k = KernelSpec::gaussian(1.0);
    const EigenDecomposition d = fit(data, k, 0.1, OperatorKind::Koopman, 6);
    const Eigen::MatrixXd g = gram(k, data.x, data.x);
    const Eigen::MatrixXcd series = eigenfunction_series_all(d, data.x);
    Eigen::MatrixXcd expect(20, 6);
    expect.real() = g * d.coefficients().real();
    expect.imag() = g * d.coefficients().imag();
    CHECK((series - expect).norm() < 1e-10);

    for (Eigen::Index c = 0; c < series.cols(); ++c) {
        // Normalization: max modulus 1, attained at a real positive entry.
        double best = 0.0;
        Eigen::Index at = 0;
        for (Eigen::Index i = 0; i < series.rows(); ++i) {
            if (std::abs(series(i, c)) > best) {
                best = std::abs(series(i, c));
                at = i;
            }
        }
        CHECK(best == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(series(at, c).imag()) < 1e-10);
        CHECK(series(at, c).real() > 0.0);

        const Eigen::VectorXcd one = eigenfunction_series(d, data.x, std::size_t(c) + 1);
        CHECK((one - series.col(c)).norm() < 1e-12);
    }
}

TEST_CASE("a constant trajectory gives a constant series") {
    const PairedDataset data = random_pairs(36, 15, 2);
    const EigenDecomposition d =
        fit(data, KernelSpec::gaussian(1.0), 0.1, OperatorKind::Koopman, 3);
    std::vector<double> rep;
    for (int i = 0; i < 4; ++i) {
        rep.push_back(0.3);
        rep.push_back(-0.7);
    }
    const SnapshotSet traj({2}, 4, rep);
    const Eigen::VectorXcd s = eigenfunction_series(d, traj, 2);
    for (Eigen::Index i = 1; i < s.size(); ++i) CHECK(std::abs(s[i] - s[0]) < 1e-14);
}

TEST_CASE("fitted pairs satisfy the generalized eigenproblem") {
    const PairedDataset data = random_pairs(37, 40, 3);
    const KernelSpec k = KernelSpec::gaussian(1.4);
    const double eps = 0.1;
    const GramPack gp = compute_gram_pack(k, data);
    Eigen::MatrixXd a = gp.g_xx;
    a.diagonal().array() += eps;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);

    SUBCASE("koopman") {
        const EigenDecomposition d = fit(data, k, eps, OperatorKind::Koopman, 10);
        const Eigen::MatrixXd big_m = lu.solve(gp.g_yx);
        for (Eigen::Index j = 0; j < 10; ++j) {
            const Eigen::VectorXcd alpha = d.coefficients().col(j);
            Eigen::VectorXcd ma(alpha.size());
            ma.real() = big_m * alpha.real();
            ma.imag() = big_m * alpha.imag();
            CHECK((ma - d.eigenvalues()[j] * alpha).norm() < 1e-8 * alpha.norm());
        }
    }
    SUBCASE("perron-frobenius") {
        const EigenDecomposition d = fit(data, k, eps, OperatorKind::PerronFrobenius, 10);
        const Eigen::MatrixXd big_m = lu.solve(gp.g_xy);
        for (Eigen::Index j = 0; j < 10; ++j) {
            const Eigen::VectorXcd alpha = d.coefficients().col(j);
            Eigen::VectorXcd v(alpha.size());
            v.real() = a * alpha.real();
            v.imag() = a * alpha.imag();
            Eigen::VectorXcd mv(v.size());
            mv.real() = big_m * v.real();
            mv.imag() = big_m * v.imag();
            CHECK((mv - d.eigenvalues()[j] * v).norm() < 1e-8 * v.norm());
        }
    }
}

TEST_CASE("eigenvalues are sorted and conjugate-paired") {
    const PairedDataset data = random_pairs(38, 12, 2);
    const EigenDecomposition d =
        fit(data, KernelSpec::gaussian(1.0), 0.05, OperatorKind::Koopman, 12);
    const auto& ev = d.eigenvalues();
    for (Eigen::Index i = 0; i + 1 < ev.size(); ++i) {
        const bool sorted = ev[i].real() > ev[i + 1].real() ||
                            (ev[i].real() == ev[i + 1].real() &&
                             ev[i].imag() >= ev[i + 1].imag());
        CHECK(sorted);
    }
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i].imag()) < 1e-12) continue;
        bool found = false;
        for (Eigen::Index j = 0; j < ev.size(); ++j) {
            if (std::abs(ev[j] - std::conj(ev[i])) < 1e-10) found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("stronger regularization shrinks the leading eigenvalue") {
    const SnapshotSet x({1}, 5, {0.0, 2.0, 4.0, 6.0, 8.0});
    const PairedDataset data{x, x, 1, std::nullopt};
    double prev = 2.0;
    for (double eps : {0.0, 0.1, 1.0, 10.0}) {
        const EigenDecomposition d =
            fit(data, KernelSpec::gaussian(0.5), eps, OperatorKind::Koopman, 1);
        const double mag = std::abs(d.eigenvalues()[0]);
        CHECK(mag < prev);
        prev = mag;
    }
}

TEST_CASE("duplicate snapshots without regularization are rejected") {
    const SnapshotSet x({1}, 4, {1.0, 1.0, 2.0, 3.0});
    const PairedDataset data{x, x, 1, std::nullopt};
    CHECK_THROWS_AS(fit(data, KernelSpec::gaussian(1.0), 0.0, OperatorKind::Koopman),
                    SingularProblem);
}

TEST_CASE("fit validates its arguments") {
    const PairedDataset data = random_pairs(39, 6, 2);
    CHECK_THROWS_AS(fit(data, KernelSpec::gaussian(1.0), -0.5, OperatorKind::Koopman),
                    InvalidArgument);
    CHECK_THROWS_AS(fit(data, KernelSpec::gaussian(1.0), 0.1, OperatorKind::Koopman, 7),
                    InvalidArgument);
    CHECK_THROWS_AS(fit(data, KernelSpec::gaussian(1.0), 0.1, OperatorKind::Koopman, 0),
                    InvalidArgument);
    const EigenDecomposition d = fit(data, KernelSpec::gaussian(1.0), 0.1, OperatorKind::Koopman);
    CHECK(d.num_eigenpairs() == 6);
    CHECK_THROWS_AS(d.eigenfunction(0), InvalidArgument);
    CHECK_THROWS_AS(d.eigenfunction(7), InvalidArgument);
    CHECK_THROWS_AS(eigenfunction_series(d, data.x, 0), InvalidArgument);
}

TEST_CASE("decomposition serialization round-trips bit-exactly") {
    TempDir tmp;
    Rng rng(40);
    std::vector<double> traj(20 * 2);
    for (double& v : traj) v = rng.normal();
    const SnapshotSet states({2}, 20, traj, 0.5);
    const PairedDataset data = from_trajectory(states, 4);
    const EigenDecomposition d =
        fit(data, KernelSpec::gaussian(1.2), 0.05, OperatorKind::PerronFrobenius, 4);
    CHECK(d.lag_time() == 2.0);

    std::filesystem::create_directories(tmp / "a");
    std::filesystem::create_directories(tmp / "b");
    save_decomposition(d, tmp / "a" / "dec.json");
    CHECK(std::filesystem::exists(tmp / "a" / "dec_training.kto1"));

    const EigenDecomposition l = load_decomposition(tmp / "a" / "dec.json");
    CHECK(l.operator_kind() == d.operator_kind());
    CHECK(l.epsilon() == d.epsilon());
    CHECK(l.lag_steps() == d.lag_steps());
    CHECK(l.dt() == d.dt());
    CHECK(l.kernel().kind() == d.kernel().kind());
    CHECK(l.kernel().sigma() == d.kernel().sigma());
    CHECK((l.eigenvalues() - d.eigenvalues()).norm() == 0.0);
    CHECK((l.coefficients() - d.coefficients()).norm() == 0.0);
    CHECK(l.training_x().data() == d.training_x().data());

    save_decomposition(l, tmp / "b" / "dec.json");
    CHECK(file_hash_hex(tmp / "a" / "dec.json") == file_hash_hex(tmp / "b" / "dec.json"));
    CHECK(file_hash_hex(tmp / "a" / "dec_training.kto1") ==
          file_hash_hex(tmp / "b" / "dec_training.kto1"));
}

TEST_CASE("tampered training data is detected on load") {
    TempDir tmp;
    const PairedDataset data = random_pairs(41, 8, 2);
    const EigenDecomposition d =
        fit(data, KernelSpec::gaussian(1.0), 0.1, OperatorKind::Koopman, 2);
    save_decomposition(d, tmp / "dec.json");
    std::string bytes = read_bytes(tmp / "dec_training.kto1");
    bytes[bytes.size() - 3] = char(bytes[bytes.size() - 3] ^ 0x1);
    write_bytes(tmp / "dec_training.kto1", bytes);
    CHECK_THROWS_AS(load_decomposition(tmp / "dec.json"), ParseError);
}

TEST_CASE("decomposition loader rejects foreign files") {
    TempDir tmp;
    write_bytes(tmp / "tag.json", "{\"format\": \"something-else\"}");
    CHECK_THROWS_AS(load_decomposition(tmp / "tag.json"), ParseError);
    write_bytes(tmp / "garbage.json", "not json at all");
    CHECK_THROWS_AS(load_decomposition(tmp / "garbage.json"), ParseError);
}
