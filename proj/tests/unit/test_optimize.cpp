#include <cmath>
#include <complex>
#include <memory>
#include <set>
#include <vector>

#include "doctest.h"
#include "kto/errors.hpp"
#include "kto/optimize.hpp"
#include "kto/rng.hpp"
#include "kto/synth.hpp"

using namespace kto;

namespace {

// phi(x) = exp(-|x|^2 / 2): a single Gaussian bump centered at the origin.
Eigenfunction bump2d() {
    auto train = std::make_shared<SnapshotSet>(std::vector<std::size_t>{2}, 1,
                                               std::vector<double>{0.0, 0.0});
    Eigen::VectorXcd alpha(1);
    alpha << 1.0;
    return Eigenfunction(alpha, KernelSpec::gaussian(1.0), train, 1.0);
}

Eigenfunction zero2d() {
    auto train = std::make_shared<SnapshotSet>(std::vector<std::size_t>{2}, 3,
                                               std::vector<double>{0, 0, 1, 0, 0, 1});
    return Eigenfunction(Eigen::VectorXcd::Zero(3), KernelSpec::gaussian(1.0), train, 0.5);
}

}  // namespace

TEST_CASE("a zero eigenfunction terminates immediately") {
    Eigen::VectorXd x0(2);
    x0 << 0.3, -0.4;
    const OptimizationResult r = optimize(zero2d(), x0, Direction::Maximize);
    CHECK(r.iterations == 0);
    CHECK(r.converged);
    CHECK(r.value == 0.0);
    CHECK(r.x_star == x0);
    CHECK(r.trace.size() == 1);
    CHECK(r.trace[0].iteration == 0);
}

TEST_CASE("gradient ascent climbs the bump") {
    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.5;
    const OptimizationResult r = optimize(bump2d(), x0, Direction::Maximize);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.value <= 1.0 + 1e-12);
    CHECK(r.x_star.norm() < 1e-2);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        CHECK(r.trace[k].value > r.trace[k - 1].value);
        CHECK(r.trace[k].iteration == k);
    }
    CHECK(r.trace.size() == r.iterations + 1);
}

TEST_CASE("the final iterate is stationary at the working step size") {
    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.5;
    const OptimizationResult r = optimize(bump2d(), x0, Direction::Maximize);
    REQUIRE(r.converged);
    // Defaults without bounds: eta0 = 0.1, eta_min = 1e-9, tol = 1e-10 |phi(x0)|.
    const double tol = 1e-10 * std::exp(-0.25);
    const double grad_norm = grad_eigenfunction(bump2d(), r.x_star).real().norm();
    CHECK(grad_norm * 1e-9 <= 10.0 * tol);
}

TEST_CASE("descent within bounds stops at the box corner") {
    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.5;
    OptimizeConfig cfg;
    cfg.bounds = Bounds{-2.0, 2.0};
    const OptimizationResult r = optimize(bump2d(), x0, Direction::Minimize, cfg);
    CHECK(r.converged);
    CHECK(r.x_star[0] == 2.0);
    CHECK(r.x_star[1] == 2.0);
    CHECK(r.value == doctest::Approx(std::exp(-4.0)));
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        CHECK(r.trace[k].value < r.trace[k - 1].value);
    }
}

TEST_CASE("iteration budget reports non-convergence") {
    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.5;
    OptimizeConfig cfg;
    cfg.eta0 = 1e-3;
    cfg.eta_min = 1e-12;
    cfg.tol = 0.0;
    cfg.max_iters = 3;
    const OptimizationResult r = optimize(bump2d(), x0, Direction::Maximize, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.trace.size() == 4);
}

TEST_CASE("optimize validates its inputs") {
    Eigen::VectorXd x0(2);
    x0 << 0.0, 0.0;
    Eigen::VectorXd wrong(3);
    wrong.setZero();
    CHECK_THROWS_AS(optimize(bump2d(), wrong, Direction::Maximize), DimensionMismatch);

    OptimizeConfig bad;
    bad.bounds = Bounds{1.0, -1.0};
    CHECK_THROWS_AS(optimize(bump2d(), x0, Direction::Maximize, bad), InvalidArgument);

    OptimizeConfig outside;
    outside.bounds = Bounds{1.0, 2.0};
    CHECK_THROWS_AS(optimize(bump2d(), x0, Direction::Maximize, outside), InvalidArgument);

    OptimizeConfig shrink_bad;
    shrink_bad.shrink = 1.0;
    CHECK_THROWS_AS(optimize(bump2d(), x0, Direction::Maximize, shrink_bad), InvalidArgument);

    OptimizeConfig grow_bad;
    grow_bad.grow = 0.9;
    CHECK_THROWS_AS(optimize(bump2d(), x0, Direction::Maximize, grow_bad), InvalidArgument);

    OptimizeConfig iters_bad;
    iters_bad.max_iters = 0;
    CHECK_THROWS_AS(optimize(bump2d(), x0, Direction::Maximize, iters_bad), InvalidArgument);

    OptimizeConfig eta_bad;
    eta_bad.eta0 = 1e-12;
    eta_bad.eta_min = 1e-3;
    CHECK_THROWS_AS(optimize(bump2d(), x0, Direction::Maximize, eta_bad), InvalidArgument);
}

TEST_CASE("an overflowing objective raises NonFiniteObjective") {
    auto train = std::make_shared<SnapshotSet>(std::vector<std::size_t>{1}, 1,
                                               std::vector<double>{1.0});
    Eigen::VectorXcd alpha(1);
    alpha << 1.0;
    const Eigenfunction ef(alpha, KernelSpec::polynomial(3, 0.0), train, 1.0);
    Eigen::VectorXd x0(1);
    x0 << 1e200;
    CHECK_THROWS_AS(optimize(ef, x0, Direction::Maximize), NonFiniteObjective);
}

TEST_CASE("optimize is deterministic") {
    Eigen::VectorXd x0(2);
    x0 << 0.4, -0.9;
    const OptimizationResult a = optimize(bump2d(), x0, Direction::Maximize);
    const OptimizationResult b = optimize(bump2d(), x0, Direction::Maximize);
    CHECK(a.x_star == b.x_star);
    CHECK(a.value == b.value);
    CHECK(a.trace.size() == b.trace.size());
}

TEST_CASE("summarize_all brackets the observed series") {
    Rng rng(51);
    std::vector<double> xs(40), ys(40);
    for (std::size_t i = 0; i < 40; ++i) {
        xs[i] = rng.normal();
        ys[i] = 0.8 * xs[i] + 0.1 * rng.normal();
    }
    const PairedDataset data{SnapshotSet({1}, 40, xs), SnapshotSet({1}, 40, ys), 1, std::nullopt};
    const EigenDecomposition d =
        fit(data, KernelSpec::gaussian(1.0), 0.1, OperatorKind::Koopman, 3);

    CHECK(summarize_all(d, {}).empty());

    OptimizeConfig cfg;
    cfg.bounds = Bounds{-5.0, 5.0};
    const auto pairs = summarize_all(d, {1, 2}, StartPolicy::BestObserved, cfg);
    REQUIRE(pairs.size() == 2);
    for (std::size_t p = 0; p < 2; ++p) {
        CHECK(pairs[p].index == p + 1);
        const Eigen::VectorXcd series = eigenfunction_series(d, d.training_x(), p + 1);
        const double lo = series.real().minCoeff();
        const double hi = series.real().maxCoeff();
        CHECK(pairs[p].min_result.value <= lo + 1e-9);
        CHECK(pairs[p].max_result.value >= hi - 1e-9);
        CHECK(pairs[p].min_result.value <= pairs[p].max_result.value);
        CHECK(pairs[p].min_result.direction == Direction::Minimize);
        CHECK(pairs[p].max_result.direction == Direction::Maximize);
    }

    const auto from_mean = summarize_all(d, {1}, StartPolicy::MeanSnapshot, cfg);
    REQUIRE(from_mean.size() == 1);
    CHECK(from_mean[0].min_result.trace[0].value ==
          from_mean[0].max_result.trace[0].value);
}

TEST_CASE("pendulum summaries reach both turning points") {
    const PendulumConfig pc;
    const SnapshotSet frames = render_pendulum(pc);
    const PairedDataset data = from_trajectory(frames, 1);
    const EigenDecomposition dec =
        fit(data, KernelSpec::gaussian(1.25e4), 1.0, OperatorKind::PerronFrobenius, 4);

    OptimizeConfig cfg;
    cfg.bounds = Bounds{0.0, 255.0};
    cfg.max_iters = 500;
    const auto sums = summarize_all(dec, {2}, StartPolicy::BestObserved, cfg);
    REQUIRE(sums.size() == 1);

    // Horizontal centroid of the bright blob (pixels above half peak).
    const auto blob_x = [&](const Eigen::VectorXd& frame) {
        const double cut = 0.5 * frame.maxCoeff();
        double mass = 0.0, moment = 0.0;
        for (std::size_t r = 0; r < pc.height; ++r)
            for (std::size_t c = 0; c < pc.width; ++c) {
                const double v = frame[static_cast<Eigen::Index>(r * pc.width + c)];
                if (v <= cut) continue;
                mass += v;
                moment += v * static_cast<double>(c);
            }
        return moment / mass;
    };

    const double center = 0.5 * static_cast<double>(pc.width - 1);
    const double d_min = blob_x(sums[0].min_result.x_star) - center;
    const double d_max = blob_x(sums[0].max_result.x_star) - center;
    CHECK(d_min * d_max < 0.0);
    CHECK(std::abs(std::abs(d_min) - pc.amplitude_px) < 0.05 * pc.amplitude_px);
    CHECK(std::abs(std::abs(d_max) - pc.amplitude_px) < 0.05 * pc.amplitude_px);
}

TEST_CASE("triple-well summaries cover three basins") {
    const SdeConfig cfg;
    const SimResult sim = simulate(cfg);
    const PairedDataset data = from_trajectory(sim.trajectory, 100, 10);
    const EigenDecomposition dec =
        fit(data, KernelSpec::gaussian(1.0), 0.1, OperatorKind::Koopman, 6);

    OptimizeConfig ocfg;
    ocfg.bounds = Bounds{-2.0, 2.0};
    ocfg.max_iters = 500;
    const auto sums = summarize_all(dec, {2, 3}, StartPolicy::BestObserved, ocfg);
    REQUIRE(sums.size() == 2);

    const CriticalPoints cp = critical_points(cfg.potential);
    REQUIRE(cp.maxima.size() == 2);
    std::set<int> basins;
    for (const SummaryPair& p : sums)
        for (const OptimizationResult* r : {&p.min_result, &p.max_result}) {
            int b = 0;
            for (double m : cp.maxima)
                if (r->x_star[0] > m) ++b;
            basins.insert(b);
        }
    CHECK(basins.size() >= 3);
}
