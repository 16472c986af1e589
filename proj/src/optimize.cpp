#include "kto/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "kto/errors.hpp"

namespace kto {

namespace {

struct Resolved {
    double eta0, eta_min, tol;
};

Resolved resolve(const OptimizeConfig& cfg, double phi0_abs) {
    if (cfg.bounds && !(cfg.bounds->lo <= cfg.bounds->hi)) {
        throw InvalidArgument("optimize: bounds lo must not exceed hi");
    }
    Resolved r;
    r.eta0 = cfg.eta0.value_or(0.1 * (cfg.bounds ? cfg.bounds->hi - cfg.bounds->lo : 1.0));
    r.eta_min = cfg.eta_min.value_or(1e-8 * r.eta0);
    r.tol = cfg.tol.value_or(1e-10 * phi0_abs);
    if (!(r.eta_min > 0.0) || !(r.eta0 >= r.eta_min)) {
        throw InvalidArgument("optimize: need eta0 >= eta_min > 0");
    }
    if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0)) {
        throw InvalidArgument("optimize: shrink must be in (0, 1)");
    }
    if (!(cfg.grow >= 1.0)) throw InvalidArgument("optimize: grow must be >= 1");
    if (cfg.max_iters < 1) throw InvalidArgument("optimize: max_iters must be >= 1");
    if (!(r.tol >= 0.0)) throw InvalidArgument("optimize: tol must be nonnegative");
    return r;
}

void clamp_into(Eigen::VectorXd& x, const std::optional<Bounds>& b) {
    if (!b) return;
    x = x.cwiseMax(b->lo).cwiseMin(b->hi);
}

}  // namespace

OptimizationResult optimize(const Eigenfunction& ef, const Eigen::VectorXd& x0,
                            Direction direction, const OptimizeConfig& cfg) {
    if (static_cast<std::size_t>(x0.size()) != ef.training_x().dim()) {
        throw DimensionMismatch("optimize: x0 length must match the training snapshot size");
    }
    if (cfg.bounds && ((x0.array() < cfg.bounds->lo).any() || (x0.array() > cfg.bounds->hi).any())) {
        throw InvalidArgument("optimize: x0 violates the bounds");
    }

    auto evaluate = [&](const Eigen::VectorXd& x) {
        const std::complex<double> phi = eval_eigenfunction(ef, x);
        if (!std::isfinite(phi.real()) || !std::isfinite(phi.imag())) {
            throw NonFiniteObjective("optimize: phi evaluated non-finite");
        }
        return phi;
    };

    const double sign = direction == Direction::Maximize ? 1.0 : -1.0;
    Eigen::VectorXd x = x0;
    std::complex<double> phi = evaluate(x);
    const Resolved res = resolve(cfg, std::abs(phi));
    const double eta_cap = 10.0 * res.eta0;

    OptimizationResult out;
    out.direction = direction;
    out.converged = false;
    out.iterations = 0;
    double eta = res.eta0;
    out.trace.push_back({0, phi.real(), eta, std::abs(phi.imag())});

    auto gradient = [&](const Eigen::VectorXd& at) {
        Eigen::VectorXcd g = grad_eigenfunction(ef, at);
        if (!g.allFinite()) throw NonFiniteObjective("optimize: gradient evaluated non-finite");
        return g;
    };

    Eigen::VectorXd step_dir = gradient(x).real();
    while (out.iterations < cfg.max_iters) {
        Eigen::VectorXd candidate = x + (sign * eta) * step_dir;
        clamp_into(candidate, cfg.bounds);
        const std::complex<double> phi_new = evaluate(candidate);
        const double improvement = sign * (phi_new.real() - phi.real());
        if (improvement > res.tol) {
            x = std::move(candidate);
            phi = phi_new;
            step_dir = gradient(x).real();
            ++out.iterations;
            eta = std::min(eta * cfg.grow, eta_cap);
            out.trace.push_back({out.iterations, phi.real(), eta, std::abs(phi.imag())});
        } else {
            eta *= cfg.shrink;
            if (eta < res.eta_min) {
                out.converged = true;
                break;
            }
        }
    }

    out.x_star = std::move(x);
    out.value = phi.real();
    return out;
}

std::vector<SummaryPair> summarize_all(const EigenDecomposition& decomp,
                                       const std::vector<std::size_t>& indices,
                                       StartPolicy starts, const OptimizeConfig& cfg) {
    std::vector<SummaryPair> out;
    out.reserve(indices.size());
    const SnapshotSet& train = decomp.training_x();
    for (std::size_t j : indices) {
        const Eigenfunction ef = decomp.eigenfunction(j);
        Eigen::VectorXd start_min, start_max;
        if (starts == StartPolicy::MeanSnapshot) {
            start_min = start_max = train.mean_snapshot();
        } else {
            const Eigen::VectorXcd series = eigenfunction_series(decomp, train, j);
            Eigen::Index imin = 0, imax = 0;
            series.real().minCoeff(&imin);
            series.real().maxCoeff(&imax);
            start_min = train.snapshot(static_cast<std::size_t>(imin));
            start_max = train.snapshot(static_cast<std::size_t>(imax));
        }
        clamp_into(start_min, cfg.bounds);
        clamp_into(start_max, cfg.bounds);
        SummaryPair pair{j, optimize(ef, start_min, Direction::Minimize, cfg),
                         optimize(ef, start_max, Direction::Maximize, cfg)};
        out.push_back(std::move(pair));
    }
    return out;
}

}  // namespace kto
