#include "kto/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kto/errors.hpp"
#include "kto/rng.hpp"

namespace kto {

Potential::Potential(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) {
    for (double c : coeffs_) {
        if (!std::isfinite(c)) throw InvalidArgument("Potential: non-finite coefficient");
    }
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
    const std::size_t degree = coeffs_.empty() ? 0 : coeffs_.size() - 1;
    if (degree < 2 || degree % 2 != 0 || coeffs_.back() <= 0.0) {
        throw InvalidArgument("Potential: must have even leading degree >= 2 with a positive "
                              "leading coefficient");
    }
}

Potential Potential::triple_well() {
    return Potential({0.0, 0.1, 7.56, 0.0, -9.24, 0.0, 2.8});
}

double Potential::value(double x) const {
    double v = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * x + *it;
    return v;
}

double Potential::grad(double x) const {
    double g = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 1;) {
        g = g * x + static_cast<double>(i) * coeffs_[i];
    }
    return g;
}

namespace {

double second_derivative(const Potential& p, double x) {
    const auto& c = p.coefficients();
    double h = 0.0;
    for (std::size_t i = c.size(); i-- > 2;) {
        h = h * x + static_cast<double>(i) * static_cast<double>(i - 1) * c[i];
    }
    return h;
}

double bisect_grad_root(const Potential& p, double lo, double hi) {
    double flo = p.grad(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = p.grad(mid);
        if (fmid == 0.0) return mid;
        if ((flo < 0.0) == (fmid < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

CriticalPoints critical_points(const Potential& p) {
    // Cauchy bound on the roots of V'.
    const auto& c = p.coefficients();
    const std::size_t deg = c.size() - 1;
    const double lead = static_cast<double>(deg) * c[deg];
    double bound = 0.0;
    for (std::size_t i = 1; i < deg; ++i) {
        bound = std::max(bound, std::abs(static_cast<double>(i) * c[i] / lead));
    }
    bound += 1.0;

    CriticalPoints out;
    const int cells = 65536;
    double prev_x = -bound;
    double prev_f = p.grad(prev_x);
    for (int i = 1; i <= cells; ++i) {
        const double x = -bound + 2.0 * bound * static_cast<double>(i) / cells;
        const double f = p.grad(x);
        double root = std::numeric_limits<double>::quiet_NaN();
        if (prev_f == 0.0) {
            root = prev_x;
        } else if ((prev_f < 0.0) != (f < 0.0)) {
            root = bisect_grad_root(p, prev_x, x);
        }
        if (!std::isnan(root)) {
            if (second_derivative(p, root) >= 0.0) {
                out.minima.push_back(root);
            } else {
                out.maxima.push_back(root);
            }
        }
        prev_x = x;
        prev_f = f;
    }
    return out;
}

std::vector<int> label_wells(const SnapshotSet& traj, const Potential& p) {
    if (traj.dim() != 1) throw ShapeMismatch("label_wells: expects scalar snapshots");
    const std::vector<double>& bounds = critical_points(p).maxima;
    std::vector<int> labels(traj.count());
    for (std::size_t i = 0; i < traj.count(); ++i) {
        const double x = traj.snapshot(i)[0];
        labels[i] = static_cast<int>(
            std::upper_bound(bounds.begin(), bounds.end(), x) - bounds.begin());
    }
    return labels;
}

SimResult simulate(const SdeConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw InvalidArgument("simulate: dt must be positive");
    if (!(cfg.diffusion > 0.0)) throw InvalidArgument("simulate: diffusion must be positive");
    if (cfg.n_steps < 1) throw InvalidArgument("simulate: n_steps must be positive");
    if (cfg.store_stride < 1 || cfg.store_stride > cfg.n_steps) {
        throw InvalidArgument("simulate: store_stride must be in [1, n_steps]");
    }

    Rng rng(cfg.seed);
    const double noise_scale = std::sqrt(2.0 * cfg.diffusion * cfg.dt);
    std::vector<double> stored;
    stored.reserve(cfg.n_steps / cfg.store_stride);
    double x = cfg.x0;
    for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
        x += -cfg.potential.grad(x) * cfg.dt + noise_scale * rng.normal();
        if (!(std::abs(x) <= 1e6)) {
            throw Blowup("simulate: state exceeded 1e6 at step " + std::to_string(step) +
                         "; reduce dt");
        }
        if (step % cfg.store_stride == 0) stored.push_back(x);
    }

    const std::size_t n_stored = stored.size();
    SnapshotSet traj({1}, n_stored, std::move(stored),
                     cfg.dt * static_cast<double>(cfg.store_stride));
    std::vector<int> labels = label_wells(traj, cfg.potential);
    return {std::move(traj), std::move(labels)};
}

SnapshotSet render_pendulum(const PendulumConfig& cfg) {
    if (cfg.width < 16 || cfg.height < 16) {
        throw InvalidGeometry("render_pendulum: frames must be at least 16x16");
    }
    if (cfg.period_frames < 4) {
        throw InvalidGeometry("render_pendulum: period must be at least 4 frames");
    }
    if (cfg.n_frames < 1) throw InvalidGeometry("render_pendulum: need at least one frame");
    if (!(cfg.blob_sigma > 0.0)) throw InvalidGeometry("render_pendulum: blob_sigma must be positive");

    Rng rng(cfg.seed);
    const double cx0 = 0.5 * static_cast<double>(cfg.width - 1);
    const double cy0 = 0.5 * static_cast<double>(cfg.height - 1);
    // The bob rises along its arc at the swing extremes (second harmonic in
    // the vertical). The phase offset emulates the slightly elliptical,
    // off-plane swing of a real pendulum on camera; without it every frame
    // pair (going left / going right) would coincide and the sequence would
    // carry no direction-of-motion information at all, unlike real footage.
    const double arc_amp = 0.2 * cfg.amplitude_px;
    constexpr double arc_phase = 0.9;
    const double inv2s2 = 1.0 / (2.0 * cfg.blob_sigma * cfg.blob_sigma);
    std::vector<double> data;
    data.reserve(cfg.n_frames * cfg.width * cfg.height);
    for (std::size_t t = 0; t < cfg.n_frames; ++t) {
        // Phase from t mod period, so noiseless frames repeat bit-exactly.
        const double phase = 2.0 * std::numbers::pi *
                             static_cast<double>(t % cfg.period_frames) /
                             static_cast<double>(cfg.period_frames);
        const double cx = cx0 + cfg.amplitude_px * std::sin(phase);
        const double cy = cy0 - arc_amp * std::cos(2.0 * phase + arc_phase);
        for (std::size_t r = 0; r < cfg.height; ++r) {
            const double dyr = static_cast<double>(r) - cy;
            const double dy2 = dyr * dyr;
            for (std::size_t c = 0; c < cfg.width; ++c) {
                const double dx = static_cast<double>(c) - cx;
                double v = cfg.blob_peak * std::exp(-(dx * dx + dy2) * inv2s2);
                if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * rng.normal();
                data.push_back(std::clamp(v, 0.0, 255.0));
            }
        }
    }
    return SnapshotSet({cfg.height, cfg.width}, cfg.n_frames, std::move(data), 1.0);
}

}  // namespace kto
