#pragma once

#include <cstdint>
#include <vector>

#include "kto/snapshot.hpp"

namespace kto {

// Confining polynomial energy landscape (even leading degree, positive
// leading coefficient).
class Potential {
public:
    // Coefficients in ascending degree: V(x) = sum_i c_i x^i.
    explicit Potential(std::vector<double> coefficients);

    // Three minima near -1.29, 0, 1.29 with a slight tilt making the left
    // well the deepest, so the slowest relaxation crosses the highest
    // barrier: V(x) = 2.8 (x^6 - 3.3 x^4 + 2.7 x^2) + 0.1 x.
    static Potential triple_well();

    double value(double x) const;
    double grad(double x) const;
    const std::vector<double>& coefficients() const { return coeffs_; }

private:
    std::vector<double> coeffs_;
};

struct CriticalPoints {
    std::vector<double> minima; // ascending
    std::vector<double> maxima; // ascending; these separate the basins
};

// Roots of V' found by sign-change scan plus bisection over the Cauchy
// root bound, classified by the sign of V''.
CriticalPoints critical_points(const Potential& p);

// Basin index per snapshot: 0 for x below the first local maximum of V,
// 1 between the first and second, and so on.
std::vector<int> label_wells(const SnapshotSet& traj, const Potential& p);

struct SdeConfig {
    Potential potential = Potential::triple_well();
    double diffusion = 0.28125;
    double dt = 1e-3;
    std::size_t n_steps = 2'000'000;
    double x0 = -1.29;
    std::uint64_t seed = 42;
    std::size_t store_stride = 100;
};

struct SimResult {
    SnapshotSet trajectory;       // scalar states, spacing cfg.dt * store_stride
    std::vector<int> well_labels; // one per stored state
};

// Euler-Maruyama integration of dX = -V'(X) dt + sqrt(2 D) dW, storing the
// state after every store_stride-th step (n_steps / store_stride states).
// Deterministic for a fixed seed.
SimResult simulate(const SdeConfig& cfg);

struct PendulumConfig {
    std::size_t n_frames = 240;
    std::size_t width = 64;
    std::size_t height = 64;
    std::size_t period_frames = 24;
    double amplitude_px = 20.0;
    double noise_sigma = 2.0;
    std::uint64_t seed = 7;
    double blob_sigma = 4.0;
    double blob_peak = 200.0;
};

// Grayscale frames of a Gaussian blob whose horizontal center follows
// A sin(2 pi t / period) around the frame center and whose vertical center
// follows the phase-shifted arc harmonic 0.2 A cos(4 pi t / period + 0.9),
// plus per-pixel Gaussian noise, clamped to [0, 255]. Deterministic per
// seed; frames t and t + period are bit-identical when noise_sigma is zero.
SnapshotSet render_pendulum(const PendulumConfig& cfg);

}  // namespace kto
