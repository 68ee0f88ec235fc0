#pragma once

#include "qru/circuit.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace qru {

struct CurveSample {
    std::vector<double> x;
    std::vector<double> h;
};

/// Circuit output h(x) on n_points evenly spaced points of [lo, hi]; single-feature circuits only.
CurveSample hypothesis_curve(const CircuitSpec& spec, std::span<const double> params, double lo, double hi,
                             int n_points);

/// Least-squares fit h(x) ~ a0 + sum_{w=1..F} (c_w cos wx + s_w sin wx).
/// cos_coef[0] holds a0 and sin_coef[0] is always 0.
struct SpectrumFit {
    int max_freq = 0;
    std::vector<double> cos_coef;
    std::vector<double> sin_coef;
    double residual_rms = 0.0;
};

SpectrumFit spectrum_fit(const CurveSample& curve, int max_freq);

/// Samples one output state per call from its own generator.
using StateSampler = std::function<PureState(std::mt19937_64&)>;

struct ExpressibilityOptions {
    int n_pairs = 5000;
    int n_bins = 75;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// KL divergence of the pairwise fidelity histogram from the single-qubit Haar
/// law (uniform on [0, 1]). Empty bins use a probability floor of 1e-12.
double fidelity_kl(const StateSampler& sampler, const ExpressibilityOptions& options);

/// Circuit states at x = 0 with every parameter uniform on [0, 2 pi).
double expressibility_kl(const CircuitSpec& spec, const ExpressibilityOptions& options);

/// max over the grid of |h(x) - h(-x)|; the interval must be symmetric about 0.
double evenness_gap(const CircuitSpec& spec, std::span<const double> params, double lo, double hi, int n_points);

} // namespace qru
