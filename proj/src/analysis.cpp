#include "qru/analysis.hpp"

#include "qru/error.hpp"
#include "qru/parallel.hpp"
#include "qru/random.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qru {

namespace {

void require_single_feature(const CircuitSpec& spec, const char* op) {
    if (spec.n_features != 1) {
        throw InvalidInput(std::string(op) + " needs a single-feature circuit, got " +
                           std::to_string(spec.n_features) + " features");
    }
}

std::vector<double> grid(double lo, double hi, int n_points) {
    if (n_points < 2) {
        throw InvalidInput("a sampling grid needs at least two points");
    }
    if (!(lo < hi)) {
        throw InvalidInput("sampling interval needs lo < hi");
    }
    std::vector<double> x(static_cast<std::size_t>(n_points));
    const double step = (hi - lo) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        x[static_cast<std::size_t>(i)] = lo + step * i;
    }
    x.back() = hi;
    return x;
}

} // namespace

CurveSample hypothesis_curve(const CircuitSpec& spec, std::span<const double> params, double lo, double hi,
                             int n_points) {
    require_single_feature(spec, "hypothesis_curve");
    CurveSample c;
    c.x = grid(lo, hi, n_points);
    c.h.reserve(c.x.size());
    for (double x : c.x) {
        c.h.push_back(forward(spec, params, std::span<const double>(&x, 1)));
    }
    return c;
}

SpectrumFit spectrum_fit(const CurveSample& curve, int max_freq) {
    if (curve.x.size() != curve.h.size()) {
        throw InvalidInput("curve x and h lengths differ");
    }
    if (max_freq < 0) {
        throw InvalidInput("max_freq must be non-negative");
    }
    const auto n = static_cast<Eigen::Index>(curve.x.size());
    const Eigen::Index cols = 2 * max_freq + 1;
    if (n < cols) {
        throw InvalidInput("spectrum fit is underdetermined: " + std::to_string(n) + " points for " +
                           std::to_string(cols) + " coefficients");
    }
    Eigen::MatrixXd design(n, cols);
    Eigen::VectorXd h(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = curve.x[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        for (int w = 1; w <= max_freq; ++w) {
            design(i, 2 * w - 1) = std::cos(w * x);
            design(i, 2 * w) = std::sin(w * x);
        }
        h(i) = curve.h[static_cast<std::size_t>(i)];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < cols) {
        throw InvalidInput("spectrum fit design matrix is rank deficient on this grid");
    }
    const Eigen::VectorXd coef = qr.solve(h);
    const Eigen::VectorXd resid = design * coef - h;

    SpectrumFit fit;
    fit.max_freq = max_freq;
    fit.cos_coef.assign(static_cast<std::size_t>(max_freq) + 1, 0.0);
    fit.sin_coef.assign(static_cast<std::size_t>(max_freq) + 1, 0.0);
    fit.cos_coef[0] = coef(0);
    for (int w = 1; w <= max_freq; ++w) {
        fit.cos_coef[static_cast<std::size_t>(w)] = coef(2 * w - 1);
        fit.sin_coef[static_cast<std::size_t>(w)] = coef(2 * w);
    }
    fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    return fit;
}

double fidelity_kl(const StateSampler& sampler, const ExpressibilityOptions& options) {
    if (options.n_pairs < 100) {
        throw InvalidInput("expressibility needs at least 100 state pairs");
    }
    if (options.n_bins < 2) {
        throw InvalidInput("expressibility needs at least 2 histogram bins");
    }
    const auto pairs = static_cast<std::size_t>(options.n_pairs);
    std::vector<double> fidelity(pairs);
    parallel_for(pairs, options.threads, [&](std::size_t i) {
        std::mt19937_64 rng(derive_seed(options.seed, i));
        const PureState a = sampler(rng);
        const PureState b = sampler(rng);
        fidelity[i] = state_fidelity(a, b);
    });

    const auto bins = static_cast<std::size_t>(options.n_bins);
    std::vector<double> counts(bins, 0.0);
    for (double f : fidelity) {
        const auto b = static_cast<std::size_t>(std::clamp(f, 0.0, 1.0) * static_cast<double>(bins));
        counts[std::min(b, bins - 1)] += 1.0;
    }
    constexpr double kFloor = 1e-12;
    const double haar = 1.0 / static_cast<double>(bins);
    double kl = 0.0;
    for (double c : counts) {
        const double p = std::max(c / static_cast<double>(pairs), kFloor);
        kl += p * std::log(p / haar);
    }
    return std::max(0.0, kl);
}

double expressibility_kl(const CircuitSpec& spec, const ExpressibilityOptions& options) {
    spec.validate();
    const std::size_t n_params = param_count(spec);
    const std::vector<double> x(static_cast<std::size_t>(spec.n_features), 0.0);
    const StateSampler sampler = [&](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        std::vector<double> theta(n_params);
        for (double& t : theta) {
            t = angle(rng);
        }
        return output_state(spec, theta, x);
    };
    return fidelity_kl(sampler, options);
}

double evenness_gap(const CircuitSpec& spec, std::span<const double> params, double lo, double hi, int n_points) {
    require_single_feature(spec, "evenness_gap");
    if (std::abs(lo + hi) > 1e-12 * std::max(std::abs(lo), std::abs(hi))) {
        throw InvalidInput("evenness_gap needs an interval symmetric about 0");
    }
    double gap = 0.0;
    for (double x : grid(lo, hi, n_points)) {
        const double neg = -x;
        const double hp = forward(spec, params, std::span<const double>(&x, 1));
        const double hn = forward(spec, params, std::span<const double>(&neg, 1));
        gap = std::max(gap, std::abs(hp - hn));
    }
    return gap;
}

} // namespace qru
