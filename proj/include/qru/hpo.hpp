#pragma once

#include "qru/training.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qru {

struct NormRange {
    double lo = 0.0;
    double hi = 1.0;

    std::string name() const;
    bool operator==(const NormRange&) const = default;
};

/// Symmetric and shifted angle ranges for feature encoding.
NormRange norm_symmetric_pi();
NormRange norm_zero_two_pi();

/// One point of the discrete search grid.
struct HpoConfig {
    int depth = 1;
    double lr = 0.005;
    LossKind loss;
    OptimizerType optimizer = OptimizerType::Adam;
    std::optional<NormRange> normalization;
};

/// Cartesian grid of choices. An empty normalization list removes that dimension.
struct HpoSpace {
    std::vector<int> depths;
    std::vector<double> learning_rates;
    std::vector<LossKind> losses;
    std::vector<OptimizerType> optimizers;
    std::vector<NormRange> normalizations;

    /// depth 1..10, lr 0.5 .. 5e-7 by decades, L1/L2/Huber, eight optimizers,
    /// optionally the two normalization ranges.
    static HpoSpace standard(bool with_normalization = false);

    void validate() const;
    std::size_t grid_size() const;
    std::size_t dimensions() const { return normalizations.empty() ? 4 : 5; }
    /// Mixed-radix enumeration; the last dimension varies fastest.
    HpoConfig config_at(std::size_t index) const;
};

/// Unit-cube coordinates: depth linear, lr on a log10 scale (largest lr at 0),
/// categorical dimensions by ordinal. Throws InvalidInput for values outside the space.
std::vector<double> encode_config(const HpoSpace& space, const HpoConfig& config);

struct Trial {
    std::size_t index = 0;
    HpoConfig config;
    double objective = 0.0;
    int budget = 1;
    double best_so_far = 0.0;
};

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Zero-mean GP with a squared-exponential kernel
/// k(a, b) = signal_variance * exp(-|a - b|^2 / (2 length_scale^2)).
class GpModel {
public:
    explicit GpModel(double length_scale = 0.5, double signal_variance = 1.0, double jitter = 1e-8);

    /// Conditions on observations; throws NumericFailure if (K + jitter I) is not positive definite.
    void fit(std::vector<std::vector<double>> points, std::vector<double> values);
    Posterior predict(std::span<const double> x) const;
    double kernel(std::span<const double> a, std::span<const double> b) const;

    std::size_t size() const { return points_.size(); }
    double length_scale() const { return length_scale_; }
    double signal_variance() const { return signal_variance_; }
    double jitter() const { return jitter_; }

private:
    double length_scale_;
    double signal_variance_;
    double jitter_;
    std::vector<std::vector<double>> points_;
    std::vector<double> values_;
    std::vector<double> alpha_;      // (K + jitter I)^-1 y
    std::vector<double> chol_lower_; // row-major Cholesky factor
};

Posterior gp_posterior(const GpModel& model, std::span<const double> x);

/// Confidence-bound utility for a minimized objective: -mu + kappa * sqrt(var).
double acquisition(double mu, double var, double kappa);

using Objective = std::function<double(const HpoConfig&)>;
using BudgetedObjective = std::function<double(const HpoConfig&, int budget)>;

struct BayesOptions {
    int n_calls = 50;
    int n_initial = 10;
    double kappa = 4.0;
    std::uint64_t seed = 0;
    int budget = 30; // recorded on each trial
    int threads = 1;
    double length_scale = 0.5;
    double signal_variance = 1.0;
    double jitter = 1e-8;
};

struct SearchHistory {
    std::vector<Trial> trials;
    bool capped = false; // n_calls exceeded the grid size
};

SearchHistory bayes_search(const HpoSpace& space, const Objective& objective, const BayesOptions& options);

struct HyperbandOptions {
    int max_budget = 30;
    int eta = 3;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct Rung {
    int budget = 1;
    std::size_t n_configs = 0;
    std::size_t kept = 0;
};

struct Bracket {
    int s = 0;
    std::size_t n = 0;
    int r = 1;
    std::vector<Rung> rungs;
    std::size_t survivor = 0; // trial index of the best config at the last rung
};

struct HyperbandResult {
    std::vector<Trial> trials;
    std::vector<Bracket> brackets;
};

/// Bracket sizes and per-rung budgets without evaluating anything.
std::vector<Bracket> hyperband_schedule(int max_budget, int eta);

HyperbandResult hyperband_search(const HpoSpace& space, const BudgetedObjective& objective,
                                 const HyperbandOptions& options);

} // namespace qru
