#include "qru/hpo.hpp"

#include "qru/error.hpp"
#include "qru/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace qru {

namespace {

double scaled_ordinal(std::size_t index, std::size_t count) {
    return count > 1 ? static_cast<double>(index) / static_cast<double>(count - 1) : 0.0;
}

template <typename T, typename Eq>
std::size_t find_choice(const std::vector<T>& choices, const T& value, Eq eq, const char* dim) {
    for (std::size_t i = 0; i < choices.size(); ++i) {
        if (eq(choices[i], value)) {
            return i;
        }
    }
    throw InvalidInput(std::string("value is not a choice of dimension '") + dim + "'");
}

bool same_lr(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

std::vector<std::size_t> sample_indices(std::size_t count, std::size_t grid, std::mt19937_64& rng) {
    std::vector<std::size_t> out;
    out.reserve(count);
    if (count <= grid) {
        // Partial Fisher-Yates keeps the draw distinct.
        std::vector<std::size_t> pool(grid);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, grid - 1);
            std::swap(pool[i], pool[pick(rng)]);
            out.push_back(pool[i]);
        }
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, grid - 1);
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(pick(rng));
        }
    }
    return out;
}

double checked(double v, std::size_t trial) {
    if (!std::isfinite(v)) {
        throw NumericFailure("objective returned a non-finite value for trial " + std::to_string(trial));
    }
    return v;
}

void annotate_best(std::vector<Trial>& trials) {
    double best = std::numeric_limits<double>::infinity();
    for (Trial& t : trials) {
        best = std::min(best, t.objective);
        t.best_so_far = best;
    }
}

} // namespace

std::string NormRange::name() const {
    if (*this == norm_symmetric_pi()) {
        return "sym_pi";
    }
    if (*this == norm_zero_two_pi()) {
        return "zero_2pi";
    }
    return std::to_string(lo) + ":" + std::to_string(hi);
}

NormRange norm_symmetric_pi() { return {-std::numbers::pi, std::numbers::pi}; }
NormRange norm_zero_two_pi() { return {0.0, 2.0 * std::numbers::pi}; }

HpoSpace HpoSpace::standard(bool with_normalization) {
    HpoSpace s;
    s.depths = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    s.learning_rates = {0.5, 0.05, 0.005, 0.0005, 0.00005, 0.000005, 0.0000005};
    s.losses = {LossKind::l1(), LossKind::l2(), LossKind::huber()};
    s.optimizers.assign(std::begin(kAllOptimizers), std::end(kAllOptimizers));
    if (with_normalization) {
        s.normalizations = {norm_symmetric_pi(), norm_zero_two_pi()};
    }
    return s;
}

void HpoSpace::validate() const {
    if (depths.empty() || learning_rates.empty() || losses.empty() || optimizers.empty()) {
        throw InvalidInput("every search dimension needs at least one choice");
    }
    for (int d : depths) {
        if (d < 1) {
            throw InvalidInput("depth choices must be >= 1");
        }
    }
    for (double lr : learning_rates) {
        if (!(lr > 0.0) || !std::isfinite(lr)) {
            throw InvalidInput("learning-rate choices must be positive");
        }
    }
}

std::size_t HpoSpace::grid_size() const {
    return depths.size() * learning_rates.size() * losses.size() * optimizers.size() *
           std::max<std::size_t>(normalizations.size(), 1);
}

HpoConfig HpoSpace::config_at(std::size_t index) const {
    if (index >= grid_size()) {
        throw InvalidInput("grid index out of range");
    }
    HpoConfig c;
    if (!normalizations.empty()) {
        c.normalization = normalizations[index % normalizations.size()];
        index /= normalizations.size();
    }
    c.optimizer = optimizers[index % optimizers.size()];
    index /= optimizers.size();
    c.loss = losses[index % losses.size()];
    index /= losses.size();
    c.lr = learning_rates[index % learning_rates.size()];
    index /= learning_rates.size();
    c.depth = depths[index];
    return c;
}

std::vector<double> encode_config(const HpoSpace& space, const HpoConfig& config) {
    std::vector<double> x;
    x.reserve(space.dimensions());

    find_choice(space.depths, config.depth, std::equal_to<>{}, "depth");
    const auto [dmin, dmax] = std::minmax_element(space.depths.begin(), space.depths.end());
    x.push_back(*dmax > *dmin ? static_cast<double>(config.depth - *dmin) / (*dmax - *dmin) : 0.0);

    find_choice(space.learning_rates, config.lr, same_lr, "learning_rate");
    const auto [lmin, lmax] = std::minmax_element(space.learning_rates.begin(), space.learning_rates.end());
    const double span = std::log10(*lmax) - std::log10(*lmin);
    x.push_back(span > 0.0 ? (std::log10(*lmax) - std::log10(config.lr)) / span : 0.0);

    x.push_back(scaled_ordinal(find_choice(space.losses, config.loss, std::equal_to<>{}, "loss"), space.losses.size()));
    x.push_back(scaled_ordinal(find_choice(space.optimizers, config.optimizer, std::equal_to<>{}, "optimizer"),
                               space.optimizers.size()));
    if (!space.normalizations.empty()) {
        if (!config.normalization) {
            throw InvalidInput("config lacks the normalization dimension of the space");
        }
        x.push_back(scaled_ordinal(
            find_choice(space.normalizations, *config.normalization, std::equal_to<>{}, "normalization"),
            space.normalizations.size()));
    }
    return x;
}

GpModel::GpModel(double length_scale, double signal_variance, double jitter)
    : length_scale_(length_scale), signal_variance_(signal_variance), jitter_(jitter) {
    if (!(length_scale > 0.0) || !(signal_variance > 0.0) || !(jitter > 0.0)) {
        throw InvalidInput("GP length scale, signal variance and jitter must be positive");
    }
}

double GpModel::kernel(std::span<const double> a, std::span<const double> b) const {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return signal_variance_ * std::exp(-d2 / (2.0 * length_scale_ * length_scale_));
}

void GpModel::fit(std::vector<std::vector<double>> points, std::vector<double> values) {
    if (points.size() != values.size()) {
        throw InvalidInput("GP needs one observation per point");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NumericFailure("GP observation is not finite");
        }
    }
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            k(i, j) = k(j, i) = kernel(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
        }
        k(i, i) += jitter_;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
        throw NumericFailure("GP covariance is not positive definite despite jitter");
    }
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
    const Eigen::VectorXd alpha = llt.solve(y);
    const Eigen::MatrixXd lower = llt.matrixL();

    points_ = std::move(points);
    values_ = std::move(values);
    alpha_.assign(alpha.data(), alpha.data() + n);
    chol_lower_.resize(static_cast<std::size_t>(n * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            chol_lower_[static_cast<std::size_t>(i * n + j)] = lower(i, j);
        }
    }
}

Posterior GpModel::predict(std::span<const double> x) const {
    const std::size_t n = points_.size();
    const double prior = kernel(x, x);
    if (n == 0) {
        return {0.0, prior};
    }
    std::vector<double> kx(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        kx[i] = kernel(x, points_[i]);
        mean += kx[i] * alpha_[i];
    }
    // Forward substitution L v = k(x, X); variance = k(x, x) - |v|^2.
    double reduction = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = kx[i];
        for (std::size_t j = 0; j < i; ++j) {
            s -= chol_lower_[i * n + j] * kx[j];
        }
        kx[i] = s / chol_lower_[i * n + i];
        reduction += kx[i] * kx[i];
    }
    return {mean, std::max(0.0, prior - reduction)};
}

Posterior gp_posterior(const GpModel& model, std::span<const double> x) { return model.predict(x); }

double acquisition(double mu, double var, double kappa) { return -mu + kappa * std::sqrt(std::max(0.0, var)); }

SearchHistory bayes_search(const HpoSpace& space, const Objective& objective, const BayesOptions& options) {
    space.validate();
    if (options.n_calls < 1 || options.n_initial < 1 || options.n_initial >= options.n_calls) {
        throw InvalidInput("bayes_search needs 1 <= n_initial < n_calls");
    }
    const std::size_t grid = space.grid_size();
    SearchHistory history;
    history.capped = static_cast<std::size_t>(options.n_calls) > grid;
    const std::size_t n_calls = std::min<std::size_t>(static_cast<std::size_t>(options.n_calls), grid);
    const std::size_t n_initial = std::min<std::size_t>(static_cast<std::size_t>(options.n_initial), n_calls);

    std::vector<std::vector<double>> encoded(grid);
    for (std::size_t g = 0; g < grid; ++g) {
        encoded[g] = encode_config(space, space.config_at(g));
    }
    std::vector<bool> evaluated(grid, false);
    std::vector<std::size_t> chosen;

    std::mt19937_64 rng(options.seed);
    const std::vector<std::size_t> initial = sample_indices(n_initial, grid, rng);
    std::vector<double> initial_values(n_initial);
    parallel_for(n_initial, options.threads,
                 [&](std::size_t i) { initial_values[i] = objective(space.config_at(initial[i])); });
    for (std::size_t i = 0; i < n_initial; ++i) {
        history.trials.push_back({i, space.config_at(initial[i]), checked(initial_values[i], i), options.budget, 0.0});
        evaluated[initial[i]] = true;
        chosen.push_back(initial[i]);
    }

    GpModel gp(options.length_scale, options.signal_variance, options.jitter);
    while (history.trials.size() < n_calls) {
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            xs.push_back(encoded[chosen[i]]);
            ys.push_back(history.trials[i].objective);
        }
        gp.fit(std::move(xs), std::move(ys));

        std::size_t best = grid;
        double best_utility = -std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < grid; ++g) {
            if (evaluated[g]) {
                continue;
            }
            const Posterior post = gp.predict(encoded[g]);
            const double u = acquisition(post.mean, post.variance, options.kappa);
            if (best == grid || u > best_utility) {
                best = g;
                best_utility = u;
            }
        }
        const std::size_t idx = history.trials.size();
        const HpoConfig cfg = space.config_at(best);
        history.trials.push_back({idx, cfg, checked(objective(cfg), idx), options.budget, 0.0});
        evaluated[best] = true;
        chosen.push_back(best);
    }
    annotate_best(history.trials);
    return history;
}

std::vector<Bracket> hyperband_schedule(int max_budget, int eta) {
    if (max_budget < 1 || eta < 2) {
        throw InvalidInput("hyperband needs max_budget >= 1 and eta >= 2");
    }
    const auto big_r = static_cast<long long>(max_budget);
    const auto e = static_cast<long long>(eta);
    int s_max = 0;
    for (long long p = e; p <= big_r; p *= e) {
        ++s_max;
    }
    std::vector<Bracket> brackets;
    for (int s = s_max; s >= 0; --s) {
        long long eta_s = 1;
        for (int k = 0; k < s; ++k) {
            eta_s *= e;
        }
        Bracket b;
        b.s = s;
        // n = ceil((s_max + 1) / (s + 1) * eta^s), r = R * eta^-s rounded down.
        b.n = static_cast<std::size_t>(((s_max + 1) * eta_s + s) / (s + 1));
        b.r = static_cast<int>(std::max(1LL, big_r / eta_s));
        std::size_t n_i = b.n;
        long long eta_i = 1;
        for (int i = 0; i <= s; ++i) {
            const int budget = static_cast<int>(std::max(1LL, big_r * eta_i / eta_s));
            const std::size_t kept = n_i / static_cast<std::size_t>(e);
            b.rungs.push_back({budget, n_i, kept});
            n_i = kept;
            eta_i *= e;
        }
        brackets.push_back(std::move(b));
    }
    return brackets;
}

HyperbandResult hyperband_search(const HpoSpace& space, const BudgetedObjective& objective,
                                 const HyperbandOptions& options) {
    space.validate();
    HyperbandResult result;
    result.brackets = hyperband_schedule(options.max_budget, options.eta);
    const std::size_t grid = space.grid_size();
    std::mt19937_64 rng(options.seed);

    for (Bracket& bracket : result.brackets) {
        std::vector<std::size_t> configs = sample_indices(bracket.n, grid, rng);
        for (std::size_t i = 0; i < bracket.rungs.size(); ++i) {
            const Rung& rung = bracket.rungs[i];
            if (configs.empty()) {
                break;
            }
            std::vector<double> losses(configs.size());
            parallel_for(configs.size(), options.threads, [&](std::size_t k) {
                losses[k] = objective(space.config_at(configs[k]), rung.budget);
            });
            const std::size_t first_trial = result.trials.size();
            for (std::size_t k = 0; k < configs.size(); ++k) {
                const std::size_t idx = result.trials.size();
                result.trials.push_back({idx, space.config_at(configs[k]), checked(losses[k], idx), rung.budget, 0.0});
            }
            // Rank by loss, ties to the earlier trial.
            std::vector<std::size_t> order(configs.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
            bracket.survivor = first_trial + order.front();
            if (i + 1 < bracket.rungs.size()) {
                std::vector<std::size_t> next;
                for (std::size_t k = 0; k < rung.kept; ++k) {
                    next.push_back(configs[order[k]]);
                }
                configs = std::move(next);
            }
        }
    }
    annotate_best(result.trials);
    return result;
}

} // namespace qru
