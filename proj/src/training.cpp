#include "qru/training.hpp"

#include "qru/dataio.hpp"
#include "qru/error.hpp"
#include "qru/random.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace qru {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

void check_dataset(const Dataset& ds, const TrainConfig& cfg, const char* which) {
    if (ds.empty()) {
        throw InvalidInput(std::string(which) + " set is empty");
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Record& r = ds.records[i];
        if (r.label < 0 || static_cast<std::size_t>(r.label) >= cfg.targets.size()) {
            throw DataError(std::string(which) + " record " + std::to_string(i) + " has label " +
                            std::to_string(r.label) + " but only " + std::to_string(cfg.targets.size()) +
                            " targets are configured");
        }
        if (r.features.size() != static_cast<std::size_t>(cfg.spec.n_features)) {
            throw LayoutError(std::string(which) + " record " + std::to_string(i) + " has " +
                              std::to_string(r.features.size()) + " features, circuit expects " +
                              std::to_string(cfg.spec.n_features));
        }
    }
}

} // namespace

LossKind LossKind::huber(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw InvalidInput("Huber delta must be finite and positive");
    }
    return {Type::Huber, delta};
}

LossKind LossKind::parse(std::string_view name, double delta) {
    const std::string key = lowercase(name);
    if (key == "l1") {
        return l1();
    }
    if (key == "l2") {
        return l2();
    }
    if (key == "huber") {
        return huber(delta);
    }
    throw InvalidInput("unknown loss '" + std::string(name) + "'");
}

std::string LossKind::name() const {
    switch (type) {
    case Type::L1: return "l1";
    case Type::L2: return "l2";
    case Type::Huber: return "huber";
    }
    return "unknown";
}

LossValue loss_and_grad(const LossKind& kind, double y, double yhat) {
    const double r = yhat - y;
    const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    switch (kind.type) {
    case LossKind::Type::L1:
        return {std::abs(r), sign};
    case LossKind::Type::L2:
        return {r * r, 2.0 * r};
    case LossKind::Type::Huber:
        if (std::abs(r) <= kind.delta) {
            return {0.5 * r * r, r};
        }
        return {kind.delta * (std::abs(r) - 0.5 * kind.delta), kind.delta * sign};
    }
    return {};
}

double lr_at_epoch(LrSchedule schedule, double base_lr, int epoch, int total_epochs) {
    if (schedule == LrSchedule::Constant) {
        return base_lr;
    }
    if (epoch < total_epochs / 2) {
        return base_lr;
    }
    if (epoch < (3 * total_epochs) / 4) {
        return base_lr / 10.0;
    }
    return base_lr / 100.0;
}

ParamVector initial_params(const CircuitSpec& spec, const ParamInit& init, std::uint64_t seed) {
    ParamVector p(param_count(spec), init.center);
    if (init.kind == ParamInit::Kind::Gaussian) {
        if (!(init.std >= 0.0)) {
            throw InvalidInput("Gaussian init needs a non-negative std");
        }
        std::mt19937_64 rng(derive_seed(seed, kInitStream));
        std::normal_distribution<double> gauss(init.center, init.std);
        for (double& v : p) {
            v = gauss(rng);
        }
    }
    return p;
}

void TrainConfig::validate() const {
    spec.validate();
    optimizer.validate();
    if (epochs < 1) {
        throw InvalidInput("epochs must be >= 1");
    }
    if (batch_size < 1) {
        throw InvalidInput("batch_size must be >= 1");
    }
    if (!(lr >= 0.0) || !std::isfinite(lr)) {
        throw InvalidInput("learning rate must be finite and non-negative");
    }
    if (targets.empty()) {
        throw InvalidInput("at least one class target is required");
    }
    for (std::size_t k = 0; k < targets.size(); ++k) {
        if (targets[k] < -1.0 || targets[k] > 1.0 || (k > 0 && !(targets[k] > targets[k - 1]))) {
            throw InvalidInput("targets must be strictly increasing within [-1, 1]");
        }
    }
    if (loss.type == LossKind::Type::Huber && !(loss.delta > 0.0)) {
        throw InvalidInput("Huber delta must be positive");
    }
}

EpochMetrics measure(const CircuitSpec& spec, std::span<const double> params, const Dataset& ds,
                     const LossKind& loss, std::span<const double> targets) {
    if (ds.empty()) {
        throw InvalidInput("measure: empty dataset");
    }
    double total = 0.0;
    std::size_t correct = 0;
    for (const Record& r : ds.records) {
        const double h = forward(spec, params, r.features);
        total += loss_and_grad(loss, targets[static_cast<std::size_t>(r.label)], h).loss;
        if (predict_class(h, targets) == r.label) {
            ++correct;
        }
    }
    const auto n = static_cast<double>(ds.size());
    return {total / n, static_cast<double>(correct) / n};
}

TrainReport fit(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set) {
    config.validate();
    check_dataset(train_set, config, "train");
    check_dataset(test_set, config, "test");
    const auto start = std::chrono::steady_clock::now();

    TrainReport report;
    ParamVector params = initial_params(config.spec, config.init, config.seed);
    report.initial_params = params;
    OptimizerState opt = OptimizerState::init(config.optimizer, params.size());

    std::mt19937_64 shuffle_rng(derive_seed(config.seed, kShuffleStream));
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> batch_grad(params.size());
    const auto batch = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i);
            std::swap(order[i], order[pick(shuffle_rng)]);
        }
        const double lr = lr_at_epoch(config.schedule, config.lr, epoch, config.epochs);

        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(begin + batch, order.size());
            std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
            for (std::size_t k = begin; k < end; ++k) {
                const Record& r = train_set.records[order[k]];
                const ForwardGradient fg = forward_and_gradient(config.spec, params, r.features);
                const double dl = loss_and_grad(config.loss, config.targets[static_cast<std::size_t>(r.label)],
                                                fg.value)
                                      .dloss_dyhat;
                for (std::size_t p = 0; p < params.size(); ++p) {
                    batch_grad[p] += dl * fg.grad[p];
                }
            }
            const double inv = 1.0 / static_cast<double>(end - begin);
            for (double& g : batch_grad) {
                g *= inv;
            }
            optimizer_step(config.optimizer, opt, params, batch_grad, lr);
        }

        const EpochMetrics tr = measure(config.spec, params, train_set, config.loss, config.targets);
        const EpochMetrics te = measure(config.spec, params, test_set, config.loss, config.targets);
        report.train_loss.push_back(tr.mean_loss);
        report.train_acc.push_back(tr.accuracy);
        report.test_loss.push_back(te.mean_loss);
        report.test_acc.push_back(te.accuracy);
    }

    report.final_params = std::move(params);
    report.trainability = report.train_loss.size() >= 2 ? trainability(report.train_loss) : 0.0;
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

double trainability(std::span<const double> loss_curve) {
    if (loss_curve.size() < 2) {
        throw InvalidInput("trainability needs a curve of at least two epochs");
    }
    // interior points count once, endpoints half; Neumaier sum keeps long curves from drifting
    double sum = 0.5 * (loss_curve.front() + loss_curve.back());
    double carry = 0.0;
    for (std::size_t i = 1; i + 1 < loss_curve.size(); ++i) {
        const double v = loss_curve[i];
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + carry;
}

} // namespace qru
