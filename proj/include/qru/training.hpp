#pragma once

#include "qru/circuit.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qru {

struct Dataset;

struct LossKind {
    enum class Type { L1, L2, Huber };

    Type type = Type::L2;
    double delta = 1.0; // Huber only

    static LossKind l1() { return {Type::L1, 1.0}; }
    static LossKind l2() { return {Type::L2, 1.0}; }
    static LossKind huber(double delta = 1.0);
    static LossKind parse(std::string_view name, double delta = 1.0);

    std::string name() const;
    bool operator==(const LossKind&) const = default;
};

struct LossValue {
    double loss = 0.0;
    double dloss_dyhat = 0.0;
};

/// Per-sample loss and its derivative with respect to the prediction.
/// L1 is |r|, L2 is r^2, Huber is r^2/2 inside |r| <= delta and linear outside.
LossValue loss_and_grad(const LossKind& kind, double y, double yhat);

enum class OptimizerType { SGD, RMSProp, Adam, Adamax, Nadam, Adagrad, Adadelta, AdamW };

inline constexpr OptimizerType kAllOptimizers[] = {OptimizerType::SGD,     OptimizerType::RMSProp,
                                                   OptimizerType::Adam,    OptimizerType::Adamax,
                                                   OptimizerType::Nadam,   OptimizerType::Adagrad,
                                                   OptimizerType::Adadelta, OptimizerType::AdamW};

struct OptimizerKind {
    OptimizerType type = OptimizerType::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double rms_decay = 0.9;     // RMSProp moving-average decay
    double weight_decay = 0.01; // AdamW decoupled decay
    double rho = 0.9;           // Adadelta decay
    bool bias_correction = true; // Adam family

    static OptimizerKind of(OptimizerType type) { return OptimizerKind{type}; }
    static OptimizerKind parse(std::string_view name);

    std::string name() const;
    void validate() const;
    bool operator==(const OptimizerKind&) const = default;
};

std::string optimizer_name(OptimizerType type);

struct OptimizerState {
    OptimizerType type = OptimizerType::SGD;
    std::vector<double> m; // first moment
    std::vector<double> v; // squared-gradient average or sum
    std::vector<double> u; // Adamax infinity norm / Adadelta squared-update average
    std::uint64_t t = 0;

    static OptimizerState init(const OptimizerKind& kind, std::size_t n_params);
};

/// One update of `params` in place. Adadelta ignores lr.
void optimizer_step(const OptimizerKind& kind, OptimizerState& state, std::span<double> params,
                    std::span<const double> grads, double lr);

enum class LrSchedule { Constant, StepDecay };

/// StepDecay divides base_lr by 10 from epoch floor(E/2) and by 100 from floor(3E/4).
double lr_at_epoch(LrSchedule schedule, double base_lr, int epoch, int total_epochs);

struct ParamInit {
    enum class Kind { Constant, Gaussian };

    Kind kind = Kind::Constant;
    double center = 0.5;
    double std = 0.1;
};

ParamVector initial_params(const CircuitSpec& spec, const ParamInit& init, std::uint64_t seed);

struct TrainConfig {
    CircuitSpec spec{4, 3, EncodingScheme{}};
    int epochs = 30;
    int batch_size = 1;
    double lr = 5e-4;
    OptimizerKind optimizer;
    LossKind loss;
    std::uint64_t seed = 0;
    ParamInit init;
    LrSchedule schedule = LrSchedule::Constant;
    std::vector<double> targets = default_targets(3);

    void validate() const;
};

/// Curves hold one entry per epoch, measured after that epoch's last update.
struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> train_acc;
    std::vector<double> test_loss;
    std::vector<double> test_acc;
    ParamVector initial_params;
    ParamVector final_params;
    double trainability = 0.0;
    double wall_time_s = 0.0;
};

struct EpochMetrics {
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

EpochMetrics measure(const CircuitSpec& spec, std::span<const double> params, const Dataset& ds,
                     const LossKind& loss, std::span<const double> targets);

TrainReport fit(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set);

/// Trapezoidal area under a loss curve sampled at epochs 0..n-1.
double trainability(std::span<const double> loss_curve);

} // namespace qru
