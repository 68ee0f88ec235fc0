#include "helpers.hpp"
#include "optimizer_oracle.hpp"

#include "qru/dataio.hpp"
#include "qru/error.hpp"
#include "qru/training.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace qru;
using std::numbers::pi;

namespace {

// Small normalized three-class problem on one feature.
std::pair<Dataset, Dataset> toy_sets(int n_per_class = 20) {
    SynthConfig sc = SynthConfig::defaults();
    sc.n_per_class = n_per_class;
    const Dataset raw = generate_synthetic(sc, 5);
    auto [tr, te] = split_shuffle(raw, 0.75, 5);
    Dataset train = normalize(tr, -pi, pi);
    Dataset test = apply_normalization(te, *train.normalization);
    return {train, test};
}

TrainConfig small_config() {
    TrainConfig c;
    c.spec = {2, 3, EncodingScheme{}};
    c.epochs = 4;
    c.lr = 0.01;
    return c;
}

} // namespace

TEST_SUITE("training") {

TEST_CASE("loss examples") {
    const LossValue l2 = loss_and_grad(LossKind::l2(), 1.0, 1.0);
    CHECK(l2.loss == 0.0);
    CHECK(l2.dloss_dyhat == 0.0);
    CHECK(loss_and_grad(LossKind::huber(1.0), 0.0, 0.5).loss == 0.125);
    CHECK(loss_and_grad(LossKind::huber(1.0), 0.0, 2.0).loss == 1.5);
    CHECK(loss_and_grad(LossKind::huber(1.0), 2.0, 0.0).loss == 1.5);
    CHECK(loss_and_grad(LossKind::l1(), 0.3, 0.3).dloss_dyhat == 0.0);
    CHECK(loss_and_grad(LossKind::l1(), 0.0, -0.25).loss == 0.25);
    CHECK_THROWS_AS(LossKind::huber(0.0), InvalidInput);
    CHECK(LossKind::parse("HUBER", 0.5) == LossKind::huber(0.5));
    CHECK_THROWS_AS(LossKind::parse("hinge"), InvalidInput);
}

TEST_CASE("loss derivatives match central differences") {
    const LossKind kinds[] = {LossKind::l1(), LossKind::l2(), LossKind::huber(1.0), LossKind::huber(0.7)};
    for (const LossKind& k : kinds) {
        for (double r : {-3.0, -1.0, -0.5, 0.5, 1.0, 3.0}) {
            const double y = 0.2;
            const double h = 1e-6;
            if (k.type == LossKind::Type::Huber && std::abs(std::abs(r) - k.delta) < 1e-3) {
                continue; // kink of the Huber branch
            }
            const double fd =
                (loss_and_grad(k, y, y + r + h).loss - loss_and_grad(k, y, y + r - h).loss) / (2 * h);
            CHECK(std::abs(loss_and_grad(k, y, y + r).dloss_dyhat - fd) < 1e-7);
        }
    }
    // at the Huber kink both one-sided slopes equal delta
    CHECK(loss_and_grad(LossKind::huber(1.0), 0.0, 1.0).dloss_dyhat == 1.0);
}

TEST_CASE("optimizer examples") {
    {
        const OptimizerKind k = OptimizerKind::of(OptimizerType::SGD);
        OptimizerState s = OptimizerState::init(k, 1);
        double p[] = {1.0};
        const double g[] = {0.5};
        optimizer_step(k, s, p, g, 0.1);
        CHECK(p[0] == doctest::Approx(0.95).epsilon(1e-15));
    }
    {
        const OptimizerKind k = OptimizerKind::of(OptimizerType::Adam);
        OptimizerState s = OptimizerState::init(k, 1);
        double p[] = {0.0};
        const double g[] = {2.0};
        optimizer_step(k, s, p, g, 0.001);
        CHECK(std::abs(p[0] - (-0.001 * 2.0 / (2.0 + 1e-8))) < 1e-15);
    }
    {
        const OptimizerKind k = OptimizerKind::of(OptimizerType::Adagrad);
        OptimizerState s = OptimizerState::init(k, 1);
        double p[] = {0.0};
        const double g[] = {1.0};
        optimizer_step(k, s, p, g, 0.5);
        CHECK(std::abs(p[0] - (-0.5 / (1.0 + 1e-8))) < 1e-15);
        optimizer_step(k, s, p, g, 0.5);
        CHECK(std::abs(p[0] - (-0.5 / (1.0 + 1e-8) - 0.5 / (std::sqrt(2.0) + 1e-8))) < 1e-15);
    }
}

TEST_CASE("two hand-derived steps for every optimizer") {
    for (OptimizerType t : kAllOptimizers) {
        CAPTURE(optimizer_name(t));
        CHECK(oracle::optimizer_two_step_error(t) < 1e-10);
    }
}

TEST_CASE("adadelta ignores the learning rate") {
    const OptimizerKind k = OptimizerKind::of(OptimizerType::Adadelta);
    OptimizerState a = OptimizerState::init(k, 1);
    OptimizerState b = OptimizerState::init(k, 1);
    double pa[] = {0.3};
    double pb[] = {0.3};
    const double g[] = {0.7};
    optimizer_step(k, a, pa, g, 0.1);
    optimizer_step(k, b, pb, g, 100.0);
    CHECK(pa[0] == pb[0]);
}

TEST_CASE("adam without bias correction") {
    OptimizerKind k = OptimizerKind::of(OptimizerType::Adam);
    k.bias_correction = false;
    OptimizerState s = OptimizerState::init(k, 1);
    double p[] = {0.0};
    const double g[] = {2.0};
    optimizer_step(k, s, p, g, 0.01);
    // m = 0.2, v = 0.004
    CHECK(std::abs(p[0] - (-0.01 * 0.2 / (std::sqrt(0.004) + 1e-8))) < 1e-15);
}

TEST_CASE("optimizer misuse") {
    const OptimizerKind adam = OptimizerKind::of(OptimizerType::Adam);
    OptimizerState s = OptimizerState::init(adam, 2);
    std::vector<double> p(2, 0.0);
    const std::vector<double> g(3, 1.0);
    CHECK_THROWS_AS(optimizer_step(adam, s, p, g, 0.1), LayoutError);
    const std::vector<double> g2(2, 1.0);
    CHECK_THROWS_AS(optimizer_step(OptimizerKind::of(OptimizerType::SGD), s, p, g2, 0.1), InvalidInput);
    OptimizerKind bad = adam;
    bad.beta1 = 1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    CHECK(OptimizerKind::parse("NAdam").type == OptimizerType::Nadam);
    CHECK_THROWS_AS(OptimizerKind::parse("lbfgs"), InvalidInput);
}

TEST_CASE("step decay schedule") {
    CHECK(lr_at_epoch(LrSchedule::StepDecay, 0.005, 49, 100) == 0.005);
    CHECK(lr_at_epoch(LrSchedule::StepDecay, 0.005, 50, 100) == doctest::Approx(0.0005).epsilon(1e-15));
    CHECK(lr_at_epoch(LrSchedule::StepDecay, 0.005, 74, 100) == doctest::Approx(0.0005).epsilon(1e-15));
    CHECK(lr_at_epoch(LrSchedule::StepDecay, 0.005, 75, 100) == doctest::Approx(0.00005).epsilon(1e-15));
    CHECK(lr_at_epoch(LrSchedule::StepDecay, 0.005, 14, 30) == 0.005);
    CHECK(lr_at_epoch(LrSchedule::StepDecay, 0.005, 15, 30) == doctest::Approx(0.0005).epsilon(1e-15));
    CHECK(lr_at_epoch(LrSchedule::StepDecay, 0.005, 22, 30) == doctest::Approx(0.00005).epsilon(1e-15));
    CHECK(lr_at_epoch(LrSchedule::Constant, 0.005, 99, 100) == 0.005);
}

TEST_CASE("trainability") {
    CHECK(trainability(std::vector<double>(31, 1.0)) == 30.0);
    for (int e : {8, 16, 32, 64}) {
        std::vector<double> line(static_cast<std::size_t>(e) + 1);
        for (int i = 0; i <= e; ++i) {
            line[static_cast<std::size_t>(i)] = 1.0 - static_cast<double>(i) / e;
        }
        CHECK(trainability(line) == e / 2.0);
    }
    std::mt19937_64 rng(12);
    const auto curve = oracle::uniform(rng, 40, 0.0, 2.0);
    // trapezoid = full sum minus half the end points
    const double sum = std::accumulate(curve.begin(), curve.end(), 0.0);
    CHECK(std::abs(trainability(curve) - (sum - 0.5 * (curve.front() + curve.back()))) < 1e-12);

    auto lower = curve;
    for (double& v : lower) v *= 0.9;
    CHECK(trainability(lower) < trainability(curve));
    CHECK_THROWS_AS(trainability(std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("initial parameters") {
    const CircuitSpec spec{10, 3, EncodingScheme{}};
    const ParamVector c = initial_params(spec, ParamInit{}, 1);
    CHECK(c.size() == 90);
    for (double v : c) CHECK(v == 0.5);

    ParamInit g;
    g.kind = ParamInit::Kind::Gaussian;
    const CircuitSpec big{100, 3, EncodingScheme{}};
    const ParamVector a = initial_params(big, g, 9);
    CHECK(a == initial_params(big, g, 9));
    CHECK(a != initial_params(big, g, 10));
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    var /= static_cast<double>(a.size() - 1);
    CHECK(std::abs(mean - 0.5) < 0.02);
    CHECK(std::abs(std::sqrt(var) - 0.1) < 0.02);
}

TEST_CASE("full-batch SGD takes the mean-gradient step") {
    auto [train, test] = toy_sets(5);
    TrainConfig c = small_config();
    c.optimizer = OptimizerKind::of(OptimizerType::SGD);
    c.batch_size = static_cast<int>(train.size());
    c.epochs = 1;
    c.lr = 0.3;
    const TrainReport r = fit(c, train, test);

    ParamVector p = initial_params(c.spec, c.init, c.seed);
    std::vector<double> mean(p.size(), 0.0);
    for (const Record& rec : train.records) {
        const double h = oracle::forward(c.spec, p, rec.features);
        const double dl = 2.0 * (h - c.targets[static_cast<std::size_t>(rec.label)]);
        const auto g = gradient(c.spec, p, rec.features);
        for (std::size_t k = 0; k < p.size(); ++k) mean[k] += dl * g[k] / static_cast<double>(train.size());
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        CHECK(std::abs(r.final_params[k] - (p[k] - 0.3 * mean[k])) < 1e-12);
    }
}

TEST_CASE("zero learning rate keeps parameters") {
    auto [train, test] = toy_sets(5);
    TrainConfig c = small_config();
    c.lr = 0.0;
    c.optimizer = OptimizerKind::of(OptimizerType::SGD);
    const TrainReport r = fit(c, train, test);
    CHECK(r.final_params == r.initial_params);
    for (double v : r.train_loss) CHECK(v == r.train_loss.front());
    CHECK(r.trainability == doctest::Approx(r.train_loss.front() * (c.epochs - 1)));
}

TEST_CASE("training is deterministic and makes progress") {
    auto [train, test] = toy_sets(20);
    TrainConfig c = small_config();
    c.batch_size = 7; // leaves a partial last batch
    const TrainReport a = fit(c, train, test);
    const TrainReport b = fit(c, train, test);
    CHECK(a.train_loss == b.train_loss);
    CHECK(a.test_acc == b.test_acc);
    CHECK(a.final_params == b.final_params);
    CHECK(a.train_loss.size() == 4);
    CHECK(a.test_loss.size() == 4);

    const EpochMetrics before = measure(c.spec, a.initial_params, train, c.loss, c.targets);
    CHECK(a.train_loss.back() < before.mean_loss);
    c.seed = 1;
    CHECK(fit(c, train, test).final_params != a.final_params);
}

TEST_CASE("fit input checks") {
    auto [train, test] = toy_sets(5);
    TrainConfig c = small_config();
    CHECK_THROWS_AS(fit(c, Dataset{}, test), InvalidInput);
    Dataset bad = train;
    bad.records[0].label = 5;
    CHECK_THROWS_AS(fit(c, bad, test), DataError);
    c.batch_size = 0;
    CHECK_THROWS_AS(fit(c, train, test), InvalidInput);
}

}
