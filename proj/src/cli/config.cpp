#include "qru/cli.hpp"

#include "qru/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

namespace qru::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

long long parse_integer(const std::string& key, const std::string& value) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        throw InvalidInput("key '" + key + "' expects an integer, got '" + value + "'");
    }
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    const long long v = parse_integer(key, value);
    if (v < -2147483647LL || v > 2147483647LL) {
        throw InvalidInput("key '" + key + "' is out of range");
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = lower(value);
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw InvalidInput("key '" + key + "' expects true/false, got '" + value + "'");
}

std::string real_text(double v) { return fmt::format("{}", v); }

} // namespace

RunConfig::RunConfig() : norm_lo(-std::numbers::pi), norm_hi(std::numbers::pi) {}

double parse_real_token(const std::string& token) {
    const std::string t = lower(trim(token));
    const auto pi_pos = t.find("pi");
    if (pi_pos != std::string::npos && pi_pos + 2 == t.size()) {
        const std::string factor = t.substr(0, pi_pos);
        double k = 1.0;
        if (factor == "-") {
            k = -1.0;
        } else if (!factor.empty() && factor != "+") {
            k = parse_real_token(factor);
        }
        return k * std::numbers::pi;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw InvalidInput("expected a real number, got '" + token + "'");
    }
    return v;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    TrainConfig& t = cfg.train;
    const auto real = [&] {
        try {
            return parse_real_token(value);
        } catch (const InvalidInput&) {
            throw InvalidInput("key '" + key + "' expects a real number, got '" + value + "'");
        }
    };
    if (key == "depth") {
        t.spec.depth = parse_int(key, value);
    } else if (key == "n_features") {
        t.spec.n_features = parse_int(key, value);
    } else if (key == "scheme.axes") {
        t.spec.scheme = EncodingScheme::parse(value, t.spec.scheme.params_per_input);
    } else if (key == "scheme.ppi") {
        t.spec.scheme.params_per_input = parse_int(key, value);
    } else if (key == "lr") {
        t.lr = real();
    } else if (key == "optimizer") {
        const OptimizerKind parsed = OptimizerKind::parse(value);
        t.optimizer.type = parsed.type;
    } else if (key == "optimizer.bias_correction") {
        t.optimizer.bias_correction = parse_bool(key, value);
    } else if (key == "optimizer.beta1") {
        t.optimizer.beta1 = real();
    } else if (key == "optimizer.beta2") {
        t.optimizer.beta2 = real();
    } else if (key == "optimizer.eps") {
        t.optimizer.eps = real();
    } else if (key == "optimizer.rms_decay") {
        t.optimizer.rms_decay = real();
    } else if (key == "optimizer.weight_decay") {
        t.optimizer.weight_decay = real();
    } else if (key == "optimizer.rho") {
        t.optimizer.rho = real();
    } else if (key == "loss.kind") {
        t.loss = LossKind::parse(value, t.loss.delta);
    } else if (key == "loss.delta") {
        t.loss.delta = real();
    } else if (key == "batch_size") {
        t.batch_size = parse_int(key, value);
    } else if (key == "epochs") {
        t.epochs = parse_int(key, value);
    } else if (key == "seed") {
        const long long s = parse_integer(key, value);
        if (s < 0) {
            throw InvalidInput("seed must be non-negative");
        }
        t.seed = static_cast<std::uint64_t>(s);
    } else if (key == "init.kind") {
        const std::string k = lower(value);
        if (k == "constant") {
            t.init.kind = ParamInit::Kind::Constant;
        } else if (k == "gaussian") {
            t.init.kind = ParamInit::Kind::Gaussian;
        } else {
            throw InvalidInput("init.kind must be constant or gaussian, got '" + value + "'");
        }
    } else if (key == "init.center") {
        t.init.center = real();
    } else if (key == "init.std") {
        t.init.std = real();
    } else if (key == "schedule") {
        const std::string k = lower(value);
        if (k == "constant") {
            t.schedule = LrSchedule::Constant;
        } else if (k == "step") {
            t.schedule = LrSchedule::StepDecay;
        } else {
            throw InvalidInput("schedule must be constant or step, got '" + value + "'");
        }
    } else if (key == "normalization.lo") {
        cfg.norm_lo = real();
    } else if (key == "normalization.hi") {
        cfg.norm_hi = real();
    } else if (key == "split_ratio") {
        cfg.split_ratio = real();
    } else if (key == "targets") {
        std::vector<double> targets;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            targets.push_back(parse_real_token(item));
        }
        t.targets = std::move(targets);
    } else {
        throw InvalidInput("unknown config key '" + key + "'");
    }
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const InvalidInput& e) {
            throw InvalidInput("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.train.validate();
    if (!(cfg.norm_lo < cfg.norm_hi)) {
        throw InvalidInput("normalization.lo must be below normalization.hi");
    }
    if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) {
        throw InvalidInput("split_ratio must lie in (0, 1)");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open config file '" + path.string() + "'");
    }
    return parse_config(in);
}

std::string render_config(const RunConfig& cfg) {
    const TrainConfig& t = cfg.train;
    std::string targets;
    for (std::size_t i = 0; i < t.targets.size(); ++i) {
        targets += (i ? "," : "") + real_text(t.targets[i]);
    }
    std::string out;
    const auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    kv("depth", std::to_string(t.spec.depth));
    kv("n_features", std::to_string(t.spec.n_features));
    kv("scheme.ppi", std::to_string(t.spec.scheme.params_per_input));
    kv("scheme.axes", t.spec.scheme.axes());
    kv("lr", real_text(t.lr));
    kv("optimizer", t.optimizer.name());
    kv("optimizer.bias_correction", t.optimizer.bias_correction ? "true" : "false");
    kv("optimizer.beta1", real_text(t.optimizer.beta1));
    kv("optimizer.beta2", real_text(t.optimizer.beta2));
    kv("optimizer.eps", real_text(t.optimizer.eps));
    kv("optimizer.rms_decay", real_text(t.optimizer.rms_decay));
    kv("optimizer.weight_decay", real_text(t.optimizer.weight_decay));
    kv("optimizer.rho", real_text(t.optimizer.rho));
    kv("loss.delta", real_text(t.loss.delta));
    kv("loss.kind", t.loss.name());
    kv("batch_size", std::to_string(t.batch_size));
    kv("epochs", std::to_string(t.epochs));
    kv("seed", std::to_string(t.seed));
    kv("init.kind", t.init.kind == ParamInit::Kind::Gaussian ? "gaussian" : "constant");
    kv("init.center", real_text(t.init.center));
    kv("init.std", real_text(t.init.std));
    kv("schedule", t.schedule == LrSchedule::StepDecay ? "step" : "constant");
    kv("normalization.lo", real_text(cfg.norm_lo));
    kv("normalization.hi", real_text(cfg.norm_hi));
    kv("split_ratio", real_text(cfg.split_ratio));
    kv("targets", targets);
    return out;
}

} // namespace qru::cli
