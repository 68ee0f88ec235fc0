#include "qru/analysis.hpp"
#include "qru/cli.hpp"
#include "qru/dataio.hpp"
#include "qru/error.hpp"
#include "qru/hpo.hpp"
#include "qru/parallel.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

namespace qru::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultDataSeed = 42;

std::string num(double v) { return fmt::format("{}", v); }

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

void write_atomically(const fs::path& path, const std::string& body) {
    if (path.has_parent_path() && !path.parent_path().empty()) {
        fs::create_directories(path.parent_path());
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write '" + path.string() + "'");
        }
        out << body;
        if (!out.flush()) {
            throw DataError("failed writing '" + path.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

/// Options shared by every subcommand that trains.
struct Common {
    std::string config_path;
    std::string data_path;
    std::string manifest_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    int threads = 1;
};

struct Context {
    RunConfig cfg;
    Dataset raw;
    std::string data_source;
};

Context load_context(const Common& c) {
    Context ctx;
    if (!c.config_path.empty()) {
        ctx.cfg = load_config(c.config_path);
    }
    if (c.seed) {
        ctx.cfg.train.seed = *c.seed;
    }
    if (c.epochs) {
        ctx.cfg.train.epochs = *c.epochs;
    }
    if (c.data_path.empty()) {
        ctx.raw = generate_synthetic(SynthConfig::defaults(), kDefaultDataSeed);
        ctx.data_source = "synthetic:defaults:seed=" + std::to_string(kDefaultDataSeed);
    } else {
        ctx.raw = load_records(c.data_path);
        ctx.data_source = c.data_path;
    }
    if (ctx.raw.empty()) {
        throw DataError("dataset '" + ctx.data_source + "' has no records");
    }
    ctx.cfg.train.spec.n_features = static_cast<int>(ctx.raw.n_features());
    ctx.cfg.train.validate();
    return ctx;
}

/// Manifest first, then outputs, then the manifest again with the end time.
class OutputSet {
public:
    OutputSet(std::string command, fs::path manifest) : manifest_path_(std::move(manifest)) {
        manifest_["command"] = std::move(command);
        manifest_["version"] = kVersion;
        manifest_["started_at"] = utc_now();
    }

    json& manifest() { return manifest_; }

    void add(const fs::path& path, std::string body) { files_.push_back({path, std::move(body)}); }

    void commit() {
        json paths = json::array();
        for (const auto& f : files_) {
            paths.push_back(f.path.string());
        }
        manifest_["outputs"] = paths;
        manifest_["status"] = "writing";
        write_atomically(manifest_path_, manifest_.dump(2) + "\n");
        for (const auto& f : files_) {
            write_atomically(f.path, f.body);
        }
        manifest_["status"] = "complete";
        manifest_["finished_at"] = utc_now();
        write_atomically(manifest_path_, manifest_.dump(2) + "\n");
    }

private:
    struct File {
        fs::path path;
        std::string body;
    };
    fs::path manifest_path_;
    json manifest_;
    std::vector<File> files_;
};

fs::path manifest_for(const Common& c, const std::string& primary) {
    return c.manifest_path.empty() ? fs::path(primary + ".manifest.json") : fs::path(c.manifest_path);
}

void describe_run(json& m, const Context& ctx) {
    m["seed"] = ctx.cfg.train.seed;
    m["data"] = ctx.data_source;
    m["config"] = render_config(ctx.cfg);
}

std::optional<NormRange> parse_norm_name(const std::string& v) {
    if (v == "sym_pi") {
        return norm_symmetric_pi();
    }
    if (v == "zero_2pi") {
        return norm_zero_two_pi();
    }
    if (const auto colon = v.find(':'); colon != std::string::npos) {
        return NormRange{parse_real_token(v.substr(0, colon)), parse_real_token(v.substr(colon + 1))};
    }
    return std::nullopt;
}

std::string curves_csv(const TrainReport& r) {
    std::string s = "epoch,train_loss,test_loss,train_acc,test_acc\n";
    for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
        s += fmt::format("{},{},{},{},{}\n", e, num(r.train_loss[e]), num(r.test_loss[e]), num(r.train_acc[e]),
                         num(r.test_acc[e]));
    }
    return s;
}

std::string hpo_header(const HpoSpace& space) {
    return space.normalizations.empty() ? "index,depth,lr,loss,optimizer,budget,objective,best_so_far\n"
                                        : "index,depth,lr,loss,optimizer,normalization,budget,objective,best_so_far\n";
}

std::string hpo_rows(const std::vector<Trial>& trials) {
    std::string s;
    for (const Trial& t : trials) {
        s += fmt::format("{},{},{},{},{},", t.index, t.config.depth, num(t.config.lr), t.config.loss.name(),
                         optimizer_name(t.config.optimizer));
        if (t.config.normalization) {
            s += t.config.normalization->name() + ",";
        }
        s += fmt::format("{},{},{}\n", t.budget, num(t.objective), num(t.best_so_far));
    }
    return s;
}

/// Train/test splits for every normalization the HPO space can ask for.
struct HpoData {
    RunConfig base;
    Dataset raw;

    double loss_for(const HpoConfig& c, int epochs) const {
        RunConfig cfg = base;
        cfg.train.spec.depth = c.depth;
        cfg.train.lr = c.lr;
        cfg.train.loss = LossKind::parse(c.loss.name(), base.train.loss.delta);
        cfg.train.optimizer.type = c.optimizer;
        cfg.train.epochs = epochs;
        if (c.normalization) {
            cfg.norm_lo = c.normalization->lo;
            cfg.norm_hi = c.normalization->hi;
        }
        return train_on(cfg, raw, base.train.seed).test_loss.back();
    }
};

int cmd_gen_data(const std::string& out_path, int n, std::uint64_t seed, std::optional<double> spread,
                 std::optional<double> overlap, const Common& c) {
    SynthConfig sc = SynthConfig::defaults();
    sc.n_per_class = n;
    if (spread) {
        sc.spread = *spread;
    }
    if (overlap) {
        sc.overlap = *overlap;
    }
    const Dataset ds = generate_synthetic(sc, seed);
    std::ostringstream body;
    write_records(body, ds);

    OutputSet out("gen-data", manifest_for(c, out_path));
    out.manifest()["seed"] = seed;
    out.manifest()["config"] = {{"n_per_class", n}, {"spread", sc.spread}, {"overlap", sc.overlap}};
    out.add(out_path, body.str());
    out.commit();
    return kOk;
}

int cmd_train(const Common& c, const std::string& out_path, const std::string& curves_path, std::ostream& log) {
    const Context ctx = load_context(c);
    const TrainReport r = train_on(ctx.cfg, ctx.raw, ctx.cfg.train.seed);

    json report;
    report["config"] = render_config(ctx.cfg);
    report["epochs"] = r.train_loss.size();
    report["final"] = {{"train_loss", r.train_loss.back()},
                       {"test_loss", r.test_loss.back()},
                       {"train_acc", r.train_acc.back()},
                       {"test_acc", r.test_acc.back()}};
    report["trainability"] = r.trainability;
    report["wall_time_s"] = r.wall_time_s;
    report["final_params"] = r.final_params;

    OutputSet out("train", manifest_for(c, out_path));
    describe_run(out.manifest(), ctx);
    out.manifest()["wall_time_s"] = r.wall_time_s;
    out.add(out_path, report.dump(2) + "\n");
    if (!curves_path.empty()) {
        out.add(curves_path, curves_csv(r));
    }
    out.commit();
    log << fmt::format("final test accuracy {:.4f}, test loss {:.6f}, trainability {:.6f}\n", r.test_acc.back(),
                       r.test_loss.back(), r.trainability);
    return kOk;
}

int cmd_sweep(const Common& c, const std::string& dim, const std::string& values, const std::string& dim2,
              const std::string& values2, int repeats, const std::string& out_path, std::ostream& log) {
    const Context ctx = load_context(c);
    const auto v1 = split_list(values);
    const auto v2 = dim2.empty() ? std::vector<std::string>{""} : split_list(values2);
    if (v1.empty() || v2.empty()) {
        throw InvalidInput("sweep needs at least one value per dimension");
    }
    if (repeats < 1) {
        throw InvalidInput("--repeats must be >= 1");
    }
    struct Job {
        std::string a;
        std::string b;
        int repeat;
        RunConfig cfg;
    };
    std::vector<Job> jobs;
    for (const auto& a : v1) {
        for (const auto& b : v2) {
            for (int r = 0; r < repeats; ++r) {
                RunConfig cfg = ctx.cfg;
                apply_dimension(cfg, dim, a);
                if (!dim2.empty()) {
                    apply_dimension(cfg, dim2, b);
                }
                cfg.train.seed = ctx.cfg.train.seed + static_cast<std::uint64_t>(r);
                cfg.train.validate();
                jobs.push_back({a, b, r, std::move(cfg)});
            }
        }
    }
    std::vector<TrainReport> reports(jobs.size());
    parallel_for(jobs.size(), c.threads,
                 [&](std::size_t i) { reports[i] = train_on(jobs[i].cfg, ctx.raw, jobs[i].cfg.train.seed); });

    std::string csv = dim + (dim2.empty() ? "" : "," + dim2) +
                      ",repeat,seed,final_train_loss,final_test_loss,final_train_acc,final_test_acc,trainability\n";
    json timings = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const TrainReport& r = reports[i];
        csv += jobs[i].a + (dim2.empty() ? "" : "," + jobs[i].b);
        csv += fmt::format(",{},{},{},{},{},{},{}\n", jobs[i].repeat, jobs[i].cfg.train.seed, num(r.train_loss.back()),
                           num(r.test_loss.back()), num(r.train_acc.back()), num(r.test_acc.back()),
                           num(r.trainability));
        timings.push_back(r.wall_time_s);
    }
    OutputSet out("sweep", manifest_for(c, out_path));
    describe_run(out.manifest(), ctx);
    out.manifest()["sweep"] = {{"dim", dim}, {"values", v1}, {"dim2", dim2}, {"values2", dim2.empty() ? json::array() : json(v2)}, {"repeats", repeats}};
    out.manifest()["row_wall_time_s"] = timings;
    out.add(out_path, csv);
    out.commit();
    log << fmt::format("{} sweep rows written to {}\n", jobs.size(), out_path);
    return kOk;
}

int cmd_variability(const Common& c, int runs, bool same_seed, const std::string& out_path, std::ostream& log) {
    const Context ctx = load_context(c);
    const VariabilityResult v = variability_study(ctx.cfg, ctx.raw, runs, ctx.cfg.train.seed, same_seed, c.threads);
    OutputSet out("variability", manifest_for(c, out_path));
    describe_run(out.manifest(), ctx);
    out.manifest()["runs"] = runs;
    out.add(out_path, variability_csv(v));
    out.commit();
    log << fmt::format("test accuracy mean {:.4f} std {:.6f}; test loss mean {:.6f} std {:.6f}\n", v.mean_test_acc,
                       v.std_test_acc, v.mean_test_loss, v.std_test_loss);
    return kOk;
}

int cmd_bayes(const Common& c, BayesOptions opt, bool with_norm, const std::string& out_path, std::ostream& log) {
    const Context ctx = load_context(c);
    const HpoSpace space = HpoSpace::standard(with_norm);
    const HpoData data{ctx.cfg, ctx.raw};
    opt.threads = c.threads;
    opt.budget = ctx.cfg.train.epochs;
    const SearchHistory h =
        bayes_search(space, [&](const HpoConfig& hc) { return data.loss_for(hc, ctx.cfg.train.epochs); }, opt);

    OutputSet out("bayes", manifest_for(c, out_path));
    describe_run(out.manifest(), ctx);
    out.manifest()["bayes"] = {{"n_calls", opt.n_calls}, {"n_initial", opt.n_initial}, {"kappa", opt.kappa},
                               {"seed", opt.seed},       {"capped", h.capped}};
    out.add(out_path, hpo_header(space) + hpo_rows(h.trials));
    out.commit();
    log << fmt::format("{} trials, best objective {}\n", h.trials.size(), num(h.trials.back().best_so_far));
    return kOk;
}

int cmd_hyperband(const Common& c, HyperbandOptions opt, bool with_norm, const std::string& out_path,
                  std::ostream& log) {
    const Context ctx = load_context(c);
    const HpoSpace space = HpoSpace::standard(with_norm);
    const HpoData data{ctx.cfg, ctx.raw};
    opt.threads = c.threads;
    const HyperbandResult h =
        hyperband_search(space, [&](const HpoConfig& hc, int budget) { return data.loss_for(hc, budget); }, opt);

    json brackets = json::array();
    for (const Bracket& b : h.brackets) {
        json rungs = json::array();
        for (const Rung& r : b.rungs) {
            rungs.push_back({{"budget", r.budget}, {"n_configs", r.n_configs}, {"kept", r.kept}});
        }
        brackets.push_back({{"s", b.s}, {"n", b.n}, {"r", b.r}, {"survivor", b.survivor}, {"rungs", rungs}});
    }
    OutputSet out("hyperband", manifest_for(c, out_path));
    describe_run(out.manifest(), ctx);
    out.manifest()["hyperband"] = {{"max_budget", opt.max_budget}, {"eta", opt.eta}, {"seed", opt.seed},
                                   {"brackets", brackets}};
    out.add(out_path, hpo_header(space) + hpo_rows(h.trials));
    out.commit();
    log << fmt::format("{} evaluations over {} brackets, best objective {}\n", h.trials.size(), h.brackets.size(),
                       num(h.trials.back().best_so_far));
    return kOk;
}

struct AnalyzeOptions {
    std::string what;
    std::string depths;
    std::uint64_t params_seed = 0;
    bool unit_scaling = false;
    double lo = -std::numbers::pi;
    double hi = std::numbers::pi;
    int points = 201;
    int max_freq = 3;
    int pairs = 5000;
    int bins = 75;
};

ParamVector analysis_params(const CircuitSpec& spec, const AnalyzeOptions& a) {
    std::mt19937_64 rng(a.params_seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    ParamVector p(param_count(spec));
    for (double& v : p) {
        v = angle(rng);
    }
    if (a.unit_scaling) {
        // Middle gate angle becomes exactly x.
        const int ppi = spec.scheme.params_per_input;
        const int m = spec.scheme.middle_param_count();
        for (std::size_t b = 0; b < p.size(); b += static_cast<std::size_t>(ppi)) {
            if (m == 1) {
                p[b + 1] = 1.0;
            } else if (m == 2) {
                p[b + 1] = 1.0;
                p[b + 2] = 0.0;
            } else if (m == 3) {
                p[b + 1] = 0.0;
                p[b + 2] = 1.0;
                p[b + 3] = 0.0;
            }
        }
    }
    return p;
}

int cmd_analyze(const Common& c, const AnalyzeOptions& a, const std::string& out_path, std::ostream& log) {
    RunConfig cfg;
    if (!c.config_path.empty()) {
        cfg = load_config(c.config_path);
    }
    CircuitSpec spec = cfg.train.spec;
    spec.n_features = 1;
    spec.validate();
    std::vector<int> depths;
    for (const auto& d : split_list(a.depths)) {
        depths.push_back(std::stoi(d));
    }
    if (depths.empty()) {
        depths.push_back(spec.depth);
    }

    std::string csv;
    json summary;
    if (a.what == "curve" || a.what == "spectrum") {
        if (depths.size() != 1) {
            throw InvalidInput("--what " + a.what + " takes a single depth");
        }
        spec.depth = depths.front();
        spec.validate();
        const ParamVector p = analysis_params(spec, a);
        const CurveSample curve = hypothesis_curve(spec, p, a.lo, a.hi, a.points);
        if (a.what == "curve") {
            csv = "x,h\n";
            for (std::size_t i = 0; i < curve.x.size(); ++i) {
                csv += num(curve.x[i]) + "," + num(curve.h[i]) + "\n";
            }
        } else {
            const SpectrumFit fit = spectrum_fit(curve, a.max_freq);
            csv = "freq,cos,sin\n";
            for (int w = 0; w <= fit.max_freq; ++w) {
                csv += fmt::format("{},{},{}\n", w, num(fit.cos_coef[static_cast<std::size_t>(w)]),
                                   num(fit.sin_coef[static_cast<std::size_t>(w)]));
            }
            summary["residual_rms"] = fit.residual_rms;
            log << "residual rms " << num(fit.residual_rms) << "\n";
        }
    } else if (a.what == "expressibility" || a.what == "evenness") {
        csv = a.what == "expressibility" ? "depth,kl\n" : "depth,gap\n";
        for (int d : depths) {
            CircuitSpec s = spec;
            s.depth = d;
            s.validate();
            double v = 0.0;
            if (a.what == "expressibility") {
                v = expressibility_kl(s, {a.pairs, a.bins, a.params_seed, c.threads});
            } else {
                v = evenness_gap(s, analysis_params(s, a), a.lo, a.hi, a.points);
            }
            csv += fmt::format("{},{}\n", d, num(v));
        }
    } else {
        throw InvalidInput("--what must be curve, spectrum, expressibility or evenness");
    }

    OutputSet out("analyze", manifest_for(c, out_path));
    out.manifest()["seed"] = a.params_seed;
    out.manifest()["analysis"] = {{"what", a.what},   {"axes", spec.scheme.axes()}, {"ppi", spec.scheme.params_per_input},
                                  {"depths", depths}, {"unit_scaling", a.unit_scaling}};
    if (!summary.is_null()) {
        out.manifest()["summary"] = summary;
    }
    out.add(out_path, csv);
    out.commit();
    return kOk;
}

void add_common(CLI::App* app, Common& c, bool with_data = true) {
    app->add_option("--config", c.config_path, "Key-value run configuration")->check(CLI::ExistingFile);
    if (with_data) {
        app->add_option("--data", c.data_path, "Calorimeter CSV (default: built-in synthetic set)")
            ->check(CLI::ExistingFile);
        app->add_option("--epochs", c.epochs, "Override the configured epoch count");
    }
    app->add_option("--seed", c.seed, "Override the configured seed");
    app->add_option("--threads", c.threads, "Worker pool width")->check(CLI::PositiveNumber);
    app->add_option("--manifest", c.manifest_path, "Manifest path (default: <out>.manifest.json)");
}

} // namespace

TrainReport train_on(const RunConfig& cfg, const Dataset& raw, std::uint64_t seed) {
    auto [train_raw, test_raw] = split_shuffle(raw, cfg.split_ratio, seed);
    const Dataset train = normalize(train_raw, cfg.norm_lo, cfg.norm_hi);
    const Dataset test = apply_normalization(test_raw, *train.normalization);
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    tc.spec.n_features = static_cast<int>(train.n_features());
    return fit(tc, train, test);
}

VariabilityResult variability_study(const RunConfig& base, const Dataset& raw, int n_runs, std::uint64_t seed,
                                    bool same_seed, int threads) {
    if (n_runs < 2) {
        throw InvalidInput("variability study needs at least two runs");
    }
    RunConfig cfg = base;
    cfg.train.init.kind = ParamInit::Kind::Gaussian;
    VariabilityResult v;
    for (int r = 0; r < n_runs; ++r) {
        v.seeds.push_back(same_seed ? seed : seed + static_cast<std::uint64_t>(r));
    }
    v.runs.resize(v.seeds.size());
    parallel_for(v.seeds.size(), threads, [&](std::size_t i) { v.runs[i] = train_on(cfg, raw, v.seeds[i]); });

    const auto n = static_cast<double>(n_runs);
    for (const TrainReport& r : v.runs) {
        v.mean_test_acc += r.test_acc.back() / n;
        v.mean_test_loss += r.test_loss.back() / n;
    }
    for (const TrainReport& r : v.runs) {
        v.std_test_acc += std::pow(r.test_acc.back() - v.mean_test_acc, 2);
        v.std_test_loss += std::pow(r.test_loss.back() - v.mean_test_loss, 2);
    }
    v.std_test_acc = std::sqrt(v.std_test_acc / (n - 1.0));
    v.std_test_loss = std::sqrt(v.std_test_loss / (n - 1.0));
    return v;
}

std::string variability_csv(const VariabilityResult& v) {
    std::string s = "run,seed,final_test_acc,final_test_loss,final_train_acc,final_train_loss\n";
    for (std::size_t i = 0; i < v.runs.size(); ++i) {
        const TrainReport& r = v.runs[i];
        s += fmt::format("{},{},{},{},{},{}\n", i, v.seeds[i], num(r.test_acc.back()), num(r.test_loss.back()),
                         num(r.train_acc.back()), num(r.train_loss.back()));
    }
    s += fmt::format("mean,,{},{},,\n", num(v.mean_test_acc), num(v.mean_test_loss));
    s += fmt::format("std,,{},{},,\n", num(v.std_test_acc), num(v.std_test_loss));
    return s;
}

void apply_dimension(RunConfig& cfg, const std::string& dim, const std::string& value) {
    if (dim == "depth" || dim == "lr" || dim == "batch_size" || dim == "epochs" || dim == "optimizer") {
        set_config_value(cfg, dim, value);
    } else if (dim == "loss") {
        set_config_value(cfg, "loss.kind", value);
    } else if (dim == "scheme") {
        set_config_value(cfg, "scheme.axes", value);
    } else if (dim == "ppi") {
        set_config_value(cfg, "scheme.ppi", value);
    } else if (dim == "normalization") {
        const auto range = parse_norm_name(value);
        if (!range) {
            throw InvalidInput("normalization values are sym_pi, zero_2pi or lo:hi, got '" + value + "'");
        }
        cfg.norm_lo = range->lo;
        cfg.norm_hi = range->hi;
    } else {
        throw InvalidInput("unknown sweep dimension '" + dim + "'");
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Single-qubit data re-uploading classifier laboratory", "qrulab"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common common;

    std::string gen_out;
    int gen_n = 500;
    std::uint64_t gen_seed = kDefaultDataSeed;
    std::optional<double> gen_spread;
    std::optional<double> gen_overlap;
    auto* gen = app.add_subcommand("gen-data", "Write a synthetic calorimeter dataset");
    gen->add_option("--out", gen_out, "Output CSV")->required();
    gen->add_option("--n", gen_n, "Records per class")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--spread", gen_spread, "Feature standard deviation")->check(CLI::PositiveNumber);
    gen->add_option("--overlap", gen_overlap, "Extra relative spread")->check(CLI::NonNegativeNumber);
    gen->add_option("--manifest", common.manifest_path, "Manifest path");

    std::string train_out;
    std::string train_curves;
    auto* train = app.add_subcommand("train", "Train one classifier");
    add_common(train, common);
    train->add_option("--out", train_out, "JSON report")->required();
    train->add_option("--curves", train_curves, "Per-epoch curves CSV");

    std::string sweep_dim;
    std::string sweep_values;
    std::string sweep_dim2;
    std::string sweep_values2;
    int sweep_repeats = 1;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Train across the values of one or two dimensions");
    add_common(sweep, common);
    sweep->add_option("--dim", sweep_dim, "depth|lr|batch_size|optimizer|loss|normalization|scheme|ppi|epochs")
        ->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
    auto* dim2_opt = sweep->add_option("--dim2", sweep_dim2, "Second dimension for grid sweeps");
    sweep->add_option("--values2", sweep_values2, "Values of the second dimension")->needs(dim2_opt);
    sweep->add_option("--repeats", sweep_repeats, "Runs per value (seed + repeat)");
    sweep->add_option("--out", sweep_out, "Summary CSV")->required();

    int var_runs = 50;
    bool var_same_seed = false;
    std::string var_out;
    auto* variability = app.add_subcommand("variability", "Repeat training with reshuffled data and Gaussian init");
    add_common(variability, common);
    variability->add_option("--runs", var_runs, "Number of runs");
    variability->add_flag("--same-seed", var_same_seed, "Use the base seed for every run");
    variability->add_option("--out", var_out, "Per-run CSV with mean/std rows")->required();

    BayesOptions bopt;
    bool bayes_norm = false;
    std::string bayes_out;
    auto* bayes = app.add_subcommand("bayes", "Gaussian-process search over the hyperparameter grid");
    add_common(bayes, common);
    bayes->add_option("--calls", bopt.n_calls, "Objective evaluations");
    bayes->add_option("--initial", bopt.n_initial, "Random trials before the GP takes over");
    bayes->add_option("--kappa", bopt.kappa, "Exploration weight");
    bayes->add_option("--search-seed", bopt.seed, "Seed for the initial design");
    bayes->add_flag("--with-normalization", bayes_norm, "Add the normalization range dimension");
    bayes->add_option("--out", bayes_out, "Trial history CSV")->required();

    HyperbandOptions hopt;
    bool hb_norm = false;
    std::string hb_out;
    auto* hyperband = app.add_subcommand("hyperband", "Hyperband successive-halving search");
    add_common(hyperband, common);
    hyperband->add_option("--max-budget", hopt.max_budget, "Largest epoch budget R");
    hyperband->add_option("--eta", hopt.eta, "Halving rate");
    hyperband->add_option("--search-seed", hopt.seed, "Seed for config sampling");
    hyperband->add_flag("--with-normalization", hb_norm, "Add the normalization range dimension");
    hyperband->add_option("--out", hb_out, "Trial history CSV")->required();

    AnalyzeOptions aopt;
    std::string an_out;
    auto* analyze = app.add_subcommand("analyze", "Single-feature circuit diagnostics");
    add_common(analyze, common, false);
    analyze->add_option("--what", aopt.what, "curve|spectrum|expressibility|evenness")->required();
    analyze->add_option("--depths", aopt.depths, "Depths to evaluate (one for curve and spectrum)");
    analyze->add_option("--params-seed", aopt.params_seed, "Seed for uniform [0, 2pi) parameters");
    analyze->add_flag("--unit-scaling", aopt.unit_scaling, "Encode x with unit scaling and no bias");
    analyze->add_option("--lo", aopt.lo, "Interval start");
    analyze->add_option("--hi", aopt.hi, "Interval end");
    analyze->add_option("--points", aopt.points, "Grid points");
    analyze->add_option("--max-freq", aopt.max_freq, "Highest fitted frequency");
    analyze->add_option("--pairs", aopt.pairs, "State pairs for expressibility");
    analyze->add_option("--bins", aopt.bins, "Histogram bins for expressibility");
    analyze->add_option("--out", an_out, "Output CSV")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) {
        reversed.pop_back(); // program name
    }
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen_data(gen_out, gen_n, gen_seed, gen_spread, gen_overlap, common);
        }
        if (train->parsed()) {
            return cmd_train(common, train_out, train_curves, out);
        }
        if (sweep->parsed()) {
            return cmd_sweep(common, sweep_dim, sweep_values, sweep_dim2, sweep_values2, sweep_repeats, sweep_out,
                             out);
        }
        if (variability->parsed()) {
            return cmd_variability(common, var_runs, var_same_seed, var_out, out);
        }
        if (bayes->parsed()) {
            if (common.seed) {
                bopt.seed = *common.seed;
            }
            return cmd_bayes(common, bopt, bayes_norm, bayes_out, out);
        }
        if (hyperband->parsed()) {
            if (common.seed) {
                hopt.seed = *common.seed;
            }
            return cmd_hyperband(common, hopt, hb_norm, hb_out, out);
        }
        if (analyze->parsed()) {
            if (common.seed && aopt.params_seed == 0) {
                aopt.params_seed = *common.seed;
            }
            return cmd_analyze(common, aopt, an_out, out);
        }
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const NumericFailure& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kNumericFailure;
    } catch (const Error& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr); }

} // namespace qru::cli
