#include "cpmfit/app/app.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include CPMFIT_CLI11_HEADER

#include "commands.hpp"
#include "cpmfit/app/artifacts.hpp"
#include "cpmfit/app/config.hpp"
#include "cpmfit/errors.hpp"
#include "cpmfit/metrics.hpp"

namespace cpmfit::app {

namespace {

// Raw flag values; only the ones given on the command line override the
// config file.
struct Flags {
    std::string input;
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string metric;
    std::string init;
    std::string solver;
    std::size_t degree = 0;
    std::string mode;
    bool normalize_speed = true;
    bool normalize = true;
    double target = 0.0;
    std::size_t repeats = 0;
};

struct Options {
    CLI::Option* input = nullptr;
    CLI::Option* config = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* metric = nullptr;
    CLI::Option* init = nullptr;
    CLI::Option* solver = nullptr;
    CLI::Option* degree = nullptr;
    CLI::Option* mode = nullptr;
    CLI::Option* normalize_speed = nullptr;
    CLI::Option* normalize = nullptr;
    CLI::Option* target = nullptr;
    CLI::Option* repeats = nullptr;
};

bool given(const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; }

Options add_common(CLI::App& cmd, Flags& f) {
    Options o;
    o.input = cmd.add_option("input", f.input, "Map CSV with header speed,m_dot,pi");
    o.config = cmd.add_option("--config", f.config, "JSON config file; flags override its values");
    o.seed = cmd.add_option("--seed", f.seed, "Run seed (falls back to CPMFIT_SEED, then 0)");
    o.out = cmd.add_option("--out", f.out, "Output directory");
    o.metric = cmd.add_option("--metric", f.metric, "Fitting objective")
                   ->check(CLI::IsMember({"rmse", "mape", "ortho"}));
    o.init = cmd.add_option("--init", f.init, "Global initialization")->check(CLI::IsMember({"none", "pso", "de"}));
    o.solver = cmd.add_option("--solver", f.solver, "Local solver")->check(CLI::IsMember({"nm", "qn"}));
    o.mode = cmd.add_option("--mode", f.mode, "Evaluation direction")
                 ->check(CLI::IsMember({"pressure", "massflow"}));
    o.normalize = cmd.add_option("--normalize", f.normalize, "Min-max normalize the map before fitting (default true)");
    return o;
}

void add_prediction(CLI::App& cmd, Flags& f, Options& o) {
    o.degree = cmd.add_option("--degree", f.degree, "Polynomial degree of the beta regression");
    o.normalize_speed =
        cmd.add_option("--normalize-speed", f.normalize_speed, "Map speeds to [0,1] before regression");
}

RunConfig build_config(const Flags& f, const Options& o) {
    RunConfig cfg;
    if (given(o.config)) apply_json(cfg, read_text_file(f.config));
    if (given(o.input)) cfg.input = f.input;
    if (given(o.seed)) cfg.seed = f.seed;
    if (given(o.out)) cfg.out_dir = f.out;
    if (given(o.metric)) cfg.fit.metric = parse_metric(f.metric);
    if (given(o.init)) cfg.fit.init_strategy = parse_init(f.init);
    if (given(o.solver)) cfg.fit.local_solver = parse_solver(f.solver);
    if (given(o.mode)) {
        cfg.fit.mode = parse_mode(f.mode);
        cfg.predict.eval_mode = cfg.fit.mode;
    }
    if (given(o.normalize)) cfg.normalize = f.normalize;
    if (given(o.degree)) cfg.predict.degree = f.degree;
    if (given(o.normalize_speed)) cfg.predict.normalize_speed = f.normalize_speed;
    if (given(o.target)) cfg.target = f.target;
    if (given(o.repeats)) cfg.repeats = f.repeats;
    cfg.fit.validate();
    cfg.predict.validate();
    return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Superellipse speedline fitting and prediction for compressor maps", "cpmfit"};
    app.require_subcommand(1);

    Flags flags;
    CLI::App* fit = app.add_subcommand("fit", "Fit every speedline of a map");
    CLI::App* predict = app.add_subcommand("predict", "Predict the speedline at --target");
    CLI::App* crossval = app.add_subcommand("crossval", "Leave-one-out prediction over all speedlines");
    CLI::App* bench = app.add_subcommand("bench", "Compare initialization strategies over repeated fits");

    Options fit_opts = add_common(*fit, flags);
    Options predict_opts = add_common(*predict, flags);
    add_prediction(*predict, flags, predict_opts);
    predict_opts.target = predict->add_option("--target", flags.target, "Target speed");
    Options crossval_opts = add_common(*crossval, flags);
    add_prediction(*crossval, flags, crossval_opts);
    Options bench_opts = add_common(*bench, flags);
    bench_opts.repeats = bench->add_option("--repeats", flags.repeats, "Fits per strategy and speedline (default 10)");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("cpmfit");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kHardError;
    }

    try {
        if (fit->parsed()) return detail::cmd_fit(build_config(flags, fit_opts), out, err);
        if (predict->parsed()) return detail::cmd_predict(build_config(flags, predict_opts), out, err);
        if (crossval->parsed()) return detail::cmd_crossval(build_config(flags, crossval_opts), out, err);
        if (bench->parsed()) return detail::cmd_bench(build_config(flags, bench_opts), out, err);
    } catch (const ParseError& e) {
        err << "cpmfit: parse error: " << e.what() << "\n";
        return kHardError;
    } catch (const std::exception& e) {
        err << "cpmfit: " << e.what() << "\n";
        return kHardError;
    }
    return kHardError;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace cpmfit::app
