// metadsp command line: generate, compensate, train, complexity, sweep.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "metadsp/harness/commands.hpp"
#include "metadsp/harness/config.hpp"

namespace {

using namespace metadsp;
using namespace metadsp::harness;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    bool desk = false;
    bool full = false;
};

void add_common(CLI::App* app, Common& c, bool out_required = true) {
    app->add_option("--config", c.config, "experiment config (YAML)");
    app->add_option("--out", c.out, "output path")->required(out_required);
    app->add_option("--seed", c.seed, "root seed; overrides every split seed");
    app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    auto* d = app->add_flag("--desk-scale", c.desk, "desk-scale defaults (default)");
    auto* p = app->add_flag("--full-scale", c.full, "full-scale defaults for unset keys");
    d->excludes(p);
}

ExperimentConfig load(const Common& c) {
    const Scale s = c.full ? Scale::full : Scale::desk;
    ExperimentConfig cfg = c.config.empty() ? default_config(s) : load_config(c.config, s);
    if (c.seed) apply_root_seed(cfg, *c.seed);
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-DSP fiber nonlinearity compensation toolkit"};
    app.require_subcommand(1);

    Common gen_c, comp_c, train_c, cx_c, sweep_c;
    std::string comp_ds, train_ds, sweep_ds, comp_ckpt, sweep_ckpt, comp_split = "test_a", sweep_split = "test_a";
    std::vector<std::string> comp_methods, sweep_methods;
    std::vector<std::size_t> discards;

    auto* gen = app.add_subcommand("generate", "simulate the configured grid into dataset files");
    add_common(gen, gen_c);

    auto* comp = app.add_subcommand("compensate", "run compensation + ADF + metrics on datasets");
    add_common(comp, comp_c);
    comp->add_option("--dataset", comp_ds, "dataset file or directory with index.csv")->required();
    comp->add_option("--method", comp_methods, "edc, dbp, fdbp, meta-dsp (repeatable)");
    comp->add_option("--checkpoint", comp_ckpt, "Meta-DSP checkpoint");
    comp->add_option("--split", comp_split, "index split to use for directories");

    auto* train = app.add_subcommand("train", "TBPTT training of Meta-DSP");
    add_common(train, train_c);
    train->add_option("--dataset", train_ds, "dataset directory")->required();

    auto* cx = app.add_subcommand("complexity", "RMPS table for all methods");
    add_common(cx, cx_c);

    auto* sweep = app.add_subcommand("sweep", "Q/eff-SNR vs power and RMPS, with MPQ summary");
    add_common(sweep, sweep_c);
    sweep->add_option("--dataset", sweep_ds, "dataset directory")->required();
    sweep->add_option("--method", sweep_methods, "methods (repeatable)");
    sweep->add_option("--checkpoint", sweep_ckpt, "Meta-DSP checkpoint");
    sweep->add_option("--split", sweep_split, "index split");
    sweep->add_option("--discard-prefix", discards, "symbols dropped before the metrics (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            const auto rows = cmd_generate(load(gen_c), gen_c.out, gen_c.threads);
            std::cout << "wrote " << rows.size() << " datasets to " << gen_c.out << "\n";
        } else if (*comp) {
            cmd_compensate(load(comp_c), comp_ds, comp_methods, comp_ckpt, comp_c.out, comp_c.threads, comp_split);
        } else if (*train) {
            const auto res = cmd_train(load(train_c), train_ds, train_c.out);
            for (std::size_t e = 0; e < res.epoch_means.size(); ++e)
                std::printf("epoch %zu mean loss %.6f\n", e + 1, res.epoch_means[e]);
        } else if (*cx) {
            cmd_complexity(load(cx_c), cx_c.out);
        } else if (*sweep) {
            cmd_sweep(load(sweep_c), sweep_ds, sweep_methods, sweep_ckpt, sweep_c.out, discards, sweep_c.threads,
                      sweep_split);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
