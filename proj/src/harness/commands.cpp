#include "metadsp/harness/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>

#include "metadsp/channel.hpp"
#include "metadsp/harness/csv.hpp"
#include "metadsp/harness/pipeline.hpp"
#include "metadsp/harness/pool.hpp"
#include "metadsp/metrics.hpp"
#include "metadsp/rng.hpp"

namespace metadsp::harness {
namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory: " + dir);
}

void ensure_parent(const std::string& file) {
    const fs::path p = fs::path(file).parent_path();
    if (!p.empty()) ensure_dir(p.string());
}

std::optional<MetaParams> maybe_checkpoint(const std::vector<MethodSpec>& specs, const std::string& checkpoint) {
    bool need = false;
    for (const auto& s : specs) need = need || s.method == "meta-dsp";
    if (!need) return std::nullopt;
    if (checkpoint.empty()) throw ConfigError("method meta-dsp requires --checkpoint");
    return load_checkpoint(checkpoint);
}

struct Evaluation {
    IndexEntry entry;
    std::vector<MethodOutcome> outcomes;
};

std::vector<Evaluation> evaluate_all(const ExperimentConfig& cfg, const std::string& dataset,
                                     const std::vector<MethodSpec>& specs, const MetaParams* meta,
                                     const std::vector<std::size_t>& discards, int threads, const std::string& split) {
    const auto refs = resolve_datasets(dataset, split);
    std::vector<Evaluation> out(refs.size());
    parallel_for(refs.size(), threads, [&](std::size_t i) {
        const Dataset ds = read_dataset(refs[i].path);
        out[i].entry = refs[i].entry;
        for (const auto& s : specs) out[i].outcomes.push_back(run_method(ds, cfg, s, meta, discards));
    });
    return out;
}

}  // namespace

std::vector<GridPoint> grid_points(const GridConfig& g) {
    std::vector<GridPoint> out;
    for (double rs : g.symbol_rates_baud)
        for (int n : g.n_channels)
            for (double p : g.powers_dbm) out.push_back({p, rs, n});
    return out;
}

std::vector<IndexEntry> cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir, int threads) {
    cfg.validate();
    ensure_dir(out_dir);
    const auto points = grid_points(cfg.grid);
    struct Job {
        std::string split;
        std::size_t point;
    };
    std::vector<Job> jobs;
    for (const auto& s : cfg.splits)
        for (std::size_t i = 0; i < points.size(); ++i) jobs.push_back({s, i});
    std::vector<IndexEntry> rows(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        const GridPoint& gp = points[jobs[j].point];
        const TaskInfo task = TaskInfo::make(gp.power_dbm, gp.symbol_rate_baud, gp.n_channels, cfg.channel_spacing_hz);
        const std::uint64_t seed = derive_seed(cfg.split_seed(jobs[j].split), "point", jobs[j].point);
        LinkOptions opts;
        opts.noise = cfg.noise;
        const LinkOutput link = simulate_link(task, cfg.fiber, cfg.n_symbols, seed, opts, cfg.phi_max);
        Dataset ds;
        ds.task = task;
        ds.seed = seed;
        ds.tx = link.tx_symbols.center();
        ds.rx = link.rx;
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%04zu.fdsp", jobs[j].split.c_str(), jobs[j].point);
        write_dataset((fs::path(out_dir) / name).string(), ds);
        rows[j] = {name,     jobs[j].split, gp.power_dbm, gp.symbol_rate_baud, gp.n_channels, task.channel_spacing_hz,
                   cfg.n_symbols, seed};
    });
    write_index(out_dir, rows);
    return rows;
}

void cmd_compensate(const ExperimentConfig& cfg, const std::string& dataset, const std::vector<std::string>& methods,
                    const std::string& checkpoint, const std::string& out_csv, int threads, const std::string& split) {
    const auto specs = expand_methods(cfg, methods.empty() ? cfg.dsp.methods : methods);
    const auto meta = maybe_checkpoint(specs, checkpoint);
    const auto evals = evaluate_all(cfg, dataset, specs, meta ? &*meta : nullptr, {0}, threads, split);
    std::vector<CsvRow> rows;
    for (const auto& e : evals)
        for (const auto& o : e.outcomes) {
            const QualityReport& q = o.quality[0];
            rows.push_back({o.spec.label(), format_double(e.entry.power_dbm), format_double(e.entry.symbol_rate_baud),
                            std::to_string(e.entry.n_channels), format_double(q.ber), format_double(q.q_db),
                            format_double(q.eff_snr_db), format_double(o.rmps)});
        }
    ensure_parent(out_csv);
    write_csv(out_csv,
              {"method", "power_dbm", "symbol_rate_baud", "n_channels", "ber", "q_db", "eff_snr_db", "rmps"}, rows);
}

std::vector<TrainingTask> load_training_tasks(const std::string& dataset_dir, const std::string& split) {
    std::vector<TrainingTask> out;
    int id = 0;
    for (const auto& ref : resolve_datasets(dataset_dir, split)) {
        const Dataset ds = read_dataset(ref.path);
        out.push_back({ds.task, normalized_rx(ds), ds.tx, id++});
    }
    return out;
}

PipelineSpec training_pipeline(const ExperimentConfig& cfg) {
    PipelineSpec spec;
    spec.fiber = cfg.fiber;
    spec.dbp.dbp = DbpConfig{cfg.dsp.fdbp_steps_per_span, true, LinearRoute::spectral};
    spec.adf = cfg.adf();
    spec.use_meta_dbp = true;
    return spec;
}

MetaParams initial_params(const ExperimentConfig& cfg) {
    MetaInit init;
    init.seed = cfg.train.seed;
    init.adf_eta = cfg.dsp.hyper.eta;
    return init_meta_params(cfg.architecture(), init);
}

TrainResult cmd_train(const ExperimentConfig& cfg, const std::string& dataset_dir, const std::string& out_checkpoint) {
    cfg.validate();
    const auto tasks = load_training_tasks(dataset_dir, "train");
    TrainResult res = tbptt_train(tasks, cfg.train, initial_params(cfg), training_pipeline(cfg));
    ensure_parent(out_checkpoint);
    save_checkpoint(out_checkpoint, res.params);
    std::vector<CsvRow> hist, epochs;
    for (const auto& h : res.history)
        hist.push_back({std::to_string(h.epoch), std::to_string(h.segment), std::to_string(h.task_id),
                        format_double(h.loss)});
    for (std::size_t e = 0; e < res.epoch_means.size(); ++e)
        epochs.push_back({std::to_string(e + 1), format_double(res.epoch_means[e])});
    write_csv(out_checkpoint + ".history.csv", {"epoch", "segment", "task_id", "loss"}, hist);
    write_csv(out_checkpoint + ".epochs.csv", {"epoch", "mean_loss"}, epochs);
    return res;
}

void cmd_complexity(const ExperimentConfig& cfg, const std::string& out_csv) {
    cfg.validate();
    std::vector<CsvRow> rows;
    auto emit = [&](const std::string& label, double rs, const ComplexityReport& r) {
        rows.push_back({label, format_double(rs), format_double(r.rmps), format_double(r.n_d), std::to_string(r.n_f),
                        std::to_string(r.n_span), format_double(r.n_stps), std::to_string(r.taps),
                        std::to_string(r.hidden), std::to_string(r.input_dim), std::to_string(r.layers),
                        std::to_string(r.fft_size), std::to_string(r.fft_size_nl)});
    };
    const int ns = cfg.fiber.n_spans, nf = cfg.dsp.n_f, taps = cfg.dsp.taps;
    const int h = cfg.dsp.egru_hidden, l = cfg.dsp.egru_layers;
    const double fs = cfg.dsp.fdbp_steps_per_span;
    for (double rs : cfg.grid.symbol_rates_baud) {
        const int nd = link_kernel_length(cfg.fiber, rs);
        emit("ddlms", rs, rmps_ddlms(taps));
        emit("edc", rs, rmps_edc(nd));
        for (double s : cfg.dsp.dbp_steps_per_span) emit("dbp-stps" + format_double(s), rs, rmps_dbp(ns, s, nd));
        emit("fdbp", rs, rmps_fdbp(ns, fs, nd, nf));
        emit("meta-dbp", rs, rmps_meta_dbp(ns, fs, nd, nf));
        emit("meta-adf", rs, rmps_meta_adf(taps, h, 2, l));
        emit("meta-dsp", rs, rmps_meta_dsp(ns, fs, nd, nf, taps, h, 2, l));
    }
    ensure_parent(out_csv);
    write_csv(out_csv,
              {"method", "symbol_rate_baud", "rmps", "n_d", "n_f", "n_span", "n_stps", "taps", "hidden", "input_dim",
               "layers", "fft_size", "fft_size_nl"},
              rows);
}

void cmd_sweep(const ExperimentConfig& cfg, const std::string& dataset, const std::vector<std::string>& methods,
               const std::string& checkpoint, const std::string& out_dir, const std::vector<std::size_t>& discards,
               int threads, const std::string& split) {
    const std::vector<std::size_t> disc = discards.empty() ? std::vector<std::size_t>{0} : discards;
    const auto specs = expand_methods(cfg, methods.empty() ? cfg.dsp.methods : methods);
    const auto meta = maybe_checkpoint(specs, checkpoint);
    const auto evals = evaluate_all(cfg, dataset, specs, meta ? &*meta : nullptr, disc, threads, split);
    ensure_dir(out_dir);

    std::vector<CsvRow> rows, rmps_rows;
    for (std::size_t m = 0; m < specs.size(); ++m) {
        const std::string label = specs[m].label();
        for (std::size_t d = 0; d < disc.size(); ++d) {
            std::vector<QPoint> q, snr;
            double rmps_sum = 0.0;
            for (const auto& e : evals) {
                const MethodOutcome& o = e.outcomes[m];
                const QualityReport& r = o.quality[d];
                rows.push_back({"point", label, std::to_string(disc[d]), format_double(e.entry.power_dbm),
                                format_double(e.entry.symbol_rate_baud), std::to_string(e.entry.n_channels),
                                format_double(r.q_db), format_double(r.eff_snr_db), format_double(o.rmps)});
                q.push_back({e.entry.power_dbm, e.entry.symbol_rate_baud, e.entry.n_channels, r.q_db});
                snr.push_back({e.entry.power_dbm, e.entry.symbol_rate_baud, e.entry.n_channels, r.eff_snr_db});
                rmps_sum += o.rmps;
            }
            // per-cell maxima, in order of first appearance
            std::vector<std::pair<double, int>> cells;
            std::map<std::pair<double, int>, std::pair<double, double>> best;
            for (std::size_t i = 0; i < q.size(); ++i) {
                const auto key = std::make_pair(q[i].symbol_rate_baud, q[i].n_channels);
                auto it = best.find(key);
                if (it == best.end()) {
                    cells.push_back(key);
                    best[key] = {q[i].q_db, snr[i].q_db};
                } else {
                    it->second.first = std::max(it->second.first, q[i].q_db);
                    it->second.second = std::max(it->second.second, snr[i].q_db);
                }
            }
            for (const auto& key : cells)
                rows.push_back({"max", label, std::to_string(disc[d]), "", format_double(key.first),
                                std::to_string(key.second), format_double(best[key].first),
                                format_double(best[key].second), ""});
            const double rmps_mean = rmps_sum / static_cast<double>(evals.size());
            const double mq = mpq(q), ms = mpq(snr);
            rows.push_back({"mpq", label, std::to_string(disc[d]), "", "", "", format_double(mq), format_double(ms),
                            format_double(rmps_mean)});
            rmps_rows.push_back({label, std::to_string(disc[d]), format_double(rmps_mean), format_double(mq),
                                 format_double(ms)});
        }
    }
    write_csv((fs::path(out_dir) / "sweep.csv").string(),
              {"kind", "method", "discard", "power_dbm", "symbol_rate_baud", "n_channels", "q_db", "eff_snr_db",
               "rmps"},
              rows);
    write_csv((fs::path(out_dir) / "q_vs_rmps.csv").string(),
              {"method", "discard", "rmps", "mpq_q_db", "mpq_eff_snr_db"}, rmps_rows);
}

}  // namespace metadsp::harness
