#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metadsp/channel.hpp"
#include "metadsp/dsp_classic.hpp"
#include "metadsp/harness/commands.hpp"
#include "metadsp/harness/pipeline.hpp"
#include "metadsp/meta.hpp"
#include "metadsp/metrics.hpp"

namespace py = pybind11;
using namespace metadsp;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Meta-DSP core: fiber channel simulation, classic and learned compensation, metrics";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<FiberParams>(m, "FiberParams")
        .def(py::init<>())
        .def_readwrite("attenuation_db_per_km", &FiberParams::attenuation_db_per_km)
        .def_readwrite("dispersion_ps_nm_km", &FiberParams::dispersion_ps_nm_km)
        .def_readwrite("gamma_per_w_km", &FiberParams::gamma_per_w_km)
        .def_readwrite("wavelength_nm", &FiberParams::wavelength_nm)
        .def_readwrite("span_length_km", &FiberParams::span_length_km)
        .def_readwrite("n_spans", &FiberParams::n_spans)
        .def_readwrite("noise_figure_db", &FiberParams::noise_figure_db)
        .def_property_readonly("beta2", &FiberParams::beta2)
        .def_property_readonly("link_length_m", &FiberParams::link_length_m);

    py::class_<TaskInfo>(m, "TaskInfo")
        .def(py::init(&TaskInfo::make), py::arg("power_dbm"), py::arg("symbol_rate_baud"), py::arg("n_channels") = 1,
             py::arg("channel_spacing_hz") = 0.0)
        .def_readwrite("power_dbm_per_channel", &TaskInfo::power_dbm_per_channel)
        .def_readwrite("symbol_rate_baud", &TaskInfo::symbol_rate_baud)
        .def_readwrite("n_channels", &TaskInfo::n_channels)
        .def_readwrite("channel_spacing_hz", &TaskInfo::channel_spacing_hz)
        .def_property_readonly("power_w", &TaskInfo::power_w);

    py::class_<Waveform>(m, "Waveform")
        .def(py::init<CVec, double>(), py::arg("samples"), py::arg("sample_rate_hz"))
        .def_readwrite("samples", &Waveform::samples)
        .def_readwrite("sample_rate_hz", &Waveform::sample_rate_hz)
        .def("mean_power", &Waveform::mean_power)
        .def("__len__", &Waveform::size);

    py::class_<LinkOutput>(m, "LinkOutput")
        .def_readonly("rx", &LinkOutput::rx)
        .def_readonly("task", &LinkOutput::task)
        .def_readonly("seed", &LinkOutput::seed)
        .def_property_readonly("tx_symbols", [](const LinkOutput& o) { return o.tx_symbols.center(); });

    m.def("dbm_to_watts", &dbm_to_watts);
    m.def("choose_sps", &choose_sps);
    m.def("choose_dz", &choose_dz, py::arg("params"), py::arg("task"), py::arg("phi_max") = 1e-3);
    m.def(
        "simulate_link",
        [](const TaskInfo& task, const FiberParams& params, std::size_t n_symbols, std::uint64_t seed, bool noise) {
            LinkOptions o;
            o.noise = noise;
            return simulate_link(task, params, n_symbols, seed, o);
        },
        py::arg("task"), py::arg("params"), py::arg("n_symbols"), py::arg("seed"), py::arg("noise") = true);
    m.def("matched_filter", &matched_filter);
    m.def(
        "edc", [](const Waveform& w, const FiberParams& p) { return edc(w, p, p.link_length_m()); }, py::arg("w"),
        py::arg("params"));
    m.def(
        "dbp",
        [](const Waveform& w, const FiberParams& p, double steps_per_span) {
            return dbp(w, p, DbpConfig{steps_per_span, true, LinearRoute::spectral});
        },
        py::arg("w"), py::arg("params"), py::arg("steps_per_span") = 1.0);
    m.def(
        "fdbp",
        [](const Waveform& w, const FiberParams& p, double steps_per_span, const RVec& c) {
            return fdbp(w, p, DbpConfig{steps_per_span, true, LinearRoute::spectral}, c);
        },
        py::arg("w"), py::arg("params"), py::arg("steps_per_span"), py::arg("kernel"));
    m.def(
        "ddlms",
        [](const CVec& samples, const CVec& pilots, int taps, int pilot_count, double eta) {
            AdfRunConfig cfg;
            cfg.taps = taps;
            cfg.pilot_count = pilot_count;
            cfg.hyper.eta = eta;
            return adf_run(pad_for_adf(samples, taps, cfg.stride), pilots, cfg, Constellation::qam16(),
                           AdfWeights::center_spike(taps))
                .y;
        },
        py::arg("samples"), py::arg("pilots"), py::arg("taps") = 32, py::arg("pilot_count") = 200,
        py::arg("eta") = 1.0 / 128.0);

    m.def("q_from_ber", &q_from_ber);
    m.def("effective_snr_db", &effective_snr_db);
    m.def("erfcinv", &erfcinv);
    m.def("rmps_ddlms", [](int taps) { return rmps_ddlms(taps).rmps; });
    m.def("rmps_edc", [](int n_d) {
        auto r = rmps_edc(n_d);
        return py::make_tuple(r.rmps, r.fft_size);
    });
    m.def("rmps_dbp", [](int ns, double st, int nd) { return rmps_dbp(ns, st, nd).rmps; });
    m.def("rmps_fdbp", [](int ns, double st, int nd, int nf) { return rmps_fdbp(ns, st, nd, nf).rmps; });
    m.def(
        "rmps_meta_adf", [](int taps, int h, int hi, int l) { return rmps_meta_adf(taps, h, hi, l).rmps; },
        py::arg("taps"), py::arg("hidden") = 1, py::arg("input_dim") = 2, py::arg("layers") = 2);

    py::class_<MetaParams>(m, "MetaParams")
        .def_property_readonly("trainable_size", &MetaParams::trainable_size)
        .def("tensor", [](const MetaParams& p, const std::string& n) { return p.get(n).data; });
    m.def(
        "init_meta_params",
        [](std::uint64_t seed) {
            MetaInit i;
            i.seed = seed;
            return init_meta_params(MetaArchitecture{}, i);
        },
        py::arg("seed") = 1);
    m.def("hypernet_forward", &hypernet_forward);
    m.def("save_checkpoint", &save_checkpoint);
    m.def("load_checkpoint", &load_checkpoint);

    using namespace metadsp::harness;
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("fiber", &ExperimentConfig::fiber)
        .def_readwrite("n_symbols", &ExperimentConfig::n_symbols)
        .def_readwrite("noise", &ExperimentConfig::noise);
    m.def(
        "load_config", [](const std::string& p) { return load_config(p); }, py::arg("path"));
    m.def(
        "parse_config", [](const std::string& t) { return parse_config(t); }, py::arg("text"));
    m.def("cmd_generate", &cmd_generate, py::arg("config"), py::arg("out_dir"), py::arg("threads") = 1);
    m.def("cmd_compensate", &cmd_compensate, py::arg("config"), py::arg("dataset"), py::arg("methods"),
          py::arg("checkpoint"), py::arg("out_csv"), py::arg("threads") = 1, py::arg("split") = "test_a");
    m.def("cmd_complexity", &cmd_complexity, py::arg("config"), py::arg("out_csv"));

    py::class_<IndexEntry>(m, "IndexEntry")
        .def_readonly("file", &IndexEntry::file)
        .def_readonly("split", &IndexEntry::split)
        .def_readonly("power_dbm", &IndexEntry::power_dbm)
        .def_readonly("seed", &IndexEntry::seed);
}
