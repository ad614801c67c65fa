#include "metadsp/harness/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "metadsp/binio.hpp"
#include "metadsp/channel.hpp"
#include "metadsp/harness/csv.hpp"

namespace metadsp::harness {
namespace {

constexpr std::uint32_t kVersion = 1;
const CsvRow kIndexHeader{"file",       "split",     "power_dbm", "symbol_rate_baud", "n_channels",
                          "channel_spacing_hz", "n_symbols", "seed"};

void write_cvec(std::ostream& os, const CVec& v) {
    for (const auto& z : v) {
        binio::write_le<double>(os, z.real());
        binio::write_le<double>(os, z.imag());
    }
}

CVec read_cvec(std::istream& is, std::size_t n) {
    CVec v(n);
    for (auto& z : v) {
        const double re = binio::read_le<double>(is);
        const double im = binio::read_le<double>(is);
        z = {re, im};
    }
    return v;
}

std::size_t as_count(double v, const char* what) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw IoError(std::string("dataset: bad ") + what);
    return static_cast<std::size_t>(v);
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& ds) {
    if (ds.rx.size() != kRxSps * ds.tx.size()) throw std::invalid_argument("dataset rx length must be 2 x symbols");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write dataset: " + path);
    binio::write_magic(os, "FDSP");
    binio::write_le<std::uint32_t>(os, kVersion);
    binio::write_le<double>(os, ds.task.symbol_rate_baud);
    binio::write_le<double>(os, ds.task.power_dbm_per_channel);
    binio::write_le<double>(os, ds.task.channel_spacing_hz);
    binio::write_le<double>(os, ds.task.n_channels);
    binio::write_le<double>(os, kRxSps);
    binio::write_le<double>(os, static_cast<double>(ds.tx.size()));
    binio::write_le<std::uint64_t>(os, ds.seed);
    write_cvec(os, ds.tx);
    write_cvec(os, ds.rx.samples);
    if (!os) throw IoError("failed writing dataset: " + path);
}

Dataset read_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open dataset: " + path);
    try {
        binio::expect_magic(is, "FDSP", "dataset");
        if (binio::read_le<std::uint32_t>(is) != kVersion) throw IoError("unsupported dataset version");
        Dataset ds;
        ds.task.symbol_rate_baud = binio::read_le<double>(is);
        ds.task.power_dbm_per_channel = binio::read_le<double>(is);
        ds.task.channel_spacing_hz = binio::read_le<double>(is);
        ds.task.n_channels = static_cast<int>(as_count(binio::read_le<double>(is), "channel count"));
        const std::size_t sps = as_count(binio::read_le<double>(is), "rx_sps");
        const std::size_t n = as_count(binio::read_le<double>(is), "symbol count");
        ds.seed = binio::read_le<std::uint64_t>(is);
        if (sps != kRxSps) throw IoError("dataset rx_sps must be 2");
        ds.task.validate();
        ds.tx = read_cvec(is, n);
        ds.rx = Waveform(read_cvec(is, sps * n), sps * ds.task.symbol_rate_baud);
        is.peek();
        if (!is.eof()) throw IoError("trailing bytes after payload");
        return ds;
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_index(const std::string& dir, const std::vector<IndexEntry>& rows) {
    std::vector<CsvRow> out;
    for (const auto& r : rows)
        out.push_back({r.file, r.split, format_double(r.power_dbm), format_double(r.symbol_rate_baud),
                       std::to_string(r.n_channels), format_double(r.channel_spacing_hz),
                       std::to_string(r.n_symbols), std::to_string(r.seed)});
    write_csv((std::filesystem::path(dir) / kIndexName).string(), kIndexHeader, out);
}

std::vector<IndexEntry> read_index(const std::string& dir) {
    const auto path = (std::filesystem::path(dir) / kIndexName).string();
    const auto rows = read_csv(path);
    if (rows.empty() || rows[0] != kIndexHeader) throw IoError(path + ": unexpected header");
    std::vector<IndexEntry> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != kIndexHeader.size()) throw IoError(path + ": wrong field count on row " + std::to_string(i));
        IndexEntry e;
        e.file = r[0];
        e.split = r[1];
        e.power_dbm = parse_double(r[2]);
        e.symbol_rate_baud = parse_double(r[3]);
        e.n_channels = std::stoi(r[4]);
        e.channel_spacing_hz = parse_double(r[5]);
        e.n_symbols = std::stoull(r[6]);
        e.seed = std::stoull(r[7]);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<DatasetRef> resolve_datasets(const std::string& path, const std::string& split) {
    namespace fs = std::filesystem;
    std::vector<DatasetRef> out;
    if (fs::is_directory(path)) {
        for (auto& e : read_index(path)) {
            if (!split.empty() && e.split != split) continue;
            const std::string p = (fs::path(path) / e.file).string();
            out.push_back({std::move(e), p});
        }
        if (out.empty()) throw IoError("no datasets for split '" + split + "' in " + path);
        return out;
    }
    if (!fs::exists(path)) throw IoError("dataset not found: " + path);
    const Dataset ds = read_dataset(path);
    IndexEntry e;
    e.file = fs::path(path).filename().string();
    e.power_dbm = ds.task.power_dbm_per_channel;
    e.symbol_rate_baud = ds.task.symbol_rate_baud;
    e.n_channels = ds.task.n_channels;
    e.channel_spacing_hz = ds.task.channel_spacing_hz;
    e.n_symbols = ds.n_symbols();
    e.seed = ds.seed;
    out.push_back({e, path});
    return out;
}

}  // namespace metadsp::harness
