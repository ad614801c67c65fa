#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metadsp/signal.hpp"

namespace metadsp::harness {

// One simulated grid point: centre-channel symbols and 2 SpS receiver
// samples (physical units, before the matched filter).
struct Dataset {
    TaskInfo task;
    std::uint64_t seed = 0;
    CVec tx;
    Waveform rx;

    std::size_t n_symbols() const { return tx.size(); }
};

// "FDSP", u32 version 1, f64 {Rs, P_dbm, spacing, N_ch, rx_sps, n_symbols},
// u64 seed, n_symbols tx pairs, 2 n_symbols rx pairs; little endian.
void write_dataset(const std::string& path, const Dataset& ds);
Dataset read_dataset(const std::string& path);

struct IndexEntry {
    std::string file;  // relative to the index directory
    std::string split;
    double power_dbm = 0.0;
    double symbol_rate_baud = 0.0;
    int n_channels = 1;
    double channel_spacing_hz = 0.0;
    std::size_t n_symbols = 0;
    std::uint64_t seed = 0;
};

constexpr const char* kIndexName = "index.csv";

void write_index(const std::string& dir, const std::vector<IndexEntry>& rows);
std::vector<IndexEntry> read_index(const std::string& dir);

struct DatasetRef {
    IndexEntry entry;
    std::string path;
};
// A dataset file or a directory holding index.csv; split "" keeps every row.
std::vector<DatasetRef> resolve_datasets(const std::string& path, const std::string& split);

}  // namespace metadsp::harness
