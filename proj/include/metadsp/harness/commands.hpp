#pragma once

#include <string>
#include <vector>

#include "metadsp/harness/config.hpp"
#include "metadsp/harness/dataset.hpp"
#include "metadsp/training.hpp"

namespace metadsp::harness {

struct GridPoint {
    double power_dbm = 0.0;
    double symbol_rate_baud = 0.0;
    int n_channels = 1;
};
// Rate-major, then channel count, then power.
std::vector<GridPoint> grid_points(const GridConfig& g);

// Writes <split>_NNNN.fdsp for every split and grid point plus index.csv.
std::vector<IndexEntry> cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir, int threads = 1);

// Rows: method, power_dbm, symbol_rate_baud, n_channels, ber, q_db, eff_snr_db, rmps.
void cmd_compensate(const ExperimentConfig& cfg, const std::string& dataset, const std::vector<std::string>& methods,
                    const std::string& checkpoint, const std::string& out_csv, int threads = 1,
                    const std::string& split = "test_a");

std::vector<TrainingTask> load_training_tasks(const std::string& dataset_dir, const std::string& split = "train");
PipelineSpec training_pipeline(const ExperimentConfig& cfg);
MetaParams initial_params(const ExperimentConfig& cfg);
// Writes the checkpoint, <checkpoint>.history.csv and <checkpoint>.epochs.csv.
TrainResult cmd_train(const ExperimentConfig& cfg, const std::string& dataset_dir, const std::string& out_checkpoint);

// One row per method and symbol rate of the grid.
void cmd_complexity(const ExperimentConfig& cfg, const std::string& out_csv);

// Writes sweep.csv (point, max and mpq rows) and q_vs_rmps.csv into out_dir.
void cmd_sweep(const ExperimentConfig& cfg, const std::string& dataset, const std::vector<std::string>& methods,
               const std::string& checkpoint, const std::string& out_dir, const std::vector<std::size_t>& discards,
               int threads = 1, const std::string& split = "test_a");

}  // namespace metadsp::harness
