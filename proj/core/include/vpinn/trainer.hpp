#pragma once

#include <optional>

#include "vpinn/adam.hpp"
#include "vpinn/run_config.hpp"

namespace vpinn {

struct TrainingRecord {
  int iteration = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double error_sq = 0.0;
  double relative_error = 0.0;
  uint64_t ops = 0;
  double wall_seconds = 0.0;
};

struct TrainingHistory {
  std::vector<TrainingRecord> records;
  void write_csv(const std::string& path) const;
};

struct TrainOutcome {
  TrainingHistory history;
  MlpParameters params;
  std::optional<SpectralReport> initial_spectrum;
  std::optional<SpectralReport> final_spectrum;
  bool diverged = false;
  double final_relative_error = 0.0;
};

// Runs one training loop from the given initial parameters. Per iteration:
// draw a fresh integration batch; (ls-adam: assemble B and l, solve the
// regularized least-squares problem for omega); evaluate the loss through
// the action form; record validation metrics; then one Adam step on the
// remaining parameters (alpha alone for ls-adam, alpha and omega jointly for
// adam). The record at iteration t reflects the state entering step t, after
// the LS update; the last record is the final state. A non-finite loss stops
// the run with diverged set and the partial history intact.
TrainOutcome train(const RunConfig& cfg, const MlpParameters& init, bool want_spectra = true);

// Convenience: initializes from the run seed and trains.
TrainOutcome train(const RunConfig& cfg, bool want_spectra = true);

MlpParameters init_for_config(const RunConfig& cfg);

// Fixed validation batch for a config (deterministic per seed).
QuadratureBatch validation_batch(const RunConfig& cfg);

}  // namespace vpinn
