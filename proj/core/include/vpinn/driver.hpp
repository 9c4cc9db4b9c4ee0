#pragma once

#include "vpinn/trainer.hpp"

namespace vpinn {

// Executes one configured run and writes history.csv, spectrum.csv,
// params.json and config-echo.json into cfg.out. Returns the outcome;
// diverged runs still flush the partial history.
TrainOutcome run_experiment(RunConfig cfg, bool quiet = false);

struct CompareOutcome {
  TrainOutcome adam;
  TrainOutcome ls_adam;
};

// Runs Adam and LS/Adam from identical initial parameters (same seed, same
// batch streams) and writes each run's artifacts plus a side-by-side
// compare.csv with the loss/error series of both.
CompareOutcome compare_experiment(RunConfig cfg, bool quiet = false);

}  // namespace vpinn
