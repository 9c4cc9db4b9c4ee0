#include "vpinn/driver.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace vpinn {

namespace {

void write_artifacts(const RunConfig& cfg, const std::string& dir, const TrainOutcome& out) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  cfg.save(dir + "/config-echo.json");
  out.history.write_csv(dir + "/history.csv");
  save_params(out.params, dir + "/params.json");
  if (out.initial_spectrum && out.final_spectrum)
    write_spectrum_csv(dir + "/spectrum.csv", *out.initial_spectrum, *out.final_spectrum);
}

}  // namespace

TrainOutcome run_experiment(RunConfig cfg, bool quiet) {
  if (!cfg.resolved) cfg.resolve();
  TrainOutcome out = train(cfg);
  write_artifacts(cfg, cfg.out, out);
  if (!quiet) {
    if (out.diverged)
      std::cout << "run diverged after " << out.history.records.size() << " records\n";
    else
      std::cout << "final relative error: " << 100.0 * out.final_relative_error << " %\n";
  }
  return out;
}

CompareOutcome compare_experiment(RunConfig cfg, bool quiet) {
  if (!cfg.resolved) cfg.resolve();
  MlpParameters init = init_for_config(cfg);

  CompareOutcome out;
  RunConfig ca = cfg;
  ca.optimizer = OptimizerKind::adam;
  ca.out = cfg.out + "/adam";
  out.adam = train(ca, init);
  write_artifacts(ca, ca.out, out.adam);

  RunConfig cl = cfg;
  cl.optimizer = OptimizerKind::ls_adam;
  cl.out = cfg.out + "/ls-adam";
  out.ls_adam = train(cl, init);
  write_artifacts(cl, cl.out, out.ls_adam);

  std::filesystem::create_directories(cfg.out);
  std::ofstream f(cfg.out + "/compare.csv");
  f.precision(17);
  f << "iteration,adam_train_loss,adam_val_loss,adam_error_sq,adam_relative_error,"
       "lsadam_train_loss,lsadam_val_loss,lsadam_error_sq,lsadam_relative_error\n";
  const std::size_t rows =
      std::min(out.adam.history.records.size(), out.ls_adam.history.records.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& a = out.adam.history.records[i];
    const auto& b = out.ls_adam.history.records[i];
    f << a.iteration << ',' << a.train_loss << ',' << a.val_loss << ',' << a.error_sq << ','
      << a.relative_error << ',' << b.train_loss << ',' << b.val_loss << ',' << b.error_sq << ','
      << b.relative_error << '\n';
  }
  if (!quiet) {
    std::cout << "final relative errors (" << cfg.problem << ", " << cfg.iters << " iters):\n"
              << "  adam:    " << 100.0 * out.adam.final_relative_error << " %\n"
              << "  ls-adam: " << 100.0 * out.ls_adam.final_relative_error << " %\n";
  }
  return out;
}

}  // namespace vpinn
