#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pimbs/arm_model.hpp"
#include "pimbs/mlp.hpp"
#include "pimbs/trainer.hpp"

namespace pimbs {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error("config: " + msg) {}
};

/// JSON experiment description. Unknown keys are rejected; all paths are
/// resolved relative to the config file.
struct ExperimentConfig {
    ArmModel model = ArmModel::default_model();

    MapKind kind = MapKind::AL;
    std::vector<int> n_train{5};
    int eval_size = 1000;
    uint64_t data_seed = 0;
    std::string external_csv;  // empty: simulator data

    // -1 means "use the scale default" (desk: 100/5000; --full-scale: 1000/20000)
    int hidden = -1;
    int epochs = -1;
    AdamHyper adam;
    int eval_stride = 10;
    std::vector<uint64_t> seeds{1, 2, 3, 4, 5};

    std::vector<std::string> config_names{"basic", "basic+const", "basic+pinn",
                                          "basic+const+pinn"};
    double alpha = 1e-5;
    std::vector<double> alphas{1e-5, 1e-6, 1e-7, 1e-8};

    std::string output_dir = "out";

    uint64_t config_hash = 0;  // FNV-1a of the raw config bytes

    std::vector<LossConfig> loss_configs() const;
    int effective_hidden(bool full_scale) const;
    int effective_epochs(bool full_scale) const;
};

/// Parses and validates; throws ConfigError on schema violations and
/// std::runtime_error on I/O failure.
ExperimentConfig load_experiment_config(const std::string& path);

uint64_t fnv1a64(const std::string& bytes);

}  // namespace pimbs
