#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pimbs/mlp.hpp"

namespace pimbs {

/// Everything one training run needs besides data and seed.
struct RunSpec {
    MapKind kind = MapKind::AL;
    LossConfig loss;
    AdamHyper adam;
    int hidden = 100;
    int epochs = 5000;
    int eval_stride = 10;  // metric-row stride; best-epoch tracking is per epoch
};

struct MetricsRow {
    int epoch = 0;
    double l_basic = 0, l_const = 0, l_pinn = 0, l_train = 0, l_eval = 0;
};

struct RunMetrics {
    std::vector<MetricsRow> rows;
    int best_epoch = -1;             // argmin over epochs of training L_basic (first hit)
    double best_train_basic = 0;
    double l_best_eval = 0;          // L_eval at best_epoch (raw)
    double wall_seconds = 0;
    bool failed = false;
    std::string error;
};

struct TrainResult {
    MlpParams best_params;  // snapshot at best_epoch
    RunMetrics metrics;
};

/// Full-batch training: one composite-loss gradient step per epoch, metric
/// rows every `eval_stride` epochs, parameters returned at the epoch with
/// the lowest training L_basic. Aborts (failed = true) on non-finite loss.
TrainResult train_one(const RunSpec& spec, const Batch& train, const Batch& eval,
                      uint64_t init_seed);

/// L_basic on an evaluation set.
double evaluate(const MlpParams& p, const Batch& eval);

/// Where experiment data comes from: the simulator, or an external dataset
/// that is shuffle-split per run.
struct DataSource {
    const ArmModel* model = nullptr;    // simulator mode
    const Dataset* external = nullptr;  // external mode (exactly one set)
    int eval_size = 1000;               // simulator mode only
    uint64_t base_seed = 0;
};

struct ExperimentData {
    Dataset train_ds, eval_ds;
    Batch train, eval;
};

/// Deterministic per-run data. Simulator mode draws train and eval sets from
/// independent substreams of (base_seed, run_seed); external mode
/// shuffle-splits the provided dataset.
ExperimentData prepare_data(const DataSource& source, MapKind kind, int n_train,
                            uint64_t run_seed);

struct RunRecord {
    LossConfig cfg;
    int n_train = 0;
    uint64_t seed = 0;
    RunMetrics metrics;
    double h0_norm = 0;  // ||h(0)|| of the selected model
};

struct SummaryRow {
    std::string config;
    double alpha = 0;  // 0 when the config has no physics term
    int n_train = 0;
    double mean_x1e5 = 0;  // mean L^best_eval, display-scaled by 1e5
    double std_x1e5 = 0;   // sample std over seeds, same scaling
    int n_seeds = 0;
    int failures = 0;
};

struct CurvePoint {
    int epoch = 0;
    double mean = 0, stdev = 0;
};

struct AblationResult {
    std::vector<SummaryRow> summary;
    std::map<std::string, std::vector<CurvePoint>> curves;  // key: curve id per (config, n)
    std::vector<RunRecord> runs;
};

/// Curve/file identifier for one (config, n_train) cell.
std::string curve_id(const LossConfig& cfg, int n_train, bool tag_alpha);

/// Runs configs x n_train x seeds (seeds deduped, data shared across configs
/// within a seed), aggregates mean +/- sample std of L^best_eval and the
/// per-epoch L_eval curves. Independent runs execute in parallel, capped by
/// PIMBS_THREADS. Failures are per-cell counts, never fatal.
AblationResult run_ablation(const DataSource& source, const RunSpec& base,
                            const std::vector<LossConfig>& configs,
                            const std::vector<int>& n_train_values,
                            const std::vector<uint64_t>& seeds);

/// Basic and Basic+Const baselines plus Basic+Const+PINN at each alpha.
AblationResult alpha_sweep(const DataSource& source, const RunSpec& base,
                           const std::vector<double>& alphas,
                           const std::vector<int>& n_train_values,
                           const std::vector<uint64_t>& seeds);

void write_metrics_csv(const RunMetrics& m, const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);
void write_curves_csv(const std::vector<CurvePoint>& points, const std::string& path);

/// Run-level parallelism cap: PIMBS_THREADS when set, else all cores.
int run_parallelism();

}  // namespace pimbs
