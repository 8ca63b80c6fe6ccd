#include "pimbs/trainer.hpp"

#include "pimbs/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "pimbs/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pimbs {

namespace {

// sub-stream tags for one run
enum : uint64_t { kTagTrain = 1, kTagEval = 2, kTagInit = 3, kTagSplit = 4 };

uint64_t run_base(uint64_t base_seed, uint64_t run_seed) {
    return derive_seed(base_seed, run_seed);
}

double sample_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

int run_parallelism() {
#ifdef _OPENMP
    int max_threads = omp_get_max_threads();
#else
    int max_threads = 1;
#endif
    if (const char* env = std::getenv("PIMBS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<int>(std::min<long>(v, max_threads));
    }
    return max_threads;
}

double evaluate(const MlpParams& p, const Batch& eval) {
    const Mat y = forward_batch(p, eval.x);
    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double e = y.a[i] - eval.l.a[i];
        acc += e * e;
    }
    return acc / static_cast<double>(y.size());
}

TrainResult train_one(const RunSpec& spec, const Batch& train, const Batch& eval,
                      uint64_t init_seed) {
    if (spec.epochs < 1) throw std::invalid_argument("train_one: epochs must be >= 1");
    if (train.size() < 1) throw std::invalid_argument("train_one: empty training set");
    const auto t0 = std::chrono::steady_clock::now();

    const MlpDims dims{train.inputs(), spec.hidden, train.n_muscles};
    MlpParams params = init_params(dims, init_seed);
    AdamState adam = AdamState::init(dims);

    TrainResult res;
    RunMetrics& m = res.metrics;
    m.best_train_basic = std::numeric_limits<double>::infinity();

    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        const GradBundle gb = total_loss_and_grad(params, train, spec.loss);
        if (!std::isfinite(gb.loss.total)) {
            m.failed = true;
            m.error = "non-finite training loss at epoch " + std::to_string(epoch) +
                      "; consider a smaller learning rate";
            break;
        }
        if (gb.loss.basic < m.best_train_basic) {
            m.best_train_basic = gb.loss.basic;
            m.best_epoch = epoch;
            res.best_params = params;
        }
        if (epoch % spec.eval_stride == 0) {
            MetricsRow row;
            row.epoch = epoch;
            row.l_basic = gb.loss.basic;
            row.l_const = gb.loss.constraint;
            row.l_pinn = spec.loss.use_pinn ? gb.loss.pinn : loss_pinn(params, train);
            row.l_train = gb.loss.total;
            row.l_eval = evaluate(params, eval);
            m.rows.push_back(row);
        }
        adam_step(params, gb.grad, adam, spec.adam);
    }

    if (!m.failed) {
        m.l_best_eval = evaluate(res.best_params, eval);
    } else {
        m.l_best_eval = std::numeric_limits<double>::quiet_NaN();
    }
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

ExperimentData prepare_data(const DataSource& source, MapKind kind, int n_train,
                            uint64_t run_seed) {
    ExperimentData d;
    const uint64_t rb = run_base(source.base_seed, run_seed);
    if (source.external) {
        d.train_ds = Dataset{};
        auto parts = split(*source.external, n_train, derive_seed(rb, kTagSplit));
        d.train_ds = std::move(parts.first);
        d.eval_ds = std::move(parts.second);
    } else {
        if (!source.model) throw std::invalid_argument("prepare_data: no data source");
        if (kind == MapKind::AL) {
            d.train_ds = generate_al(*source.model, n_train, derive_seed(rb, kTagTrain));
            d.eval_ds = generate_al(*source.model, source.eval_size, derive_seed(rb, kTagEval));
        } else {
            d.train_ds = generate_atl(*source.model, n_train, derive_seed(rb, kTagTrain));
            d.eval_ds = generate_atl(*source.model, source.eval_size, derive_seed(rb, kTagEval));
        }
    }
    d.train = make_batch(d.train_ds, kind);
    d.eval = make_batch(d.eval_ds, kind);
    return d;
}

std::string curve_id(const LossConfig& cfg, int n_train, bool tag_alpha) {
    std::string id = cfg.slug() + "_n" + std::to_string(n_train);
    if (tag_alpha && cfg.use_pinn) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "_a%g", cfg.alpha);
        id += buf;
    }
    return id;
}

namespace {

AblationResult run_grid(const DataSource& source, const RunSpec& base,
                        const std::vector<LossConfig>& configs,
                        const std::vector<int>& n_train_values,
                        const std::vector<uint64_t>& seeds_in, bool tag_alpha) {
    if (configs.empty() || n_train_values.empty() || seeds_in.empty())
        throw std::invalid_argument("run_ablation: empty config/n_train/seed list");

    // duplicate seeds would only repeat identical runs; keep first occurrence
    std::vector<uint64_t> seeds;
    for (uint64_t s : seeds_in)
        if (std::find(seeds.begin(), seeds.end(), s) == seeds.end()) seeds.push_back(s);

    // data is shared by all configs within one (n_train, seed) cell
    const int nn = static_cast<int>(n_train_values.size());
    const int ns = static_cast<int>(seeds.size());
    const int nc = static_cast<int>(configs.size());
    std::vector<ExperimentData> data(static_cast<size_t>(nn) * ns);
    for (int a = 0; a < nn; ++a)
        for (int b = 0; b < ns; ++b)
            data[static_cast<size_t>(a) * ns + b] =
                prepare_data(source, base.kind, n_train_values[a], seeds[b]);

    AblationResult out;
    out.runs.resize(static_cast<size_t>(nn) * ns * nc);

    const int threads = run_parallelism();
    const int total = nn * ns * nc;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int idx = 0; idx < total; ++idx) {
        const int a = idx / (ns * nc);
        const int b = (idx / nc) % ns;
        const int c = idx % nc;
        const ExperimentData& d = data[static_cast<size_t>(a) * ns + b];
        RunSpec spec = base;
        spec.loss = configs[c];
        RunRecord rec;
        rec.cfg = configs[c];
        rec.n_train = n_train_values[a];
        rec.seed = seeds[b];
        const uint64_t init_seed = derive_seed(run_base(source.base_seed, seeds[b]), kTagInit);
        TrainResult tr = train_one(spec, d.train, d.eval, init_seed);
        rec.metrics = std::move(tr.metrics);
        if (!rec.metrics.failed) {
            const Vec h0 = forward(tr.best_params, Vec(tr.best_params.dims.input, 0.0));
            rec.h0_norm = norm2(h0);
        }
        out.runs[idx] = std::move(rec);
    }

    // aggregate in fixed (config, n_train) order
    for (int c = 0; c < nc; ++c) {
        for (int a = 0; a < nn; ++a) {
            std::vector<double> vals;
            std::vector<const RunMetrics*> ok_runs;
            int failures = 0;
            for (int b = 0; b < ns; ++b) {
                const RunRecord& rec = out.runs[static_cast<size_t>(a) * ns * nc + b * nc + c];
                if (rec.metrics.failed) {
                    ++failures;
                } else {
                    vals.push_back(rec.metrics.l_best_eval);
                    ok_runs.push_back(&rec.metrics);
                }
            }
            SummaryRow row;
            row.config = configs[c].name();
            row.alpha = configs[c].use_pinn ? configs[c].alpha : 0.0;
            row.n_train = n_train_values[a];
            row.n_seeds = ns;
            row.failures = failures;
            if (!vals.empty()) {
                double mean = 0.0;
                for (double v : vals) mean += v;
                mean /= static_cast<double>(vals.size());
                row.mean_x1e5 = 1e5 * mean;
                row.std_x1e5 = 1e5 * sample_std(vals, mean);
            } else {
                row.mean_x1e5 = std::numeric_limits<double>::quiet_NaN();
                row.std_x1e5 = std::numeric_limits<double>::quiet_NaN();
            }
            out.summary.push_back(row);

            // mean/std L_eval curves over seeds (rows align: same stride)
            if (!ok_runs.empty()) {
                const size_t n_rows = ok_runs.front()->rows.size();
                bool aligned = true;
                for (const RunMetrics* rm : ok_runs)
                    if (rm->rows.size() != n_rows) aligned = false;
                if (aligned) {
                    std::vector<CurvePoint> curve(n_rows);
                    for (size_t r = 0; r < n_rows; ++r) {
                        std::vector<double> ys;
                        ys.reserve(ok_runs.size());
                        for (const RunMetrics* rm : ok_runs) ys.push_back(rm->rows[r].l_eval);
                        double mean = 0.0;
                        for (double y : ys) mean += y;
                        mean /= static_cast<double>(ys.size());
                        curve[r] = {ok_runs.front()->rows[r].epoch, mean, sample_std(ys, mean)};
                    }
                    out.curves[curve_id(configs[c], n_train_values[a], tag_alpha)] =
                        std::move(curve);
                }
            }
        }
    }
    return out;
}

}  // namespace

AblationResult run_ablation(const DataSource& source, const RunSpec& base,
                            const std::vector<LossConfig>& configs,
                            const std::vector<int>& n_train_values,
                            const std::vector<uint64_t>& seeds) {
    return run_grid(source, base, configs, n_train_values, seeds, /*tag_alpha=*/false);
}

AblationResult alpha_sweep(const DataSource& source, const RunSpec& base,
                           const std::vector<double>& alphas,
                           const std::vector<int>& n_train_values,
                           const std::vector<uint64_t>& seeds) {
    if (alphas.empty()) throw std::invalid_argument("alpha_sweep: empty alpha list");
    std::vector<LossConfig> configs;
    configs.push_back(LossConfig{});                          // Basic
    configs.push_back(LossConfig{.use_const = true});         // Basic+Const
    for (double a : alphas)
        configs.push_back(LossConfig{.use_const = true, .use_pinn = true, .alpha = a});
    return run_grid(source, base, configs, n_train_values, seeds, /*tag_alpha=*/true);
}

namespace {

void put_double(std::ofstream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

void write_metrics_csv(const RunMetrics& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "epoch,l_basic,l_const,l_pinn,l_train,l_eval\n";
    for (const MetricsRow& r : m.rows) {
        out << r.epoch << ',';
        put_double(out, r.l_basic);
        out << ',';
        put_double(out, r.l_const);
        out << ',';
        put_double(out, r.l_pinn);
        out << ',';
        put_double(out, r.l_train);
        out << ',';
        put_double(out, r.l_eval);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "config,alpha,n_train,mean_lbest_eval_x1e5,std_lbest_eval_x1e5,n_seeds,failures\n";
    for (const SummaryRow& r : rows) {
        out << r.config << ',';
        put_double(out, r.alpha);
        out << ',' << r.n_train << ',';
        put_double(out, r.mean_x1e5);
        out << ',';
        put_double(out, r.std_x1e5);
        out << ',' << r.n_seeds << ',' << r.failures << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_curves_csv(const std::vector<CurvePoint>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "epoch,mean,std\n";
    for (const CurvePoint& p : points) {
        out << p.epoch << ',';
        put_double(out, p.mean);
        out << ',';
        put_double(out, p.stdev);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace pimbs
