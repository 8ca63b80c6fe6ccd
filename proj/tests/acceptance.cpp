// Acceptance suite: runs every acceptance criterion at its pinned tolerance
// and prints one PASS/FAIL line per criterion. Exit code = number of
// failures. Optional argv: criterion numbers to run (default: all).
//
// The desk-scale experiments (criteria 4-8) use the default arm, hidden
// width 100, 5000 epochs, full-batch Adam, seeds 1-5, 1000-point eval sets,
// and per-epoch eval recording.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pimbs/arm_model.hpp"
#include "pimbs/cli.hpp"
#include "pimbs/dataset.hpp"
#include "pimbs/mlp.hpp"
#include "pimbs/rng.hpp"
#include "pimbs/tension_qp.hpp"
#include "pimbs/trainer.hpp"
#include "../tests/support/oracles.hpp"

using namespace pimbs;
namespace fs = std::filesystem;

namespace {

const ArmModel kArm = ArmModel::default_model();
const std::vector<uint64_t> kSeeds{1, 2, 3, 4, 5};
constexpr int kHidden = 100;
constexpr int kEpochs = 5000;

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int id, bool pass, const std::string& detail, double seconds) {
    std::printf("%s criterion %2d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, detail.c_str(),
                seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Batch random_mlp_batch(int b, bool atl, uint64_t seed) {
    Rng rng(seed);
    Batch batch;
    batch.n_joints = 2;
    batch.n_muscles = 4;
    batch.x.resize(b, atl ? 6 : 2);
    batch.l.resize(b, 4);
    batch.f.resize(b, 4);
    batch.tau.resize(b, 2);
    for (int s = 0; s < b; ++s) {
        for (int j = 0; j < 2; ++j) batch.x(s, j) = rng.uniform(-0.5, 0.5);
        for (int i = 0; i < 4; ++i) {
            batch.f(s, i) = rng.uniform(0.0, 5.0);
            if (atl) batch.x(s, 2 + i) = batch.f(s, i);
            batch.l(s, i) = rng.uniform(-0.1, 0.1);
        }
        for (int j = 0; j < 2; ++j) batch.tau(s, j) = rng.uniform(-1.0, 1.0);
    }
    return batch;
}

// ---------------------------------------------------------------- criterion 1
void criterion_gradients() {
    Timer timer;
    double worst_jac = 0.0, worst_cos = 1.0, worst_norm = 0.0;
    const std::vector<std::string> configs{"basic", "basic+const", "basic+pinn",
                                           "basic+const+pinn"};
    for (int t = 0; t < 50; ++t) {
        const bool atl = (t % 2) == 1;
        const MlpParams p = init_params({atl ? 6 : 2, 8, 4}, 9000 + t);
        const Batch batch = random_mlp_batch(3, atl, 500 + t);

        // input Jacobian vs central differences over the theta inputs
        const Vec x(batch.x.row(0), batch.x.row(0) + batch.x.cols);
        const Mat g = input_jacobian(p, x, 2);
        const Mat fd =
            testing::fd_jacobian([&](const Vec& xx) { return forward(p, xx); }, x, 1e-5);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < g.rows; ++i)
            for (int c = 0; c < g.cols; ++c) {
                num = std::max(num, std::fabs(g(i, c) - fd(i, c)));
                den = std::max(den, std::fabs(fd(i, c)));
            }
        worst_jac = std::max(worst_jac, num / den);

        // parameter gradients of every loss configuration
        for (const std::string& name : configs) {
            const LossConfig cfg = LossConfig::parse(name, 1e-3);
            const GradBundle gb = total_loss_and_grad(p, batch, cfg);
            const Vec analytic = testing::flatten_params(gb.grad);
            const Vec fdg = testing::fd_param_gradient(
                p,
                [&](const MlpParams& q) {
                    double total = loss_basic(q, batch);
                    if (cfg.use_const) total += loss_const(q);
                    if (cfg.use_pinn) total += cfg.alpha * loss_pinn(q, batch);
                    return total;
                },
                1e-4);
            worst_cos = std::min(worst_cos, testing::cosine_similarity(analytic, fdg));
            worst_norm = std::max(worst_norm,
                                  std::fabs(norm2(analytic) - norm2(fdg)) / norm2(fdg));
        }
    }
    const double secs = timer.seconds();
    const bool pass = worst_jac < 1e-5 && worst_cos > 1.0 - 1e-8 && worst_norm < 1e-4 &&
                      secs < 30.0;
    report(1, pass,
           fmt("gradient checks: jac rel %.2e (<1e-5), cos 1-%.2e (>1-1e-8), norm rel %.2e "
               "(<1e-4)",
               worst_jac, 1.0 - worst_cos, worst_norm),
           secs);
}

// ---------------------------------------------------------------- criterion 2
void criterion_simulator() {
    Timer timer;
    Rng rng(777);
    double worst_g = 0.0, worst_tau = 0.0;
    for (int t = 0; t < 100; ++t) {
        JointState q;
        q.theta = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        const Mat g = muscle_jacobian(kArm, q);
        const Mat fd = testing::fd_jacobian(
            [&](const Vec& x) {
                JointState qq;
                qq.theta = {x[0], x[1]};
                return muscle_lengths_geom(kArm, qq);
            },
            Vec(q.theta.begin(), q.theta.end()), 1e-6);
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < g.size(); ++i) {
            num = std::max(num, std::fabs(g.a[i] - fd.a[i]));
            den = std::max(den, std::fabs(fd.a[i]));
        }
        worst_g = std::max(worst_g, num / den);

        const Vec tau = gravity_torque(kArm, q);
        const Mat fdu = testing::fd_jacobian(
            [&](const Vec& x) {
                JointState qq;
                qq.theta = {x[0], x[1]};
                return Vec{potential_energy(kArm, qq)};
            },
            Vec(q.theta.begin(), q.theta.end()), 1e-6);
        double tn = 0.0, td = 0.0;
        for (int j = 0; j < 2; ++j) {
            tn = std::max(tn, std::fabs(tau[j] - fdu(0, j)));
            td = std::max(td, std::fabs(fdu(0, j)));
        }
        worst_tau = std::max(worst_tau, tn / std::max(td, 1e-6));
    }

    double worst_elastic = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double f = i * 1.0;
        const double back = elastic_tension(kArm, elastic_stretch(kArm, {f}))[0];
        worst_elastic = std::max(worst_elastic, std::fabs(back - f) / (1.0 + f));
    }

    double worst_id = 0.0;
    for (const Dataset& ds : {generate_al(kArm, 1000, 31), generate_atl(kArm, 1000, 37)}) {
        for (const Sample& s : ds.samples) {
            JointState q;
            q.theta = {s.theta[0], s.theta[1]};
            const Mat g = muscle_jacobian(kArm, q);
            for (int j = 0; j < 2; ++j) {
                double acc = s.tau[j];
                for (int i = 0; i < 4; ++i) acc += g(i, j) * s.f[i];
                worst_id = std::max(worst_id, std::fabs(acc));
            }
        }
    }

    const double secs = timer.seconds();
    const bool pass = worst_g < 1e-6 && worst_tau < 1e-6 && worst_elastic < 1e-9 &&
                      worst_id < 1e-8 && secs < 10.0;
    report(2, pass,
           fmt("simulator: jac fd %.2e, torque fd %.2e (<1e-6), elastic %.2e (<1e-9), "
               "torque identity %.2e (<1e-8)",
               worst_g, worst_tau, worst_elastic, worst_id),
           secs);
}

// ---------------------------------------------------------------- criterion 3
void criterion_qp() {
    Timer timer;
    Rng rng(555);
    double worst_kkt = 0.0, worst_obj = 0.0;
    for (int t = 0; t < 100; ++t) {
        JointState q;
        q.theta = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        QpSpec spec;
        spec.g = muscle_jacobian(kArm, q);
        spec.tau = gravity_torque(kArm, q);
        spec.w = QpSpec::identity_weights(4);
        spec.f_min = rng.uniform(0.0, 300.0);
        const QpSolution sol = solve_tension_qp(spec);

        double kkt = 0.0;
        for (double v : sol.f) kkt = std::max(kkt, std::max(0.0, spec.f_min - v));
        Vec r(2, 0.0);
        for (int j = 0; j < 2; ++j) {
            r[j] = spec.tau[j];
            for (int i = 0; i < 4; ++i) r[j] += spec.g(i, j) * sol.f[i];
        }
        kkt = std::max(kkt, inf_norm(r) / (1.0 + inf_norm(spec.tau)));
        for (double mu : sol.dual_bound) kkt = std::max(kkt, std::max(0.0, -mu));
        Vec stat(4, 0.0);
        for (int i = 0; i < 4; ++i) {
            for (int k = 0; k < 4; ++k) stat[i] += 2.0 * spec.w(i, k) * sol.f[k];
            for (int j = 0; j < 2; ++j) stat[i] += spec.g(i, j) * sol.dual_eq[j];
        }
        for (size_t a = 0; a < sol.active_set.size(); ++a)
            stat[sol.active_set[a]] -= sol.dual_bound[a];
        kkt = std::max(kkt, inf_norm(stat) / (1.0 + inf_norm(sol.f)));
        worst_kkt = std::max(worst_kkt, kkt);

        const testing::PgResult pg = testing::qp_projected_gradient(spec);
        worst_obj = std::max(worst_obj, std::fabs(sol.objective - pg.objective) /
                                            (1.0 + std::fabs(pg.objective)));
    }
    const double secs = timer.seconds();
    const bool pass = worst_kkt < 1e-9 && worst_obj < 1e-6 && secs < 10.0;
    report(3, pass,
           fmt("QP: worst KKT residual %.2e (<1e-9), objective vs oracle %.2e (<1e-6)",
               worst_kkt, worst_obj),
           secs);
}

// -------------------------------------------------------- criteria 4 through 8
RunSpec desk_spec(MapKind kind) {
    RunSpec spec;
    spec.kind = kind;
    spec.hidden = kHidden;
    spec.epochs = kEpochs;
    spec.eval_stride = 1;
    spec.loss = LossConfig::parse("basic", 1e-5);
    return spec;
}

double cell_mean(const AblationResult& res, const std::string& config, double alpha,
                 int n_train) {
    for (const SummaryRow& row : res.summary)
        if (row.config == config && row.n_train == n_train &&
            (alpha == 0.0 || row.alpha == alpha))
            return row.mean_x1e5;
    return std::numeric_limits<double>::quiet_NaN();
}

double cell_std(const AblationResult& res, const std::string& config, double alpha,
                int n_train) {
    for (const SummaryRow& row : res.summary)
        if (row.config == config && row.n_train == n_train &&
            (alpha == 0.0 || row.alpha == alpha))
            return row.std_x1e5;
    return std::numeric_limits<double>::quiet_NaN();
}

void criteria_trends(const std::function<bool(int)>& enabled) {
    DataSource src;
    src.model = &kArm;
    src.eval_size = 1000;
    src.base_seed = 0;

    const std::vector<LossConfig> all_four{
        LossConfig::parse("basic", 1e-5), LossConfig::parse("basic+const", 1e-5),
        LossConfig::parse("basic+pinn", 1e-5), LossConfig::parse("basic+const+pinn", 1e-5)};

    // criterion 4 + 7 (and the n=5 side of 6): AL-Map, all four configurations
    AblationResult al5;
    if (enabled(4) || enabled(6) || enabled(7)) {
        Timer t4;
        al5 = run_ablation(src, desk_spec(MapKind::AL), all_four, {5}, kSeeds);
        const double basic = cell_mean(al5, "Basic", 0, 5);
        const double bcp = cell_mean(al5, "Basic+Const+PINN", 0, 5);
        const double bc = cell_mean(al5, "Basic+Const", 0, 5);
        const double bp = cell_mean(al5, "Basic+PINN", 0, 5);
        if (enabled(4)) {
            int failures = 0;
            for (const SummaryRow& row : al5.summary) failures += row.failures;
            const bool reduction = bcp <= 0.8 * basic;
            const bool minimum = bcp <= bc && bcp <= bp && bcp <= basic;
            report(4, reduction && minimum && failures == 0,
                   fmt("AL n=5 (x1e5): Basic %.2f, +Const %.2f, +PINN %.2f, +Const+PINN %.2f; "
                       "reduction %.0f%% (need >=20%%), combined is %s",
                       basic, bc, bp, bcp, 100.0 * (1.0 - bcp / basic),
                       minimum ? "the minimum" : "NOT the minimum"),
                   t4.seconds());
        }
        if (enabled(7)) {
            // criterion 7: ||h(0)|| with vs without the zero-pose constraint
            double with_c = 0.0, without_c = 0.0;
            int nw = 0, nwo = 0;
            for (const RunRecord& rec : al5.runs) {
                if (rec.metrics.failed) continue;
                if (rec.cfg.use_const) {
                    with_c += rec.h0_norm;
                    ++nw;
                } else {
                    without_c += rec.h0_norm;
                    ++nwo;
                }
            }
            with_c /= nw;
            without_c /= nwo;
            report(7, with_c < without_c,
                   fmt("mean ||h(0)||: with Const %.3e < without %.3e", with_c, without_c),
                   0.0);
        }
    }

    // criterion 6: the Basic -> Basic+Const+PINN gap shrinks from n=5 to n=10
    if (enabled(6)) {
        Timer t6;
        const std::vector<LossConfig> pair{LossConfig::parse("basic", 1e-5),
                                           LossConfig::parse("basic+const+pinn", 1e-5)};
        const AblationResult al10 =
            run_ablation(src, desk_spec(MapKind::AL), pair, {10}, kSeeds);
        const double b5 = cell_mean(al5, "Basic", 0, 5);
        const double c5 = cell_mean(al5, "Basic+Const+PINN", 0, 5);
        const double b10 = cell_mean(al10, "Basic", 0, 10);
        const double c10 = cell_mean(al10, "Basic+Const+PINN", 0, 10);
        const double rel5 = (b5 - c5) / b5, rel10 = (b10 - c10) / b10;
        const double gap5 = b5 - c5, gap10 = b10 - c10;
        report(6, rel10 < rel5 || gap10 < gap5,
               fmt("AL gap: rel reduction %.0f%% (n=5) -> %.0f%% (n=10), abs gap %.2f -> %.2f "
                   "(x1e5)",
                   100 * rel5, 100 * rel10, gap5, gap10),
               t6.seconds());
    }

    // criterion 5: ATL-Map, N^train = 10, all four configurations
    AblationResult atl10;
    if (enabled(5) || enabled(8)) {
        Timer t5;
        atl10 = run_ablation(src, desk_spec(MapKind::ATL), all_four, {10}, kSeeds);
        if (enabled(5)) {
            const double basic = cell_mean(atl10, "Basic", 0, 10);
            const double bcp = cell_mean(atl10, "Basic+Const+PINN", 0, 10);
            int failures = 0;
            for (const SummaryRow& row : atl10.summary) failures += row.failures;
            report(5, bcp <= 0.9 * basic && failures == 0,
                   fmt("ATL n=10 (x1e5): Basic %.2f vs Basic+Const+PINN %.2f; reduction %.0f%% "
                       "(need >=10%%)",
                       basic, bcp, 100.0 * (1.0 - bcp / basic)),
                   t5.seconds());
        }
    }

    // criterion 8: alpha insensitivity on simulator ATL data
    if (enabled(8)) {
        Timer t8;
        const std::vector<LossConfig> a7{LossConfig::parse("basic+const+pinn", 1e-7)};
        const AblationResult atl_a7 =
            run_ablation(src, desk_spec(MapKind::ATL), a7, {10}, kSeeds);
        const double m5 = cell_mean(atl10, "Basic+Const+PINN", 1e-5, 10);
        const double s5 = cell_std(atl10, "Basic+Const+PINN", 1e-5, 10);
        const double m7 = cell_mean(atl_a7, "Basic+Const+PINN", 1e-7, 10);
        const double s7 = cell_std(atl_a7, "Basic+Const+PINN", 1e-7, 10);
        const double pooled = std::sqrt(0.5 * (s5 * s5 + s7 * s7));
        report(8, std::fabs(m5 - m7) < pooled,
               fmt("alpha sweep (x1e5): 1e-5 gives %.2f+/-%.2f, 1e-7 gives %.2f+/-%.2f, "
                   "|diff| %.2f < pooled std %.2f",
                   m5, s5, m7, s7, std::fabs(m5 - m7), pooled),
               t8.seconds());
    }
}

// ---------------------------------------------------------------- criterion 9
void criterion_determinism() {
    Timer timer;
    const fs::path tmp = fs::temp_directory_path() / "pimbs_acceptance_det";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    {
        std::ofstream cfg(tmp / "exp.json");
        cfg << R"({
  "data": {"kind": "atl", "n_train": 5, "eval_size": 50, "seed": 11},
  "train": {"epochs": 300, "hidden": 32, "eval_stride": 10, "seeds": [4]},
  "losses": {"configs": ["basic+const+pinn"], "alpha": 1e-5}
})";
    }
    std::ostringstream sink;
    bool pass = true;
    std::string detail = "metrics CSVs identical across reruns";
    for (const char* sub : {"a", "b"}) {
        const int code = cli_run({"train", "--config", (tmp / "exp.json").string(), "--output",
                                  (tmp / sub).string()},
                                 sink, sink);
        if (code != 0) {
            pass = false;
            detail = "train command failed";
        }
    }
    if (pass) {
        const fs::path name = "metrics_atl_n5_basic_const_pinn_seed4.csv";
        std::ifstream a(tmp / "a" / name), b(tmp / "b" / name);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        if (sa.str().empty() || sa.str() != sb.str()) {
            pass = false;
            detail = "metrics CSVs differ between reruns";
        }
    }
    fs::remove_all(tmp);
    report(9, pass, detail, timer.seconds());
}

// --------------------------------------------------------------- criterion 10
void criterion_robot_ingestion() {
    Timer timer;
    const fs::path tmp = fs::temp_directory_path() / "pimbs_acceptance_robot";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    // synthetic 496-sample set in the 5-joint 10-muscle robot schema
    Dataset robot;
    robot.n_joints = 5;
    robot.n_muscles = 10;
    robot.kind = MapKind::ATL;
    robot.provenance = "external";
    Rng rng(4242);
    for (int s = 0; s < 496; ++s) {
        Sample smp;
        smp.theta.resize(5);
        smp.f.resize(10);
        smp.l.resize(10);
        smp.tau.resize(5);
        double tsum = 0.0;
        for (double& v : smp.theta) {
            v = rng.uniform(-0.5, 0.5);
            tsum += v;
        }
        for (int i = 0; i < 10; ++i) {
            smp.f[i] = rng.uniform(10.0, 300.0);
            smp.l[i] = 0.02 * std::sin(tsum + i) + 1e-5 * smp.f[i];
        }
        for (double& v : smp.tau) v = rng.uniform(-5.0, 5.0);
        robot.samples.push_back(std::move(smp));
    }
    save_csv(robot, (tmp / "robot.csv").string());

    {
        std::ofstream cfg(tmp / "exp.json");
        cfg << R"({
  "data": {"kind": "atl", "n_train": 30, "seed": 3, "external_csv": "robot.csv"},
  "train": {"epochs": 50, "hidden": 16, "eval_stride": 10, "seeds": [1, 2]},
  "losses": {"alphas": [1e-5, 1e-6, 1e-7, 1e-8]}
})";
    }
    std::ostringstream out, err;
    const int code = cli_run({"alpha-sweep", "--config", (tmp / "exp.json").string()}, out, err);

    int rows = 0;
    std::ifstream in(tmp / "out/summary.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    const bool pass = code == 0 && rows == 6;  // 2 baselines + 4 alphas
    fs::remove_all(tmp);
    report(10, pass,
           fmt("496-row robot-schema fixture ingested, alpha sweep exit %d, %d summary rows",
               code, rows),
           timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    auto enabled = [&](int id) { return wanted.empty() || wanted.count(id); };

    std::printf("pimbs acceptance suite (hidden %d, %d epochs, %zu seeds)\n", kHidden, kEpochs,
                kSeeds.size());
    if (enabled(1)) criterion_gradients();
    if (enabled(2)) criterion_simulator();
    if (enabled(3)) criterion_qp();
    if (enabled(4) || enabled(5) || enabled(6) || enabled(7) || enabled(8))
        criteria_trends(enabled);
    if (enabled(9)) criterion_determinism();
    if (enabled(10)) criterion_robot_ingestion();

    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
