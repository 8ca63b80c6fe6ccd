// Times the batched OpenMP gradient/forward kernels against the serial
// per-sample reference on representative problem sizes and checks that the
// two agree. Run from the build tree: ./pimbs-bench [repeats]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "pimbs/mlp.hpp"
#include "pimbs/mlp_kernels.hpp"
#include "pimbs/mlp_reference.hpp"
#include "pimbs/rng.hpp"

using namespace pimbs;

namespace {

Batch random_batch(int b, int n, int m, bool atl, Rng& rng) {
    Batch batch;
    batch.n_joints = n;
    batch.n_muscles = m;
    const int in = atl ? n + m : n;
    batch.x.resize(b, in);
    batch.l.resize(b, m);
    batch.f.resize(b, m);
    batch.tau.resize(b, n);
    for (int s = 0; s < b; ++s) {
        for (int j = 0; j < n; ++j) batch.x(s, j) = rng.uniform(-0.5, 0.5);
        for (int i = 0; i < m; ++i) {
            batch.f(s, i) = rng.uniform(0.0, 100.0);
            if (atl) batch.x(s, n + i) = batch.f(s, i);
            batch.l(s, i) = rng.uniform(-0.05, 0.05);
        }
        for (int j = 0; j < n; ++j) batch.tau(s, j) = rng.uniform(-3.0, 3.0);
    }
    return batch;
}

double rel_diff(const GradBundle& a, const GradBundle& b) {
    double num = 0.0, den = 1e-30;
    auto acc = [&](const Vec& x, const Vec& y) {
        for (size_t i = 0; i < x.size(); ++i) {
            num = std::max(num, std::fabs(x[i] - y[i]));
            den = std::max(den, std::fabs(y[i]));
        }
    };
    acc(a.grad.w1.a, b.grad.w1.a);
    acc(a.grad.b1, b.grad.b1);
    acc(a.grad.w2.a, b.grad.w2.a);
    acc(a.grad.b2, b.grad.b2);
    acc(a.grad.w3.a, b.grad.w3.a);
    acc(a.grad.b3, b.grad.b3);
    return num / den;
}

template <typename F>
double time_ms(int repeats, F&& fn) {
    fn();  // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void bench_grad(int b, int h, bool atl, int repeats) {
    const int n = 2, m = 4;
    Rng rng(42);
    const Batch batch = random_batch(b, n, m, atl, rng);
    const MlpParams p = init_params({batch.inputs(), h, m}, 7);
    LossConfig cfg{.use_const = true, .use_pinn = true, .alpha = 1e-5};

    GradBundle ref, par, ser;
    const double t_ref =
        time_ms(repeats, [&] { ref = reference::total_loss_and_grad(p, batch, cfg); });
    kernels::set_parallel(false);
    const double t_ser = time_ms(repeats, [&] { ser = total_loss_and_grad(p, batch, cfg); });
    kernels::set_parallel(true);
    const double t_par = time_ms(repeats, [&] { par = total_loss_and_grad(p, batch, cfg); });

    std::printf("grad  %-4s B=%-4d H=%-5d  ref %9.3f ms  serial %9.3f ms  omp %9.3f ms  "
                "speedup %4.2fx  max-rel-diff %.2e\n",
                atl ? "atl" : "al", b, h, t_ref, t_ser, t_par, t_ser / t_par,
                std::max(rel_diff(par, ref), rel_diff(ser, ref)));
}

void bench_eval(int b, int h, int repeats) {
    const int n = 2, m = 4;
    Rng rng(43);
    const Batch batch = random_batch(b, n, m, false, rng);
    const MlpParams p = init_params({n, h, m}, 9);

    Mat y;
    kernels::set_parallel(false);
    const double t_ser = time_ms(repeats, [&] { y = forward_batch(p, batch.x); });
    kernels::set_parallel(true);
    const double t_par = time_ms(repeats, [&] { y = forward_batch(p, batch.x); });
    std::printf("eval  al  B=%-4d H=%-5d  serial %9.3f ms  omp %9.3f ms  speedup %4.2fx\n", b,
                h, t_ser, t_par, t_ser / t_par);
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 20;
    std::printf("kernel benchmark, %d repeats per row\n", repeats);
    bench_grad(5, 100, false, repeats);
    bench_grad(30, 100, true, repeats);
    bench_grad(5, 1000, false, std::max(1, repeats / 4));
    bench_grad(30, 1000, true, std::max(1, repeats / 4));
    bench_eval(1000, 100, repeats);
    bench_eval(1000, 1000, std::max(1, repeats / 4));
    return 0;
}
