#include "pimbs/mlp_reference.hpp"

#include <cmath>

namespace pimbs::reference {

namespace {

struct Layers {
    Vec z1, a1, d1, z2, a2, d2, y;
};

Layers eval_layers(const MlpParams& p, const Vec& x) {
    const int h = p.dims.hidden, m = p.dims.output;
    Layers L;
    L.z1 = matvec(p.w1, x);
    L.a1.resize(h);
    L.d1.resize(h);
    for (int i = 0; i < h; ++i) {
        L.z1[i] += p.b1[i];
        L.a1[i] = std::tanh(L.z1[i]);
        L.d1[i] = 1.0 - L.a1[i] * L.a1[i];
    }
    L.z2 = matvec(p.w2, L.a1);
    L.a2.resize(h);
    L.d2.resize(h);
    for (int i = 0; i < h; ++i) {
        L.z2[i] += p.b2[i];
        L.a2[i] = std::tanh(L.z2[i]);
        L.d2[i] = 1.0 - L.a2[i] * L.a2[i];
    }
    L.y = matvec(p.w3, L.a2);
    for (int i = 0; i < m; ++i) L.y[i] += p.b3[i];
    return L;
}

Vec sample_input(const Batch& batch, int s) {
    return Vec(batch.x.row(s), batch.x.row(s) + batch.x.cols);
}

}  // namespace

Vec forward(const MlpParams& p, const Vec& x) { return eval_layers(p, x).y; }

Mat input_jacobian(const MlpParams& p, const Vec& x, int n_theta) {
    const Layers L = eval_layers(p, x);
    const int h = p.dims.hidden, m = p.dims.output;
    Mat g(m, n_theta);
    for (int c = 0; c < n_theta; ++c) {
        Vec t1(h);
        for (int k = 0; k < h; ++k) t1[k] = L.d1[k] * p.w1(k, c);
        Vec t2(h, 0.0);
        for (int i = 0; i < h; ++i) {
            double acc = 0.0;
            for (int k = 0; k < h; ++k) acc += p.w2(i, k) * t1[k];
            t2[i] = L.d2[i] * acc;
        }
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int k = 0; k < h; ++k) acc += p.w3(i, k) * t2[k];
            g(i, c) = acc;
        }
    }
    return g;
}

GradBundle total_loss_and_grad(const MlpParams& p, const Batch& batch, const LossConfig& cfg) {
    const int b = batch.size();
    const int h = p.dims.hidden, m = p.dims.output, n = batch.n_joints;
    const int in = p.dims.input;

    GradBundle out;
    out.grad = MlpParams::zeros(p.dims);
    double basic_acc = 0.0, pinn_acc = 0.0;

    for (int s = 0; s < b; ++s) {
        const Vec x = sample_input(batch, s);
        const Layers L = eval_layers(p, x);

        // data term
        Vec d3(m);
        for (int i = 0; i < m; ++i) {
            const double e = L.y[i] - batch.l(s, i);
            basic_acc += e * e;
            d3[i] = 2.0 / (static_cast<double>(b) * m) * e;
        }
        Vec d2(h);
        for (int k = 0; k < h; ++k) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += p.w3(i, k) * d3[i];
            d2[k] = L.d2[k] * acc;
        }
        Vec d1(h);
        for (int k = 0; k < h; ++k) {
            double acc = 0.0;
            for (int i = 0; i < h; ++i) acc += p.w2(i, k) * d2[i];
            d1[k] = L.d1[k] * acc;
        }
        for (int i = 0; i < m; ++i) {
            out.grad.b3[i] += d3[i];
            for (int k = 0; k < h; ++k) out.grad.w3(i, k) += d3[i] * L.a2[k];
        }
        for (int i = 0; i < h; ++i) {
            out.grad.b2[i] += d2[i];
            for (int k = 0; k < h; ++k) out.grad.w2(i, k) += d2[i] * L.a1[k];
            out.grad.b1[i] += d1[i];
            for (int j = 0; j < in; ++j) out.grad.w1(i, j) += d1[i] * x[j];
        }

        if (!cfg.use_pinn) continue;

        // physics residual, one component at a time:
        //   r_j = sum_i f_i G_ij + tau_j,  G = w3 diag(d2) w2 diag(d1) w1[:, :n]
        Vec v2(h);  // w3^T f
        for (int k = 0; k < h; ++k) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += p.w3(i, k) * batch.f(s, i);
            v2[k] = acc;
        }
        Vec u1(h);  // w2^T (d2 * v2)
        for (int k = 0; k < h; ++k) {
            double acc = 0.0;
            for (int i = 0; i < h; ++i) acc += p.w2(i, k) * L.d2[i] * v2[i];
            u1[k] = acc;
        }

        const double w = 2.0 * cfg.alpha / (static_cast<double>(b) * n);
        for (int j = 0; j < n; ++j) {
            Vec scol(h), qcol(h);
            for (int k = 0; k < h; ++k) scol[k] = L.d1[k] * p.w1(k, j);
            for (int i = 0; i < h; ++i) {
                double acc = 0.0;
                for (int k = 0; k < h; ++k) acc += p.w2(i, k) * scol[k];
                qcol[i] = acc;
            }
            double r = batch.tau(s, j);
            for (int i = 0; i < m; ++i) {
                double acc = 0.0;
                for (int k = 0; k < h; ++k) acc += p.w3(i, k) * L.d2[k] * qcol[k];
                r += acc * batch.f(s, i);
            }
            pinn_acc += r * r;
            const double wr = w * r;

            // dr/dz2 and dr/dz1
            Vec rz2(h);
            for (int k = 0; k < h; ++k) rz2[k] = -2.0 * L.a2[k] * L.d2[k] * v2[k] * qcol[k];
            Vec rz1(h);
            for (int k = 0; k < h; ++k) {
                double acc = 0.0;
                for (int i = 0; i < h; ++i) acc += p.w2(i, k) * rz2[i];
                rz1[k] = L.d1[k] * acc - 2.0 * L.a1[k] * L.d1[k] * u1[k] * p.w1(k, j);
            }

            for (int i = 0; i < m; ++i) {
                for (int k = 0; k < h; ++k)
                    out.grad.w3(i, k) += wr * batch.f(s, i) * L.d2[k] * qcol[k];
            }
            for (int i = 0; i < h; ++i) {
                out.grad.b2[i] += wr * rz2[i];
                for (int k = 0; k < h; ++k)
                    out.grad.w2(i, k) += wr * (rz2[i] * L.a1[k] + L.d2[i] * v2[i] * scol[k]);
                out.grad.b1[i] += wr * rz1[i];
                for (int c = 0; c < in; ++c) out.grad.w1(i, c) += wr * rz1[i] * x[c];
                out.grad.w1(i, j) += wr * L.d1[i] * u1[i];
            }
        }
    }
    out.loss.basic = basic_acc / (static_cast<double>(b) * m);
    if (cfg.use_pinn) out.loss.pinn = pinn_acc / (static_cast<double>(b) * n);

    // zero-pose constraint
    {
        const Vec x0(in, 0.0);
        const Layers L0 = eval_layers(p, x0);
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += L0.y[i] * L0.y[i];
        out.loss.constraint = acc / m;
        if (cfg.use_const) {
            Vec d3(m);
            for (int i = 0; i < m; ++i) d3[i] = 2.0 / m * L0.y[i];
            Vec d2(h), d1(h);
            for (int k = 0; k < h; ++k) {
                double a = 0.0;
                for (int i = 0; i < m; ++i) a += p.w3(i, k) * d3[i];
                d2[k] = L0.d2[k] * a;
            }
            for (int k = 0; k < h; ++k) {
                double a = 0.0;
                for (int i = 0; i < h; ++i) a += p.w2(i, k) * d2[i];
                d1[k] = L0.d1[k] * a;
            }
            for (int i = 0; i < m; ++i) {
                out.grad.b3[i] += d3[i];
                for (int k = 0; k < h; ++k) out.grad.w3(i, k) += d3[i] * L0.a2[k];
            }
            for (int i = 0; i < h; ++i) {
                out.grad.b2[i] += d2[i];
                for (int k = 0; k < h; ++k) out.grad.w2(i, k) += d2[i] * L0.a1[k];
                out.grad.b1[i] += d1[i];
                // x = 0: no w1 contribution
            }
        }
    }

    out.loss.total = out.loss.basic + (cfg.use_const ? out.loss.constraint : 0.0) +
                     (cfg.use_pinn ? cfg.alpha * out.loss.pinn : 0.0);
    return out;
}

}  // namespace pimbs::reference
