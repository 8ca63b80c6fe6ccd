#include "pimbs/mlp.hpp"

#include "pimbs/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pimbs/mlp_kernels.hpp"
#include "pimbs/rng.hpp"

namespace pimbs {

namespace k = kernels;

MlpParams MlpParams::zeros(MlpDims dims) {
    MlpParams p;
    p.dims = dims;
    p.w1.resize(dims.hidden, dims.input);
    p.w2.resize(dims.hidden, dims.hidden);
    p.w3.resize(dims.output, dims.hidden);
    p.b1.assign(dims.hidden, 0.0);
    p.b2.assign(dims.hidden, 0.0);
    p.b3.assign(dims.output, 0.0);
    return p;
}

MlpParams init_params(MlpDims dims, uint64_t seed) {
    if (dims.input < 1 || dims.hidden < 1 || dims.output < 1)
        throw std::invalid_argument("init_params: dims must be positive");
    MlpParams p = MlpParams::zeros(dims);
    Rng rng(seed);
    auto fill = [&rng](Mat& w, int fan_in, int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : w.a) v = rng.uniform(-limit, limit);
    };
    // draw order fixed: w1, w2, w3 row-major; biases stay zero
    fill(p.w1, dims.input, dims.hidden);
    fill(p.w2, dims.hidden, dims.hidden);
    fill(p.w3, dims.hidden, dims.output);
    return p;
}

Batch make_batch(const Dataset& data, MapKind kind) {
    const int b = data.size();
    const int n = data.n_joints;
    const int m = data.n_muscles;
    Batch out;
    out.n_joints = n;
    out.n_muscles = m;
    const int in = (kind == MapKind::ATL) ? n + m : n;
    out.x.resize(b, in);
    out.l.resize(b, m);
    out.f.resize(b, m);
    out.tau.resize(b, n);
    for (int s = 0; s < b; ++s) {
        const Sample& smp = data.samples[s];
        for (int j = 0; j < n; ++j) out.x(s, j) = smp.theta[j];
        if (kind == MapKind::ATL)
            for (int i = 0; i < m; ++i) out.x(s, n + i) = smp.f[i];
        for (int i = 0; i < m; ++i) {
            out.l(s, i) = smp.l[i];
            out.f(s, i) = smp.f[i];
        }
        for (int j = 0; j < n; ++j) out.tau(s, j) = smp.tau[j];
    }
    return out;
}

std::string LossConfig::name() const {
    std::string s = "Basic";
    if (use_const) s += "+Const";
    if (use_pinn) s += "+PINN";
    return s;
}

std::string LossConfig::slug() const {
    std::string s = "basic";
    if (use_const) s += "_const";
    if (use_pinn) s += "_pinn";
    return s;
}

LossConfig LossConfig::parse(const std::string& token, double alpha) {
    std::string t;
    for (char c : token)
        t += (c == '_' || c == '-')
                 ? '+'
                 : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    LossConfig cfg;
    cfg.alpha = alpha;
    if (t == "basic") return cfg;
    if (t == "basic+const") {
        cfg.use_const = true;
        return cfg;
    }
    if (t == "basic+pinn") {
        cfg.use_pinn = true;
        return cfg;
    }
    if (t == "basic+const+pinn") {
        cfg.use_const = true;
        cfg.use_pinn = true;
        return cfg;
    }
    throw std::invalid_argument("unknown loss config: " + token);
}

namespace {

struct ForwardPass {
    Mat a1, d1, a2, d2, y;
};

void run_forward(const MlpParams& p, const Mat& x, ForwardPass& fp) {
    Mat z;
    k::linear(x, p.w1, &p.b1, z);
    k::tanh_deriv(z, fp.a1, fp.d1);
    k::linear(fp.a1, p.w2, &p.b2, z);
    k::tanh_deriv(z, fp.a2, fp.d2);
    k::linear(fp.a2, p.w3, &p.b3, fp.y);
}

struct JacPass {
    Mat gp;  // B x (M*C) predicted Jacobians
    Mat r;   // B x C physics residual G^T f + tau
};

// C = number of differentiated inputs (the joint count)
void run_jacobian(const MlpParams& p, const ForwardPass& fp, int c, JacPass& jp,
                  const Mat* f = nullptr, const Mat* tau = nullptr) {
    Mat s, q, a;
    k::jac_seed(fp.d1, p.w1, c, s);
    k::jac_propagate(p.w2, s, c, q);
    k::jac_scale_rows(fp.d2, q, c, a);
    k::jac_propagate(p.w3, a, c, jp.gp);
    if (!f) return;
    const int b = fp.d1.rows;
    const int m = p.dims.output;
    jp.r.resize(b, c);
    for (int sm = 0; sm < b; ++sm)
        for (int j = 0; j < c; ++j) {
            double acc = (*tau)(sm, j);
            for (int i = 0; i < m; ++i) acc += jp.gp(sm, i * c + j) * (*f)(sm, i);
            jp.r(sm, j) = acc;
        }
}

// elementwise helpers over equally shaped matrices
void ew_mul(const Mat& a, const Mat& b, Mat& out) {
    out.resize(a.rows, a.cols);
    for (size_t i = 0; i < a.size(); ++i) out.a[i] = a.a[i] * b.a[i];
}

void ew_scale(const Mat& a, double s, Mat& out) {
    out.resize(a.rows, a.cols);
    for (size_t i = 0; i < a.size(); ++i) out.a[i] = s * a.a[i];
}

struct ZeroPose {
    Vec a1, d1, a2, d2, y;
    double loss = 0.0;
};

ZeroPose zero_pose_forward(const MlpParams& p) {
    const int h = p.dims.hidden, m = p.dims.output;
    ZeroPose zp;
    zp.a1.resize(h);
    zp.d1.resize(h);
    for (int i = 0; i < h; ++i) {
        const double t = std::tanh(p.b1[i]);
        zp.a1[i] = t;
        zp.d1[i] = 1.0 - t * t;
    }
    zp.a2.resize(h);
    zp.d2.resize(h);
    const Vec z2 = matvec(p.w2, zp.a1);
    for (int i = 0; i < h; ++i) {
        const double t = std::tanh(z2[i] + p.b2[i]);
        zp.a2[i] = t;
        zp.d2[i] = 1.0 - t * t;
    }
    zp.y = matvec(p.w3, zp.a2);
    for (int i = 0; i < m; ++i) {
        zp.y[i] += p.b3[i];
        zp.loss += zp.y[i] * zp.y[i];
    }
    zp.loss /= m;
    return zp;
}

void rank1_add(Mat& g, const Vec& u, const Vec& v) {
    for (int i = 0; i < g.rows; ++i) {
        double* row = g.row(i);
        for (int j = 0; j < g.cols; ++j) row[j] += u[i] * v[j];
    }
}

void vec_add(Vec& a, const Vec& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace

Vec forward(const MlpParams& p, const Vec& x) {
    if (static_cast<int>(x.size()) != p.dims.input)
        throw std::invalid_argument("forward: input size mismatch");
    Mat xm(1, p.dims.input);
    for (int j = 0; j < p.dims.input; ++j) xm(0, j) = x[j];
    ForwardPass fp;
    run_forward(p, xm, fp);
    return Vec(fp.y.row(0), fp.y.row(0) + p.dims.output);
}

Mat forward_batch(const MlpParams& p, const Mat& x) {
    if (x.cols != p.dims.input) throw std::invalid_argument("forward_batch: input size mismatch");
    ForwardPass fp;
    run_forward(p, x, fp);
    return fp.y;
}

Mat input_jacobian(const MlpParams& p, const Vec& x, int n_theta) {
    if (static_cast<int>(x.size()) != p.dims.input)
        throw std::invalid_argument("input_jacobian: input size mismatch");
    if (n_theta < 1 || n_theta > p.dims.input)
        throw std::invalid_argument("input_jacobian: bad n_theta");
    Mat xm(1, p.dims.input);
    for (int j = 0; j < p.dims.input; ++j) xm(0, j) = x[j];
    ForwardPass fp;
    run_forward(p, xm, fp);
    JacPass jp;
    run_jacobian(p, fp, n_theta, jp);
    Mat g(p.dims.output, n_theta);
    for (int i = 0; i < p.dims.output; ++i)
        for (int c = 0; c < n_theta; ++c) g(i, c) = jp.gp(0, i * n_theta + c);
    return g;
}

double loss_basic(const MlpParams& p, const Batch& batch) {
    if (batch.size() < 1) throw std::invalid_argument("loss_basic: empty batch");
    ForwardPass fp;
    run_forward(p, batch.x, fp);
    return k::mean_squared_error(fp.y, batch.l);
}

double loss_const(const MlpParams& p) { return zero_pose_forward(p).loss; }

double loss_pinn(const MlpParams& p, const Batch& batch) {
    if (batch.size() < 1) throw std::invalid_argument("loss_pinn: empty batch");
    if (batch.f.rows != batch.size() || batch.tau.rows != batch.size())
        throw std::invalid_argument("loss_pinn: batch lacks tensions or torques");
    ForwardPass fp;
    run_forward(p, batch.x, fp);
    JacPass jp;
    run_jacobian(p, fp, batch.n_joints, jp, &batch.f, &batch.tau);
    double acc = 0.0;
    for (double v : jp.r.a) acc += v * v;
    return acc / static_cast<double>(jp.r.size());
}

GradBundle total_loss_and_grad(const MlpParams& p, const Batch& batch, const LossConfig& cfg) {
    const int b = batch.size();
    if (b < 1) throw std::invalid_argument("total_loss_and_grad: empty batch");
    if (batch.inputs() != p.dims.input)
        throw std::invalid_argument("total_loss_and_grad: input size mismatch");
    const int m = p.dims.output;
    const int n = batch.n_joints;

    GradBundle out;
    out.grad = MlpParams::zeros(p.dims);

    ForwardPass fp;
    run_forward(p, batch.x, fp);
    out.loss.basic = k::mean_squared_error(fp.y, batch.l);

    // dL_basic/dy
    Mat z3(b, m);
    const double cb = 2.0 / (static_cast<double>(b) * m);
    for (size_t i = 0; i < z3.size(); ++i) z3.a[i] = cb * (fp.y.a[i] - batch.l.a[i]);

    Mat w2t, w3t;
    k::transpose(p.w2, w2t);
    k::transpose(p.w3, w3t);

    // backprop dL/dz2, dL/dz1 for the data term
    Mat t2, z2g, t1, z1g;
    k::linear(z3, w3t, nullptr, t2);
    ew_mul(fp.d2, t2, z2g);

    // physics residual term (second-order path)
    JacPass jp;
    Mat v2, pr, s1, qr, d2v2, u1, v1, gz2, d2qr, cpf, cpv1, cpd2v2, rpad;
    double cp = 0.0;
    if (cfg.use_pinn) {
        run_jacobian(p, fp, n, jp, &batch.f, &batch.tau);
        double acc = 0.0;
        for (double v : jp.r.a) acc += v * v;
        out.loss.pinn = acc / static_cast<double>(jp.r.size());
        cp = 2.0 * cfg.alpha / (static_cast<double>(b) * n);

        Mat pcols;
        k::copy_cols(p.w1, n, pcols);
        k::linear(batch.f, w3t, nullptr, v2);  // v2 = W3^T f per sample
        k::linear(jp.r, pcols, nullptr, pr);   // pr = P r
        ew_mul(fp.d1, pr, s1);
        k::linear(s1, p.w2, nullptr, qr);      // qr = W2 s1
        ew_mul(fp.d2, v2, d2v2);
        k::linear(d2v2, w2t, nullptr, u1);     // u1 = W2^T (d2*v2)
        ew_mul(fp.d1, u1, v1);

        gz2.resize(b, p.dims.hidden);
        for (size_t i = 0; i < gz2.size(); ++i)
            gz2.a[i] = -2.0 * cp * v2.a[i] * qr.a[i] * fp.a2.a[i] * fp.d2.a[i];
        for (size_t i = 0; i < z2g.size(); ++i) z2g.a[i] += gz2.a[i];

        ew_mul(fp.d2, qr, d2qr);
        ew_scale(batch.f, cp, cpf);
        ew_scale(v1, cp, cpv1);
        ew_scale(d2v2, cp, cpd2v2);
        rpad.resize(b, p.dims.input);
        for (int s = 0; s < b; ++s)
            for (int c = 0; c < n; ++c) rpad(s, c) = jp.r(s, c);
    }

    k::linear(z2g, w2t, nullptr, t1);
    ew_mul(fp.d1, t1, z1g);
    if (cfg.use_pinn) {
        for (size_t i = 0; i < z1g.size(); ++i)
            z1g.a[i] -= 2.0 * cp * fp.a1.a[i] * fp.d1.a[i] * u1.a[i] * pr.a[i];
    }

    // weight gradients as batched outer-product sums
    {
        std::vector<k::OuterPair> pw1{{&z1g, &batch.x}};
        if (cfg.use_pinn) pw1.push_back({&cpv1, &rpad});
        k::accumulate_outer(pw1, out.grad.w1);

        std::vector<k::OuterPair> pw2{{&z2g, &fp.a1}};
        if (cfg.use_pinn) pw2.push_back({&cpd2v2, &s1});
        k::accumulate_outer(pw2, out.grad.w2);

        std::vector<k::OuterPair> pw3{{&z3, &fp.a2}};
        if (cfg.use_pinn) pw3.push_back({&cpf, &d2qr});
        k::accumulate_outer(pw3, out.grad.w3);
    }
    k::column_sums(z1g, out.grad.b1);
    k::column_sums(z2g, out.grad.b2);
    k::column_sums(z3, out.grad.b3);

    // zero-pose constraint: value always, gradient when configured
    const ZeroPose zp = zero_pose_forward(p);
    out.loss.constraint = zp.loss;
    if (cfg.use_const) {
        Vec d3_0(m);
        for (int i = 0; i < m; ++i) d3_0[i] = (2.0 / m) * zp.y[i];
        Vec d2_0 = matTvec(p.w3, d3_0);
        for (int i = 0; i < p.dims.hidden; ++i) d2_0[i] *= zp.d2[i];
        Vec d1_0 = matTvec(p.w2, d2_0);
        for (int i = 0; i < p.dims.hidden; ++i) d1_0[i] *= zp.d1[i];
        // x = 0, so w1 receives nothing
        rank1_add(out.grad.w2, d2_0, zp.a1);
        rank1_add(out.grad.w3, d3_0, zp.a2);
        vec_add(out.grad.b1, d1_0);
        vec_add(out.grad.b2, d2_0);
        vec_add(out.grad.b3, d3_0);
    }

    out.loss.total = out.loss.basic + (cfg.use_const ? out.loss.constraint : 0.0) +
                     (cfg.use_pinn ? cfg.alpha * out.loss.pinn : 0.0);
    return out;
}

AdamState AdamState::init(MlpDims dims) {
    AdamState st;
    st.m = MlpParams::zeros(dims);
    st.v = MlpParams::zeros(dims);
    return st;
}

namespace {

void adam_update(double* p, const double* g, double* m, double* v, size_t n, const AdamHyper& h,
                 double bc1, double bc2) {
    for (size_t i = 0; i < n; ++i) {
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
    }
}

}  // namespace

void adam_step(MlpParams& p, const MlpParams& grad, AdamState& state, const AdamHyper& hyper) {
    if (grad.w1.size() != p.w1.size() || grad.w2.size() != p.w2.size() ||
        grad.w3.size() != p.w3.size())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
    auto upd = [&](Vec& pv, const Vec& gv, Vec& mv, Vec& vv) {
        adam_update(pv.data(), gv.data(), mv.data(), vv.data(), pv.size(), hyper, bc1, bc2);
    };
    upd(p.w1.a, grad.w1.a, state.m.w1.a, state.v.w1.a);
    upd(p.b1, grad.b1, state.m.b1, state.v.b1);
    upd(p.w2.a, grad.w2.a, state.m.w2.a, state.v.w2.a);
    upd(p.b2, grad.b2, state.m.b2, state.v.b2);
    upd(p.w3.a, grad.w3.a, state.m.w3.a, state.v.w3.a);
    upd(p.b3, grad.b3, state.m.b3, state.v.b3);
}

void save_checkpoint(const MlpParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "pimbs-mlp 1\n";
    out << "dims " << p.dims.input << ' ' << p.dims.hidden << ' ' << p.dims.output << '\n';
    char buf[40];
    auto dump = [&](const double* v, size_t n) {
        for (size_t i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            out << buf << (i + 1 == n ? '\n' : ' ');
        }
    };
    dump(p.w1.a.data(), p.w1.size());
    dump(p.b1.data(), p.b1.size());
    dump(p.w2.a.data(), p.w2.size());
    dump(p.b2.data(), p.b2.size());
    dump(p.w3.a.data(), p.w3.size());
    dump(p.b3.data(), p.b3.size());
    if (!out) throw IoError("write failed: " + path);
}

MlpParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "pimbs-mlp" || version != 1)
        throw std::runtime_error("bad checkpoint header in " + path);
    std::string tag;
    MlpDims dims;
    in >> tag >> dims.input >> dims.hidden >> dims.output;
    if (tag != "dims" || !in) throw std::runtime_error("bad checkpoint dims in " + path);
    MlpParams p = MlpParams::zeros(dims);
    auto scan = [&](double* v, size_t n) {
        std::string tok;
        for (size_t i = 0; i < n; ++i) {
            if (!(in >> tok)) throw std::runtime_error("truncated checkpoint: " + path);
            char* end = nullptr;
            v[i] = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size())
                throw std::runtime_error("bad value in checkpoint: " + tok);
        }
    };
    scan(p.w1.a.data(), p.w1.size());
    scan(p.b1.data(), p.b1.size());
    scan(p.w2.a.data(), p.w2.size());
    scan(p.b2.data(), p.b2.size());
    scan(p.w3.a.data(), p.w3.size());
    scan(p.b3.data(), p.b3.size());
    return p;
}

}  // namespace pimbs
