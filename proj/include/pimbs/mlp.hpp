#pragma once

#include <cstdint>
#include <string>

#include "pimbs/dataset.hpp"
#include "pimbs/linalg.hpp"

namespace pimbs {

/// 3 fully connected layers, tanh after the first and second:
///   l_pred = w3 tanh(w2 tanh(w1 x + b1) + b2) + b3
/// input = N (AL) or N + M (ATL), output = M.
struct MlpDims {
    int input = 0;
    int hidden = 0;
    int output = 0;
};

struct MlpParams {
    MlpDims dims;
    Mat w1, w2, w3;  // hidden x input, hidden x hidden, output x hidden
    Vec b1, b2, b3;

    static MlpParams zeros(MlpDims dims);
};

/// Uniform Glorot-style init, biases zero, fully determined by the seed.
MlpParams init_params(MlpDims dims, uint64_t seed);

/// Training batch in matrix form. x carries theta (AL) or [theta, f] (ATL);
/// f and tau are kept for the physics residual in either mode.
struct Batch {
    int n_joints = 0;
    int n_muscles = 0;
    Mat x;    // B x input
    Mat l;    // B x M target lengths
    Mat f;    // B x M tensions
    Mat tau;  // B x N torques

    int size() const { return x.rows; }
    int inputs() const { return x.cols; }
};

Batch make_batch(const Dataset& data, MapKind kind);

/// Which terms enter L_train. Basic is always on; alpha weights the
/// physics residual only.
struct LossConfig {
    bool use_const = false;
    bool use_pinn = false;
    double alpha = 1e-5;

    std::string name() const;  // "Basic", "Basic+Const", ...
    std::string slug() const;  // "basic", "basic_const", ...
    static LossConfig parse(const std::string& token, double alpha);
};

struct LossTerms {
    double basic = 0.0;
    double constraint = 0.0;  // zero-pose loss, always evaluated (cheap)
    double pinn = 0.0;        // only evaluated when the config uses it
    double total = 0.0;
};

struct GradBundle {
    LossTerms loss;
    MlpParams grad;  // shapes mirror the parameters
};

Vec forward(const MlpParams& p, const Vec& x);

/// Batch forward; returns predictions only (used by evaluation).
Mat forward_batch(const MlpParams& p, const Mat& x);

/// d l_pred / d x[0..n_theta), the predicted muscle Jacobian (M x n_theta).
Mat input_jacobian(const MlpParams& p, const Vec& x, int n_theta);

double loss_basic(const MlpParams& p, const Batch& batch);
double loss_const(const MlpParams& p);
double loss_pinn(const MlpParams& p, const Batch& batch);

/// Loss terms of the configured composite plus exact gradients, including
/// the second-order path through the input Jacobian for the physics term.
GradBundle total_loss_and_grad(const MlpParams& p, const Batch& batch, const LossConfig& cfg);

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    int64_t step = 0;
    MlpParams m, v;

    static AdamState init(MlpDims dims);
};

void adam_step(MlpParams& p, const MlpParams& grad, AdamState& state, const AdamHyper& hyper);

/// Versioned decimal-text checkpoint, exact f64 round trip.
void save_checkpoint(const MlpParams& p, const std::string& path);
MlpParams load_checkpoint(const std::string& path);

}  // namespace pimbs
