#pragma once

#include "pimbs/mlp.hpp"

namespace pimbs::reference {

/// Plain sample-at-a-time implementations of the network math. They share
/// no code with the batched OpenMP kernels (the physics-term gradient is
/// assembled per residual component instead of per batched vector product)
/// and exist as the slow correctness baseline for tests and the kernel
/// benchmark.
Vec forward(const MlpParams& p, const Vec& x);
Mat input_jacobian(const MlpParams& p, const Vec& x, int n_theta);
GradBundle total_loss_and_grad(const MlpParams& p, const Batch& batch, const LossConfig& cfg);

}  // namespace pimbs::reference
