// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cad/perceptual.hpp"

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <cstdint>
#include <functional>

namespace cad {

struct DiscriminatorConfig {
    std::int64_t resolution = 128;
    std::int64_t base_channels = 16;
    std::int64_t max_channels = 64;
    /// Width of the embedding of the flattened 4x4 extrinsic; 0 disables pose input.
    std::int64_t pose_embedding = 64;
};

void to_json(nlohmann::json &j, const DiscriminatorConfig &c);
void from_json(const nlohmann::json &j, DiscriminatorConfig &c);

/// Convolutional tower (conv + 2x average pooling down to 4x4) with a scalar
/// head. When pose conditioning is on, the flattened extrinsic goes through a
/// small fully-connected embedding that is concatenated with the image
/// features before the head.
class DiscriminatorImpl : public torch::nn::Module {
  public:
    explicit DiscriminatorImpl(DiscriminatorConfig cfg);

    /// images (B, 3, R, R) in [0, 1]; poses (B, 16) or undefined when unconditioned.
    /// Returns (B) scores.
    torch::Tensor forward(const torch::Tensor &images, const torch::Tensor &poses = {});

    bool pose_conditioned() const { return cfg_.pose_embedding > 0; }
    const DiscriminatorConfig &config() const { return cfg_; }

  private:
    DiscriminatorConfig cfg_;
    torch::nn::ModuleList convs_;
    torch::nn::ModuleList head_;
    torch::nn::ModuleList pose_mlp_;
};
TORCH_MODULE(Discriminator);

/// Pose-free discriminator over 64x64 patches.
Discriminator make_patch_discriminator(std::int64_t patch_size = 64, std::int64_t base_channels = 16,
                                       std::int64_t max_channels = 64);

/// Any scorer images (B,3,H,W) x poses (B,16) -> (B) scores.
using ScoreFn = std::function<torch::Tensor(const torch::Tensor &, const torch::Tensor &)>;

inline ScoreFn score_fn(Discriminator &d) {
    return [d](const torch::Tensor &images, const torch::Tensor &poses) mutable {
        return d->forward(images, poses);
    };
}

/// f(u) = -log(1 + exp(-u)), evaluated stably as -softplus(-u).
torch::Tensor f_logistic(const torch::Tensor &u);
double f_logistic(double u);

enum class LossConvention {
    /// softplus(D(fake)) + softplus(-D(real)) + (gamma / 2) |grad|^2.
    kSoftplus,
    /// The written form f(D(fake)) + f(-D(real)) + lambda |grad|^2 with lambda = gamma / 2.
    kLiteral,
};

struct DLossTerms {
    torch::Tensor total;       // scalar to minimize
    torch::Tensor adversarial; // scalar without the penalty
    torch::Tensor r1;          // mean squared input-gradient norm on reals
    torch::Tensor real_scores; // (B) detached
    torch::Tensor fake_scores; // (B) detached
};

/// Discriminator objective. `real` must require grad when gamma > 0.
DLossTerms d_loss(const ScoreFn &d, const torch::Tensor &fake, const torch::Tensor &fake_poses,
                  const torch::Tensor &real, const torch::Tensor &real_poses, double gamma,
                  LossConvention convention = LossConvention::kSoftplus);

/// Non-saturating generator objective mean softplus(-D(fake)) = -mean f(D(fake)).
torch::Tensor g_loss(const ScoreFn &d, const torch::Tensor &fake, const torch::Tensor &poses);

/// Mean over the batch of |dD/dI|^2, built with create_graph so it can be
/// differentiated with respect to discriminator parameters.
torch::Tensor r1_penalty(const ScoreFn &d, const torch::Tensor &real, const torch::Tensor &poses);

/// Same penalty from precomputed scores of `real` (avoids a second forward pass).
torch::Tensor r1_from_scores(const torch::Tensor &scores, const torch::Tensor &real);

/// perceptual(I3D, stop_gradient(I2D)), (B) -> mean scalar.
torch::Tensor consistency_loss(const torch::Tensor &image_3d, const torch::Tensor &image_2d,
                               const PerceptualDistance &perceptual);

/// Adaptive augmentation probability driven by the sign-of-real-scores heuristic.
struct AdaState {
    double p = 0.0;
    double target_rt = 0.6;
    /// Per-update change; 1/500 lets p cross [0, 1] in 500 updates.
    double adjustment_step = 1.0 / 500.0;
    /// False in the second training stage: p is pinned to 0.
    bool enabled = true;
};

void to_json(nlohmann::json &j, const AdaState &s);
void from_json(const nlohmann::json &j, AdaState &s);

/// rt = fraction of positive real scores; p += step * sign(rt - target), clamped to [0, 1].
AdaState ada_update(const AdaState &state, const torch::Tensor &d_real_scores);
/// Same update from a precomputed rt (fraction of positive real scores).
AdaState ada_update(const AdaState &state, double rt);

struct AugmentConfig {
    bool flip = true;
    bool translate = true;
    bool color = true;
    double max_translate_fraction = 0.125;
    double brightness_std = 0.2;
    double contrast_log_std = 0.5 * 0.6931471805599453;
    /// Value revealed by translation (the render background).
    double fill = 1.0;
};

/// Each enabled op is applied to each image independently with probability p.
/// Differentiable with respect to the images; p = 0 returns the input tensor.
torch::Tensor augment(const torch::Tensor &images, double p, std::uint64_t seed,
                      const AugmentConfig &cfg = {});

} // namespace cad
