// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cad/camera.hpp"
#include "cad/render.hpp"
#include "cad/triplane.hpp"

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <cstdint>
#include <vector>

namespace cad {

struct GeneratorConfig {
    std::int64_t z_dim = 64;
    std::int64_t w_dim = 64;
    std::int64_t mapping_layers = 4;
    double mapping_lr_multiplier = 0.01;
    /// Base triplane resolution N (a power of two >= 8).
    std::int64_t triplane_resolution = 32;
    std::int64_t triplane_channels = 16;
    std::int64_t synthesis_channels = 64;
    std::vector<std::int64_t> decoder_hidden = {64, 64};
    std::int64_t upsampler2d_channels = 32;
    std::int64_t upsampler3d_channels = 32;
};

void to_json(nlohmann::json &j, const GeneratorConfig &c);
void from_json(const nlohmann::json &j, GeneratorConfig &c);

/// Fully-connected layer with runtime weight scaling (equalized learning rate).
class EqualLinearImpl : public torch::nn::Module {
  public:
    EqualLinearImpl(std::int64_t in, std::int64_t out, double bias_init = 0.0,
                    double lr_multiplier = 1.0);
    torch::Tensor forward(const torch::Tensor &x);

  private:
    torch::Tensor weight_, bias_;
    double weight_gain_;
    double lr_multiplier_;
};
TORCH_MODULE(EqualLinear);

/// Convolution whose kernel is scaled per input channel by an affine function of
/// w (StyleGAN2 weight modulation, the learned replacement for AdaIN), with
/// optional demodulation.
struct ModulatedConv2dOptions {
    std::int64_t in_channels;
    std::int64_t out_channels;
    std::int64_t kernel_size = 3;
    std::int64_t w_dim = 64;
    bool demodulate = true;
    bool activate = true;
    /// Multiplies the initial kernel; 0 gives an all-zero (identity residual) layer.
    double init_gain = 1.0;
};

class ModulatedConv2dImpl : public torch::nn::Module {
  public:
    explicit ModulatedConv2dImpl(ModulatedConv2dOptions options);
    torch::Tensor forward(const torch::Tensor &x, const torch::Tensor &w);

  private:
    ModulatedConv2dOptions options_;
    EqualLinear affine_{nullptr};
    torch::Tensor weight_, bias_;
    double weight_gain_;
};
TORCH_MODULE(ModulatedConv2d);

class MappingNetworkImpl : public torch::nn::Module {
  public:
    explicit MappingNetworkImpl(const GeneratorConfig &cfg);
    torch::Tensor forward(const torch::Tensor &z);

  private:
    torch::nn::ModuleList layers_;
};
TORCH_MODULE(MappingNetwork);

/// Learned 4x4 constant grown by bilinear upsampling and modulated convolutions
/// to an N x N map with 3C channels, reshaped into a triplane.
class SynthesisNetworkImpl : public torch::nn::Module {
  public:
    explicit SynthesisNetworkImpl(const GeneratorConfig &cfg);
    /// (B, w_dim) -> (B, 3, C, N, N)
    torch::Tensor forward(const torch::Tensor &w);

  private:
    GeneratorConfig cfg_;
    torch::Tensor const_input_;
    torch::nn::ModuleList convs_;
    ModulatedConv2d to_planes_{nullptr};
};
TORCH_MODULE(SynthesisNetwork);

/// Image-space 2x super-resolution of raw renders: bilinear upsampling plus a
/// w-modulated convolutional residual.
class Upsampler2DImpl : public torch::nn::Module {
  public:
    explicit Upsampler2DImpl(const GeneratorConfig &cfg);
    /// raw (B, 3, R, R) in [0, 1] -> (B, 3, 2R, 2R)
    torch::Tensor forward(const torch::Tensor &raw, const torch::Tensor &w);

  private:
    ModulatedConv2d conv0_{nullptr}, conv1_{nullptr}, to_rgb_{nullptr};
};
TORCH_MODULE(Upsampler2D);

/// Triplane-space 2x super-resolution: bilinear plane upsampling plus a
/// w-modulated residual whose last layer starts at zero, so a fresh upsampler
/// reproduces the bilinear planes exactly.
class TriplaneUpsampler3DImpl : public torch::nn::Module {
  public:
    explicit TriplaneUpsampler3DImpl(const GeneratorConfig &cfg);
    /// (B, 3, C, N, N) -> (B, 3, C, 2N, 2N)
    torch::Tensor forward(const torch::Tensor &planes, const torch::Tensor &w);

  private:
    ModulatedConv2d conv0_{nullptr}, conv1_{nullptr}, to_planes_{nullptr};
};
TORCH_MODULE(TriplaneUpsampler3D);

/// Bilinear (align_corners) 2x upsampling of triplane planes, (B, 3, C, N, N).
torch::Tensor bilinear_upsample_planes(const torch::Tensor &planes);

/// Latent -> triplane generator with both upsampling branches.
class GeneratorImpl : public torch::nn::Module {
  public:
    explicit GeneratorImpl(GeneratorConfig cfg);

    const GeneratorConfig &config() const { return cfg_; }

    MappingNetwork mapping{nullptr};
    SynthesisNetwork synthesis{nullptr};
    FieldDecoder decoder{nullptr};
    Upsampler2D upsampler2d{nullptr};
    TriplaneUpsampler3D upsampler3d{nullptr};

  private:
    GeneratorConfig cfg_;
};
TORCH_MODULE(Generator);

/// (B, z_dim) -> (B, w_dim).
torch::Tensor map_latent(Generator &gen, const torch::Tensor &z);
/// (B, w_dim) -> (B, 3, C, N, N) plane batch.
torch::Tensor synthesize_planes(Generator &gen, const torch::Tensor &w);
/// Single latent (w_dim) or (1, w_dim) -> Triplane.
Triplane synthesize_triplane(Generator &gen, const torch::Tensor &w);
/// Raw renders (B, 3, R, R) -> 2D-branch images (B, 3, 2R, 2R), modulated by w.
torch::Tensor upsample_2d(Generator &gen, const torch::Tensor &raw, const torch::Tensor &w);
Triplane upsample_3d(Generator &gen, const Triplane &tp, const torch::Tensor &w);
/// (1 - t) w1 + t w2; ContractError unless t in [0, 1].
torch::Tensor interpolate(const torch::Tensor &w1, const torch::Tensor &w2, double t);

/// Unit-Gaussian latents (n, z_dim) from a seed.
torch::Tensor sample_latents(const GeneratorConfig &cfg, std::int64_t n, std::uint64_t seed);

/// Rendering settings shared by both branches.
struct ImageSettings {
    Intrinsics intrinsics{};      // resolution = final image resolution (2x raw)
    RenderConfig render{};        // raw_resolution used by the 2D branch
};

/// 2D branch for one latent: raw render of the base triplane, then image-space
/// upsampling. planes (3, C, N, N), w (w_dim). Returns (3, 2R, 2R).
torch::Tensor render_2d_branch(Generator &gen, const torch::Tensor &planes, const torch::Tensor &w,
                               const CameraPose &pose, const ImageSettings &settings,
                               std::uint64_t seed);
/// Raw (3, R, R) render of the base triplane at the raw resolution.
torch::Tensor render_raw(Generator &gen, const torch::Tensor &planes, const CameraPose &pose,
                         const ImageSettings &settings, std::uint64_t seed);
/// 3D branch: renders the already upsampled planes (3, C, 2N, 2N) at the final
/// resolution, optionally restricted to a square patch. Returns (3, h, w).
torch::Tensor render_3d_branch(Generator &gen, const torch::Tensor &upsampled_planes,
                               const CameraPose &pose, const ImageSettings &settings,
                               std::uint64_t seed, std::int64_t row0 = 0, std::int64_t col0 = 0,
                               std::int64_t patch = -1);

/// Mean of w over n mapped unit-Gaussian latents.
torch::Tensor mean_w(Generator &gen, std::int64_t n, std::uint64_t seed);

enum class InversionBranch { k3D, k2D };

struct InversionOptions {
    int steps = 500;
    double learning_rate = 0.01;
    double perceptual_weight = 1.0;
    std::int64_t mean_w_samples = 10000;
    InversionBranch branch = InversionBranch::k3D;
};

class PerceptualDistance;

struct InversionResult {
    torch::Tensor w;             // (w_dim), best-loss latent
    torch::Tensor reconstruction; // (3, H, W)
    double best_loss = 0.0;
    std::vector<double> losses;
};

/// Gradient descent on w from the mean-w initialization, minimizing pixel L2
/// plus perceptual distance between the rendered image and target (3, H, W).
InversionResult invert(Generator &gen, const torch::Tensor &target, const CameraPose &pose,
                       const ImageSettings &settings, const PerceptualDistance &perceptual,
                       const InversionOptions &options, std::uint64_t seed);

/// Renders the image a latent produces through the requested branch.
torch::Tensor render_latent(Generator &gen, const torch::Tensor &w, const CameraPose &pose,
                            const ImageSettings &settings, InversionBranch branch,
                            std::uint64_t seed);

double psnr(const torch::Tensor &a, const torch::Tensor &b);

} // namespace cad
