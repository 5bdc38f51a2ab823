// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <vector>

namespace cad {

/// Differentiable image distance; a drop-in slot for LPIPS-style scorers.
class PerceptualDistance {
  public:
    virtual ~PerceptualDistance() = default;
    /// a, b: (B, 3, H, W) in [0, 1]. Returns (B) distances, 0 for identical images.
    virtual torch::Tensor distance(const torch::Tensor &a, const torch::Tensor &b) const = 0;
};

/// LPIPS-shaped distance over a frozen, seed-fixed random convolutional pyramid
/// (three scales). Per scale, features are unit-normalized across channels, and
/// the squared difference is summed over channels and averaged over pixels.
class RandomFeaturePyramid final : public PerceptualDistance {
  public:
    explicit RandomFeaturePyramid(std::uint64_t seed = 0x1195ULL);
    torch::Tensor distance(const torch::Tensor &a, const torch::Tensor &b) const override;

  private:
    std::vector<torch::Tensor> kernels_;
    std::vector<torch::Tensor> features(const torch::Tensor &x) const;
};

} // namespace cad
