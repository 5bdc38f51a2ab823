// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cad/camera.hpp"

#include <torch/torch.h>

#include <functional>
#include <vector>

namespace cad {

/// Three axis-aligned N x N feature grids with C channels (XY, XZ, YZ).
///
/// Stored channel-first as (3, C, N, N) so each plane is directly an image for
/// convolution and grid sampling. Grid node (row i, col j) of a plane sits at
/// normalized coordinates (u_j, v_i) = (-1 + 2j/(N-1), -1 + 2i/(N-1)), where u
/// is the plane's first axis (X, X, Y) and v its second (Y, Z, Z).
struct Triplane {
    torch::Tensor planes;
    double extent = kBoxExtent;

    std::int64_t resolution() const { return planes.size(2); }
    std::int64_t channels() const { return planes.size(1); }
    void validate() const;
};

/// Radiance and density at a batch of points.
struct FieldSamples {
    torch::Tensor rgb;   // (B, 3) in [0, 1]
    torch::Tensor sigma; // (B), >= 0
};

/// Anything that maps (B, 3) world points to radiance and density.
using RadianceField = std::function<FieldSamples(const torch::Tensor &points)>;

/// (B, C) summed bilinear features; points outside the box get zeros.
torch::Tensor sample_features(const Triplane &tp, const torch::Tensor &points);

/// Per-point mask of points inside the closed [-extent, extent]^3 box.
torch::Tensor inside_box(const torch::Tensor &points, double extent);

struct FieldDecoderOptions {
    std::int64_t in_features = 16;
    std::vector<std::int64_t> hidden = {64, 64};
};

/// Light MLP from aggregated triplane features to (rgb, sigma).
/// Hidden layers use softplus; rgb goes through a logistic and sigma through
/// softplus, so an all-zero network yields rgb = 0.5 and sigma = ln 2.
class FieldDecoderImpl : public torch::nn::Module {
  public:
    explicit FieldDecoderImpl(FieldDecoderOptions options = {});

    FieldSamples forward(const torch::Tensor &features);

    const FieldDecoderOptions &options() const { return options_; }

  private:
    FieldDecoderOptions options_;
    torch::nn::ModuleList layers_;
};
TORCH_MODULE(FieldDecoder);

inline FieldSamples decode(FieldDecoder &dec, const torch::Tensor &features) {
    return dec->forward(features);
}

/// decode(sample_features(...)) with empty space outside the box:
/// sigma = 0 and rgb = 0.5 there.
FieldSamples query_field(const Triplane &tp, FieldDecoder &dec, const torch::Tensor &points);

/// Binds a triplane and decoder into a renderable field.
RadianceField triplane_field(Triplane tp, FieldDecoder dec);

} // namespace cad
