// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cad/camera.hpp"
#include "cad/triplane.hpp"

#include <torch/torch.h>

#include <array>
#include <cstdint>

namespace cad {

struct RenderConfig {
    std::int64_t n_coarse = 48;
    std::int64_t n_fine = 48;
    std::array<double, 3> background = {1.0, 1.0, 1.0};
    std::int64_t raw_resolution = 64;
    /// Rays evaluated per field call; bounds peak memory, not results.
    std::int64_t chunk_rays = 8192;
    torch::ScalarType dtype = torch::kFloat;
    /// false: fixed bin midpoints and evenly spaced fine draws, independent of the seed.
    bool jitter = true;
};

/// Rendered image. alpha = 1 - final transmittance and
/// rgb = composited radiance + (1 - alpha) * background.
struct RenderOutput {
    torch::Tensor rgb;   // (H, W, 3)
    torch::Tensor alpha; // (H, W)
    torch::Tensor depth; // (H, W), expected depth along the ray
};

struct CompositeResult {
    torch::Tensor rgb;     // (R, 3)
    torch::Tensor alpha;   // (R)
    torch::Tensor depth;   // (R)
    torch::Tensor weights; // (R, K), T_i * alpha_i
};

inline constexpr double kDepthEpsilon = 1e-8;
inline constexpr double kResampleFloor = 1e-5;

/// Quadrature of the volume rendering integral for R rays of K samples.
/// rgbs (R, K, 3), sigmas (R, K), ts (R, K) sample depths, deltas (R, K) segment
/// lengths, background (3). Throws ContractError on negative density.
CompositeResult composite(const torch::Tensor &rgbs, const torch::Tensor &sigmas,
                          const torch::Tensor &ts, const torch::Tensor &deltas,
                          const torch::Tensor &background);

/// Segment lengths for sorted depths: each sample owns the interval between the
/// midpoints to its neighbours, with near/far closing the ends, so the lengths
/// sum to far - near.
torch::Tensor segment_lengths(const torch::Tensor &ts, double near, double far);

/// Coarse depths near + (k + u_k) / K * (far - near), u keyed by (seed, pixel id, k),
/// or u = 1/2 without jitter.
torch::Tensor stratified_depths(const torch::Tensor &pixel_ids, std::int64_t n_samples,
                                double near, double far, std::uint64_t seed,
                                torch::ScalarType dtype, bool jitter = true);

/// Inverse-CDF draw of n_fine sorted depths from the piecewise-constant
/// distribution over the coarse segments proportional to weight + 1e-5.
/// Rays whose weights are all zero sample uniformly in depth.
torch::Tensor hierarchical_resample(const torch::Tensor &coarse_ts,
                                    const torch::Tensor &coarse_weights, std::int64_t n_fine,
                                    double near, double far, std::uint64_t seed,
                                    const torch::Tensor &pixel_ids, bool jitter = true);

/// Two-pass render of an arbitrary set of rays. origins/directions (R, 3),
/// pixel_ids (R) int64 keys for the per-pixel random streams.
CompositeResult render_rays(const RadianceField &field, const torch::Tensor &origins,
                            const torch::Tensor &directions, const torch::Tensor &pixel_ids,
                            double near, double far, const RenderConfig &cfg, std::uint64_t seed);

RenderOutput render(const RadianceField &field, const CameraPose &pose, const Intrinsics &intr,
                    const RenderConfig &cfg, std::uint64_t seed);

RenderOutput render(const Triplane &tp, FieldDecoder &dec, const CameraPose &pose,
                    const Intrinsics &intr, const RenderConfig &cfg, std::uint64_t seed);

/// Square crop of the full render starting at (row0, col0); bit-identical to
/// cropping render() because every random draw is keyed by global pixel index.
RenderOutput render_patch(const RadianceField &field, const CameraPose &pose,
                          const Intrinsics &intr, const RenderConfig &cfg, std::uint64_t seed,
                          std::int64_t row0, std::int64_t col0, std::int64_t patch_size = 64);

RenderOutput render_patch(const Triplane &tp, FieldDecoder &dec, const CameraPose &pose,
                          const Intrinsics &intr, const RenderConfig &cfg, std::uint64_t seed,
                          std::int64_t row0, std::int64_t col0, std::int64_t patch_size = 64);

/// (H, W, 3) -> (3, H, W).
inline torch::Tensor to_chw(const torch::Tensor &hwc) { return hwc.permute({2, 0, 1}); }
/// (3, H, W) -> (H, W, 3).
inline torch::Tensor to_hwc(const torch::Tensor &chw) { return chw.permute({1, 2, 0}); }

} // namespace cad
