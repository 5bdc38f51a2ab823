// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>
#include <torch/types.h>

#include <array>
#include <cstdint>
#include <vector>

namespace cad {

/// Half-width of the world box that holds all content.
inline constexpr double kBoxExtent = 0.7;
/// Distance from the box center to a box corner, used for ray bounds.
inline constexpr double kBoxHalfDiagonal = 1.2124355652982142; // 0.7 * sqrt(3)
/// Angular margin keeping sampled poses away from the poles.
inline constexpr double kPoleMarginDeg = 1.0;

/// Spherical camera pose looking at the origin with +Y as the up hint.
///
/// Position is (r sin(polar) sin(azimuth), r cos(polar), r sin(polar) cos(azimuth)):
/// polar is measured from +Y and azimuth in the XZ plane from +Z.
class CameraPose {
  public:
    CameraPose() = default;

    double azimuth_deg() const { return azimuth_deg_; }
    double polar_deg() const { return polar_deg_; }
    double radius() const { return radius_; }

    Eigen::Vector3d position() const;
    /// World-from-camera transform. Camera axes follow the OpenGL convention:
    /// +X right, +Y up, the camera looks down -Z.
    Eigen::Matrix4d extrinsic() const;
    /// Row-major flattened extrinsic, the discriminator's pose encoding.
    std::array<double, 16> flat_extrinsic() const;

    friend CameraPose pose_from_spherical(double azimuth_deg, double polar_deg, double radius);
    friend bool operator==(const CameraPose &, const CameraPose &) = default;

  private:
    double azimuth_deg_ = 180.0;
    double polar_deg_ = 90.0;
    double radius_ = 2.0;
};

struct Intrinsics {
    double fov_deg = 49.1;
    std::int64_t resolution = 64;
};

/// Per-pixel rays, row-major over (row, col).
struct RayBundle {
    torch::Tensor origins;    // (H, W, 3)
    torch::Tensor directions; // (H, W, 3), unit norm
    double near = 0.0;
    double far = 0.0;
};

/// Throws DegenerateUpError unless 0 < polar < 180, ContractError unless radius > 0.
/// Azimuth is wrapped into [0, 360).
CameraPose pose_from_spherical(double azimuth_deg, double polar_deg, double radius);

/// Recovers (azimuth, polar, radius) from a world-from-camera matrix.
CameraPose pose_from_extrinsic(const Eigen::Matrix4d &extrinsic);

/// Default ray-march bounds: radius -/+ the box half diagonal.
std::pair<double, double> ray_bounds(const CameraPose &pose);

RayBundle generate_rays(const CameraPose &pose, const Intrinsics &intr,
                        torch::ScalarType dtype = torch::kFloat);

/// Rays for a sub-window of the image (same values as the matching crop of
/// generate_rays).
RayBundle generate_rays_window(const CameraPose &pose, const Intrinsics &intr, std::int64_t row0,
                               std::int64_t col0, std::int64_t height, std::int64_t width,
                               torch::ScalarType dtype = torch::kFloat);

/// Azimuth uniform on [0, 360), cos(polar) uniform on [cos 179deg, cos 1deg].
CameraPose sample_pose_uniform(std::uint64_t seed, double radius);

CameraPose relative_pose(const CameraPose &reference, double d_azimuth_deg, double d_polar_deg);

std::vector<CameraPose> turntable(const CameraPose &start, int n_frames);

/// (B, 16) tensor of flattened extrinsics.
torch::Tensor pose_batch_tensor(const std::vector<CameraPose> &poses,
                                torch::ScalarType dtype = torch::kFloat);

void to_json(nlohmann::json &j, const CameraPose &pose);
void from_json(const nlohmann::json &j, CameraPose &pose);

} // namespace cad
