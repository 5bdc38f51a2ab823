// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/types.h>

#include <filesystem>
#include <vector>

namespace cad {

/// Writes an (H, W, 3) or (3, H, W) float image in [0, 1] as 8-bit RGB PNG
/// (values are clamped and rounded to nearest).
void write_png(const std::filesystem::path &path, const torch::Tensor &image);

/// Writes an (H, W) float image in [0, 1] as 8-bit grayscale PNG.
void write_png_gray(const std::filesystem::path &path, const torch::Tensor &image);

/// Reads an 8-bit RGB(A) or grayscale PNG as an (H, W, 3) float tensor in [0, 1].
torch::Tensor read_png(const std::filesystem::path &path);

/// Quantizes like write_png/read_png would, without touching disk.
torch::Tensor quantize_u8(const torch::Tensor &image_hwc);

/// Grid of equally sized (H, W, 3) images, `columns` per row, white padding.
torch::Tensor contact_sheet(const std::vector<torch::Tensor> &images, int columns);

/// Writes raw little-endian float32 values of a tensor.
void write_f32(const std::filesystem::path &path, const torch::Tensor &values);

} // namespace cad
