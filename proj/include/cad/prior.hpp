// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cad/camera.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cad {

using Color = std::array<double, 3>;
inline constexpr Color kWhite = {1.0, 1.0, 1.0};
inline constexpr double kDefaultMaskTolerance = 8.0 / 255.0;

// ---------------------------------------------------------------------------------------------
// Synthetic oracle scene

enum class PrimitiveKind { kSphere, kBox, kCylinder };

struct Primitive {
    PrimitiveKind kind = PrimitiveKind::kSphere;
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    /// Sphere: (radius, -, -). Box: half extents. Cylinder: (radius, half height, -).
    Eigen::Vector3d size = Eigen::Vector3d::Constant(0.2);
    /// Rotation about +Y (boxes only).
    double yaw_deg = 0.0;
    Eigen::Vector3d albedo = Eigen::Vector3d::Constant(0.5);

    /// Conservative axis-aligned bounds (min, max).
    std::pair<Eigen::Vector3d, Eigen::Vector3d> bounds() const;
};

struct OracleScene {
    std::uint64_t seed = 0;
    std::vector<Primitive> primitives;
};

/// Deterministic scene of 3-6 primitives strictly inside the content box.
OracleScene oracle_scene(std::uint64_t condition_seed);

/// Ray-cast Lambertian render, (H, W, 3) float in [0, 1].
torch::Tensor render_oracle(const OracleScene &scene, const CameraPose &pose, const Intrinsics &intr,
                            const Color &background = kWhite);

/// Ray-cast silhouette (H, W) bool.
torch::Tensor oracle_silhouette(const OracleScene &scene, const CameraPose &pose,
                                const Intrinsics &intr);

// ---------------------------------------------------------------------------------------------
// Prior sampling with injected failure modes

enum Corruption : unsigned {
    kCorruptNone = 0,
    kCorruptPose = 1u << 0,
    kCorruptWarp = 1u << 1,
    kCorruptSemantic = 1u << 2,
};

struct CorruptionConfig {
    double p_pose_error = 0.0;
    double p_geometry_warp = 0.0;
    double p_semantic_swap = 0.0;
    double pose_error_min_deg = 30.0;
    double pose_error_max_deg = 90.0;
    /// Maximum warp displacement as a fraction of the image side.
    double warp_max_fraction = 0.2;
};

void to_json(nlohmann::json &j, const CorruptionConfig &c);
void from_json(const nlohmann::json &j, CorruptionConfig &c);

struct PriorDraw {
    torch::Tensor image;           // (H, W, 3)
    unsigned corruption = kCorruptNone;
};

/// Render of the scene at `pose` with the given corruption modes applied
/// (semantic swap and pose error change what is rendered; the warp is applied last).
PriorDraw corrupted_render(const OracleScene &scene, const CameraPose &pose, unsigned modes,
                           const CorruptionConfig &cfg, const Intrinsics &intr,
                           std::uint64_t seed, const Color &background = kWhite);

/// n_parallel draws; each mode hits each draw independently with its probability.
std::vector<PriorDraw> oracle_sample(const OracleScene &scene, const CameraPose &pose,
                                     int n_parallel, const CorruptionConfig &corruption,
                                     const Intrinsics &intr, std::uint64_t seed,
                                     const Color &background = kWhite);

enum class RefineMode { kGeometryFree, kGeometryLocked };

struct RefinementConfig {
    RefineMode mode = RefineMode::kGeometryLocked;
    double strength = 0.8;
};

std::string to_string(RefineMode mode);
RefineMode refine_mode_from_string(const std::string &name);
void to_json(nlohmann::json &j, const RefinementConfig &c);
void from_json(const nlohmann::json &j, RefinementConfig &c);

/// Source of target-distribution images. The synthetic oracle is the shipped
/// implementation; a diffusion backend would implement the same two calls.
class PriorSampler {
  public:
    virtual ~PriorSampler() = default;
    virtual std::vector<PriorDraw> sample(const CameraPose &pose, int n_parallel,
                                          std::uint64_t seed) const = 0;
    /// Re-noise-and-denoise stand-in. strength 0 returns the image unchanged.
    virtual torch::Tensor refine(const torch::Tensor &image, const CameraPose &pose,
                                 RefineMode mode, double strength, std::uint64_t seed) const = 0;
};

class OraclePrior final : public PriorSampler {
  public:
    OraclePrior(OracleScene scene, Intrinsics intr, CorruptionConfig corruption = {},
                Color background = kWhite);

    std::vector<PriorDraw> sample(const CameraPose &pose, int n_parallel,
                                  std::uint64_t seed) const override;
    /// geometry_locked: per-primitive albedo shifts of amplitude 0.25 * s, rendered
    /// at the same pose. geometry_free: the same jitter plus a pose perturbation of
    /// up to max(0, s - 0.5) * 20 degrees in azimuth and polar angle.
    torch::Tensor refine(const torch::Tensor &image, const CameraPose &pose, RefineMode mode,
                         double strength, std::uint64_t seed) const override;

    const OracleScene &scene() const { return scene_; }
    const Intrinsics &intrinsics() const { return intr_; }

  private:
    OracleScene scene_;
    Intrinsics intr_;
    CorruptionConfig corruption_;
    Color background_;
};

// ---------------------------------------------------------------------------------------------
// Masks and pruning

/// Pixel is foreground iff its max-channel deviation from the background is
/// strictly greater than tol.
torch::Tensor foreground_mask(const torch::Tensor &image, const Color &background = kWhite,
                              double tol = kDefaultMaskTolerance);

/// Square-structuring-element dilation of an (H, W) bool mask.
torch::Tensor dilate(const torch::Tensor &mask, std::int64_t radius);

/// dilate(intersection of the samples' foreground masks, radius).
torch::Tensor overlap_mask(const std::vector<torch::Tensor> &samples, std::int64_t radius,
                           const Color &background = kWhite, double tol = kDefaultMaskTolerance);

/// Foreground pixels of `sample` outside `mask`.
std::int64_t bad_pixel_count(const torch::Tensor &sample, const torch::Tensor &mask,
                             const Color &background = kWhite,
                             double tol = kDefaultMaskTolerance);

/// Deterministic image embedding used for semantic similarity.
class ImageEmbedder {
  public:
    virtual ~ImageEmbedder() = default;
    /// (H, W, 3) -> unit-norm (D) embedding.
    virtual torch::Tensor embed(const torch::Tensor &image) const = 0;
};

/// Fixed-seed random projection of the 32x32 area-downsampled image (expressed as
/// deviation from the background) concatenated with a 3 x 8-bin color histogram of
/// the foreground pixels. The two parts are unit-normalized separately and
/// weighted equally, then the whole vector is L2-normalized.
class RandomProjectionEmbedder final : public ImageEmbedder {
  public:
    explicit RandomProjectionEmbedder(std::uint64_t seed = 0xC11FULL, std::int64_t dim = 128,
                                      Color background = kWhite);
    torch::Tensor embed(const torch::Tensor &image) const override;

  private:
    torch::Tensor projection_; // (dim, 3 * 32 * 32)
    Color background_;
};

/// Cosine similarity of embeddings, in [-1, 1].
double semantic_score(const torch::Tensor &image, const torch::Tensor &reference,
                      const ImageEmbedder &embedder);

struct PruneThresholds {
    std::int64_t tau_geo = 82;
    double tau_sem = -1.0;
    std::int64_t dilation_radius = 5;
    int n_parallel = 4;
    double mask_tolerance = kDefaultMaskTolerance;
};

void to_json(nlohmann::json &j, const PruneThresholds &t);
void from_json(const nlohmann::json &j, PruneThresholds &t);

/// tau_geo = 2% of pixels and a 5 px dilation at every resolution; tau_sem is
/// left for calibration.
PruneThresholds default_thresholds(std::int64_t resolution);

enum class PruneStatus { kKept, kDiscardedGeometry, kDiscardedSemantic };

std::string to_string(PruneStatus status);

struct PruneVerdict {
    PruneStatus status = PruneStatus::kKept;
    int best_index = 0;
    std::int64_t bad_pixel_max = 0;
    double min_score = 0.0;
    std::vector<double> scores;

    bool kept() const { return status == PruneStatus::kKept; }
};

/// Geometry check (max bad-pixel count <= tau_geo) then semantic check
/// (min score >= tau_sem). Kept views report the highest-scoring sample,
/// lowest index on ties.
PruneVerdict prune_view(const std::vector<torch::Tensor> &samples, const torch::Tensor &reference,
                        const PruneThresholds &thresholds, const ImageEmbedder &embedder,
                        const Color &background = kWhite);

// ---------------------------------------------------------------------------------------------
// Condition, calibration and the sample cache

inline constexpr double kReferenceAzimuthDeg = 180.0;
inline constexpr double kCameraRadius = 2.0;

struct ConditionSpec {
    std::uint64_t condition_seed = 0;
    CameraPose reference_pose;
    torch::Tensor reference_image; // (H, W, 3)
};

/// Reference view of the oracle scene at azimuth 180, the given polar angle, radius 2.
ConditionSpec make_condition(std::uint64_t condition_seed, double reference_polar_deg,
                             const Intrinsics &intr);

/// tau_sem = 5th percentile of the semantic scores of n_views clean renders at
/// uniformly sampled poses; tau_geo and dilation from default_thresholds.
PruneThresholds calibrate_thresholds(const ConditionSpec &condition, const OracleScene &scene,
                                     const Intrinsics &intr, const ImageEmbedder &embedder,
                                     int n_views, std::uint64_t seed);

struct PruningBenchmark {
    std::int64_t clean_views = 0;
    std::int64_t corrupted_views = 0;
    std::int64_t corrupted_discarded = 0;
    std::int64_t clean_discarded = 0;

    double recall() const;
    double false_discard_rate() const;
};

/// Views at uniform poses; a fixed fraction gets one corrupted draw whose mode
/// cycles through pose error, geometry warp and semantic swap.
PruningBenchmark run_pruning_benchmark(const ConditionSpec &condition, const OracleScene &scene,
                                       const Intrinsics &intr, const PruneThresholds &thresholds,
                                       const ImageEmbedder &embedder, int n_views,
                                       double corrupt_fraction, const CorruptionConfig &corruption,
                                       std::uint64_t seed);

struct CacheConfig {
    std::uint64_t condition_seed = 7;
    double reference_polar_deg = 90.0;
    std::int64_t n_samples = 2000;
    std::int64_t resolution = 128;
    double fov_deg = 49.1;
    std::optional<PruneThresholds> thresholds; // calibrated when absent
    int calibration_views = 200;
    CorruptionConfig corruption{};
    RefinementConfig refinement{};
    std::uint64_t seed = 0;
    std::int64_t abort_window = 1000;
    double abort_discard_rate = 0.95;
};

struct CacheEntry {
    std::int64_t view_id = 0;
    std::string file;
    CameraPose pose;
    PruneStatus status = PruneStatus::kKept;
    double semantic_score = 0.0;
    std::int64_t bad_pixel_max = 0;
    RefinementConfig refinement{};
};

struct CacheStats {
    std::int64_t views = 0;
    std::int64_t kept = 0;
    std::int64_t discarded_geometry = 0;
    std::int64_t discarded_semantic = 0;
};

/// On-disk sample collection: PNG images plus manifest.json.
class SampleCache {
  public:
    static SampleCache load(const std::filesystem::path &dir);

    const std::filesystem::path &dir() const { return dir_; }
    const nlohmann::json &header() const { return header_; }
    const std::vector<CacheEntry> &entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::int64_t resolution() const;
    std::uint64_t condition_seed() const;
    CameraPose reference_pose() const;
    double fov_deg() const;

    /// (H, W, 3) image of entry i.
    torch::Tensor image(std::size_t i) const;

  private:
    std::filesystem::path dir_;
    nlohmann::json header_;
    std::vector<CacheEntry> entries_;

    friend SampleCache build_cache(const CacheConfig &, const std::filesystem::path &,
                                   CacheStats *);
};

/// Samples poses, prunes, refines and writes kept samples until n_samples are
/// kept. Throws RuntimeFailure if more than abort_discard_rate of a trailing
/// window of views is discarded. The manifest is written atomically last.
SampleCache build_cache(const CacheConfig &cfg, const std::filesystem::path &out_dir,
                        CacheStats *stats = nullptr);

void to_json(nlohmann::json &j, const CacheEntry &e);
void from_json(const nlohmann::json &j, CacheEntry &e);

/// created_utc value for manifests: SOURCE_DATE_EPOCH when set, else the epoch.
std::string reproducible_timestamp();

} // namespace cad
