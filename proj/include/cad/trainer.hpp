// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cad/adversarial.hpp"
#include "cad/config.hpp"
#include "cad/generator.hpp"
#include "cad/prior.hpp"

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace cad {

/// Everything a training run mutates.
struct TrainState {
    int stage = 1;
    std::int64_t iteration = 0;
    Generator generator{nullptr};
    Discriminator discriminator{nullptr};
    Discriminator patch_discriminator{nullptr};
    std::unique_ptr<torch::optim::Adam> opt_g;
    std::unique_ptr<torch::optim::Adam> opt_d;
    AdaState ada{};
};

/// Fresh networks for the model config, initialized from the seed.
TrainState init_state(const ModelConfig &model, std::uint64_t seed);

/// Paths of a saved checkpoint: the tensor archive and its JSON manifest.
struct Checkpoint {
    std::filesystem::path blob;
    std::filesystem::path manifest;
    int stage = 1;
    std::int64_t iteration = 0;
};

/// Writes `<prefix>.pt` and `<prefix>.json` (shapes, config hash, stage,
/// iteration, RNG key, ADA state). Written to temporary names and renamed.
/// Keys of `extra` are merged into the manifest.
Checkpoint save_checkpoint(const TrainState &state, const RunConfig &cfg,
                           const std::filesystem::path &prefix,
                           const nlohmann::json &extra = nullptr);

/// Rebuilds a state from a checkpoint manifest path (or its `.pt` blob).
/// Optimizers are restored when the checkpoint holds them for the same stage.
TrainState load_checkpoint(const std::filesystem::path &path, ModelConfig *model_out = nullptr,
                           nlohmann::json *manifest_out = nullptr);

struct TrainOptions {
    std::filesystem::path run_dir;
    /// Checkpoint to continue from (same stage).
    std::optional<std::filesystem::path> resume;
    /// Stage 2: the stage-1 checkpoint to start from.
    std::optional<std::filesystem::path> init_from;
    bool allow_config_change = false;
    /// Stops (with a checkpoint) after this iteration; used to test resumption.
    std::optional<std::int64_t> stop_after;
    /// Progress callback, called after every iteration.
    std::function<void(const nlohmann::json &)> on_progress;
};

/// Adversarial training of the generator against the pose-conditioned
/// discriminator on cached prior samples. Returns the final checkpoint.
Checkpoint train_stage1(const RunConfig &cfg, const SampleCache &cache, const TrainOptions &opts);

/// Trains the 3D upsampler (and optionally the decoder and mapping network)
/// with the consistency loss on patches plus a patch-discriminator GAN loss.
Checkpoint train_stage2(const RunConfig &cfg, const SampleCache &cache, const TrainOptions &opts);

struct EvalReport {
    double turntable_image_score = 0.0;
    double consistency_gap = 0.0;
    double diversity = 0.0;
};

void to_json(nlohmann::json &j, const EvalReport &r);

/// Turntable image score (3D branch vs the reference image), 2D-vs-3D
/// perceptual gap along the turntable, and mean pairwise perceptual distance
/// among n_latents renders at the reference pose.
EvalReport evaluate(Generator &gen, const ModelConfig &model, const ConditionSpec &condition,
                    const EvalConfig &eval);

/// Turntable score of arbitrary frames against the condition.
double turntable_score(const std::vector<torch::Tensor> &frames_hwc, const ConditionSpec &condition,
                       const ImageEmbedder &embedder);

/// Mean consistency loss over a fixed set of (latent, pose, patch) probes.
double consistency_probe(Generator &gen, const ModelConfig &model, const SampleCache &cache,
                         std::int64_t n_probes, std::int64_t patch, std::uint64_t seed);

/// Seed of the fixed stage-2 consistency probe set.
std::uint64_t consistency_probe_seed(const TrainConfig &tc);

/// Reads a metrics JSON-lines file.
std::vector<nlohmann::json> read_metrics(const std::filesystem::path &path);

} // namespace cad
