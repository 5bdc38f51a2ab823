// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cad/adversarial.hpp"
#include "cad/generator.hpp"
#include "cad/prior.hpp"
#include "cad/render.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace cad {

/// Architecture and image settings shared by both training stages.
struct ModelConfig {
    GeneratorConfig generator{};
    DiscriminatorConfig discriminator{};
    DiscriminatorConfig patch_discriminator{64, 16, 64, 0};
    std::int64_t image_resolution = 128;
    double fov_deg = 49.1;
    std::int64_t raw_resolution = 64;
    std::int64_t n_coarse = 48;
    std::int64_t n_fine = 48;
    std::int64_t chunk_rays = 8192;

    /// Training renders: jittered depth samples.
    ImageSettings image_settings() const;
    /// Inference and evaluation renders: fixed depth samples.
    ImageSettings inference_settings() const;
};

struct TrainConfig {
    int stage = 1;
    std::int64_t iterations = 2000;
    std::int64_t batch_size = 16;
    double lr_g = 0.0025;
    double lr_d = 0.002;
    double beta1 = 0.0;
    double beta2 = 0.99;
    double gamma = 3.0;
    LossConvention loss_convention = LossConvention::kSoftplus;
    AdaState ada{};
    /// Iterations whose real scores are pooled into one ADA update.
    std::int64_t ada_interval = 4;
    AugmentConfig augment{};
    /// Stage 2: weights of the consistency and patch-GAN terms.
    double consistency_weight = 1.0;
    double patch_gan_weight = 0.1;
    std::int64_t patch_size = 64;
    /// Stage 2: which generator parts are fine-tuned next to the 3D upsampler.
    bool train_decoder = true;
    bool train_mapping = false;
    std::uint64_t seed = 0;
    std::int64_t checkpoint_interval = 250;
    std::int64_t log_interval = 10;
    /// Held-out cache entries and fixed latents used by the probes.
    std::int64_t probe_size = 16;
    std::int64_t probe_interval = 50;
};

struct EvalConfig {
    int n_latents = 16;
    int frames = 120;
    std::uint64_t seed = 0;
};

/// The whole document accepted by the command line tool.
struct RunConfig {
    CacheConfig cache{};
    ModelConfig model{};
    TrainConfig stage1{};
    TrainConfig stage2{};
    EvalConfig eval{};
};

std::string to_string(LossConvention c);
LossConvention loss_convention_from_string(const std::string &name);

void to_json(nlohmann::json &j, const ModelConfig &c);
void from_json(const nlohmann::json &j, ModelConfig &c);
void to_json(nlohmann::json &j, const TrainConfig &c);
void from_json(const nlohmann::json &j, TrainConfig &c);
void to_json(nlohmann::json &j, const EvalConfig &c);
void from_json(const nlohmann::json &j, EvalConfig &c);
void to_json(nlohmann::json &j, const AugmentConfig &c);
void from_json(const nlohmann::json &j, AugmentConfig &c);
void to_json(nlohmann::json &j, const CacheConfig &c);
void from_json(const nlohmann::json &j, CacheConfig &c);
void to_json(nlohmann::json &j, const RunConfig &c);
void from_json(const nlohmann::json &j, RunConfig &c);

/// Overlays `user` on the defaults. Throws ConfigError naming the first key
/// (at any depth) that the defaults do not define, or any value of the wrong type.
nlohmann::json merge_strict(const nlohmann::json &defaults, const nlohmann::json &user,
                            const std::string &where = "");

/// Parses a run document; missing keys keep their defaults, unknown keys are errors.
RunConfig parse_run_config(const nlohmann::json &doc);
RunConfig load_run_config(const std::filesystem::path &path);

/// Validates cross-field constraints (power-of-two sizes, stage-2 patch size, ...).
void validate(const RunConfig &cfg);

/// 16-hex-digit FNV-1a hash of the canonical JSON dump.
std::string config_hash(const nlohmann::json &doc);

} // namespace cad
