// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#include "cad/adversarial.hpp"
#include "cad/camera.hpp"
#include "cad/config.hpp"
#include "cad/error.hpp"
#include "cad/generator.hpp"
#include "cad/prior.hpp"
#include "cad/trainer.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

/// (H, W, 3) float copy of an image tensor in either layout.
py::array_t<float> to_numpy(torch::Tensor image) {
    if (image.dim() == 3 && image.size(0) == 3 && image.size(2) != 3) {
        image = image.permute({1, 2, 0});
    }
    image = image.detach().to(torch::kFloat).contiguous();
    py::array_t<float> out({image.size(0), image.size(1), image.size(2)});
    std::memcpy(out.mutable_data(), image.data_ptr<float>(), sizeof(float) * image.numel());
    return out;
}

torch::Tensor from_numpy(const py::array_t<float, py::array::c_style | py::array::forcecast> &image) {
    if (image.ndim() != 3 || image.shape(2) != 3) {
        throw cad::ContractError("expected an (H, W, 3) image");
    }
    return torch::from_blob(const_cast<float *>(image.data()), {image.shape(0), image.shape(1), 3},
                            torch::kFloat)
        .clone();
}

cad::InversionBranch branch_from(const std::string &name) {
    if (name == "3d") return cad::InversionBranch::k3D;
    if (name == "2d") return cad::InversionBranch::k2D;
    throw cad::ConfigError("branch must be 2d or 3d");
}

/// A trained generator loaded from a checkpoint manifest.
class Model {
  public:
    explicit Model(const fs::path &ckpt) {
        if (!fs::exists(ckpt)) {
            throw cad::ConfigError("checkpoint not found: " + ckpt.string());
        }
        nlohmann::json manifest;
        state_ = cad::load_checkpoint(ckpt, nullptr, &manifest);
        config_ = manifest.at("config").get<cad::RunConfig>();
        state_.generator->eval();
    }

    int stage() const { return state_.stage; }
    std::int64_t iteration() const { return state_.iteration; }
    std::string config_json() const { return nlohmann::json(config_).dump(); }

    py::array_t<float> render(std::uint64_t latent_seed, double azimuth, double polar, double radius,
                              const std::string &branch, std::uint64_t seed) {
        torch::NoGradGuard no_grad;
        const auto w = latent(latent_seed);
        return to_numpy(cad::render_latent(state_.generator, w, cad::pose_from_spherical(azimuth, polar, radius),
                                           config_.model.inference_settings(), branch_from(branch), seed));
    }

    std::vector<py::array_t<float>> interpolate(std::uint64_t seed_a, std::uint64_t seed_b, int steps,
                                                double azimuth, double polar, const std::string &branch,
                                                std::uint64_t seed) {
        if (steps < 2) throw cad::ConfigError("steps must be at least 2");
        torch::NoGradGuard no_grad;
        const auto wa = latent(seed_a);
        const auto wb = latent(seed_b);
        const auto pose = cad::pose_from_spherical(azimuth, polar, cad::kCameraRadius);
        std::vector<py::array_t<float>> frames;
        for (int k = 0; k < steps; ++k) {
            const double t = static_cast<double>(k) / (steps - 1);
            frames.push_back(to_numpy(cad::render_latent(state_.generator, cad::interpolate(wa, wb, t), pose,
                                                         config_.model.inference_settings(), branch_from(branch),
                                                         seed)));
        }
        return frames;
    }

    py::dict invert(const py::array_t<float, py::array::c_style | py::array::forcecast> &target, double azimuth,
                    double polar, int steps, double lr, const std::string &branch, std::uint64_t seed) {
        const cad::RandomFeaturePyramid perceptual;
        cad::InversionOptions opt;
        opt.steps = steps;
        opt.learning_rate = lr;
        opt.branch = branch_from(branch);
        const auto image = cad::to_chw(from_numpy(target));
        const auto result =
            cad::invert(state_.generator, image, cad::pose_from_spherical(azimuth, polar, cad::kCameraRadius),
                        config_.model.inference_settings(), perceptual, opt, seed);
        py::dict out;
        out["reconstruction"] = to_numpy(result.reconstruction);
        out["psnr_db"] = cad::psnr(result.reconstruction, image);
        out["best_loss"] = result.best_loss;
        out["losses"] = result.losses;
        return out;
    }

    py::dict evaluate(int n_latents, int frames, std::uint64_t seed) {
        auto eval = config_.eval;
        eval.n_latents = n_latents;
        eval.frames = frames;
        eval.seed = seed;
        const auto condition = cad::make_condition(
            config_.cache.condition_seed, config_.cache.reference_polar_deg,
            cad::Intrinsics{config_.model.fov_deg, config_.model.image_resolution});
        const auto report = cad::evaluate(state_.generator, config_.model, condition, eval);
        py::dict out;
        out["turntable_image_score"] = report.turntable_image_score;
        out["consistency_gap"] = report.consistency_gap;
        out["diversity"] = report.diversity;
        return out;
    }

  private:
    torch::Tensor latent(std::uint64_t seed) {
        return cad::map_latent(state_.generator, cad::sample_latents(config_.model.generator, 1, seed))[0];
    }

    cad::TrainState state_;
    cad::RunConfig config_;
};

std::string train(int stage, const fs::path &config, const fs::path &cache_dir, const fs::path &run_dir,
                  std::optional<fs::path> resume, std::optional<fs::path> init_from,
                  std::optional<std::int64_t> stop_after, bool allow_config_change) {
    const auto cfg = cad::load_run_config(config);
    const auto cache = cad::SampleCache::load(cache_dir);
    cad::TrainOptions opts{run_dir};
    opts.resume = std::move(resume);
    opts.init_from = std::move(init_from);
    opts.stop_after = stop_after;
    opts.allow_config_change = allow_config_change;
    if (stage == 1) {
        return cad::train_stage1(cfg, cache, opts).manifest.string();
    }
    if (stage == 2) {
        if (!opts.init_from) {
            opts.init_from = run_dir / "checkpoints" / "stage1_final.json";
        }
        return cad::train_stage2(cfg, cache, opts).manifest.string();
    }
    throw cad::ConfigError("stage must be 1 or 2");
}

py::dict build_cache(const fs::path &config, const fs::path &out_dir) {
    cad::CacheStats stats;
    {
        py::gil_scoped_release release;
        cad::build_cache(cad::load_run_config(config).cache, out_dir, &stats);
    }
    py::dict out;
    out["views"] = stats.views;
    out["kept"] = stats.kept;
    out["discarded_geometry"] = stats.discarded_geometry;
    out["discarded_semantic"] = stats.discarded_semantic;
    return out;
}

} // namespace

PYBIND11_MODULE(_cad, m) {
    m.doc() = "Latent-to-triplane 3D generator distilled from a synthetic multi-view prior";
    m.attr("__version__") = CAD_VERSION;

    py::register_exception<cad::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<cad::ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<cad::RuntimeFailure>(m, "RuntimeFailure", PyExc_RuntimeError);

    m.def("config_json", [](const fs::path &path) { return nlohmann::json(cad::load_run_config(path)).dump(); },
          py::arg("path"), "Parsed, validated and defaulted run configuration as JSON text.");
    m.def("build_cache", &build_cache, py::arg("config"), py::arg("out_dir"),
          "Builds the pruned prior-sample cache; returns view statistics.");
    m.def("train", &train, py::arg("stage"), py::arg("config"), py::arg("cache"), py::arg("run_dir"),
          py::arg("resume") = py::none(), py::arg("init_from") = py::none(), py::arg("stop_after") = py::none(),
          py::arg("allow_config_change") = false, py::call_guard<py::gil_scoped_release>(),
          "Runs one training stage; returns the final checkpoint manifest path.");

    m.def(
        "sample_pose",
        [](std::uint64_t seed, double radius) {
            const auto p = cad::sample_pose_uniform(seed, radius);
            return py::make_tuple(p.azimuth_deg(), p.polar_deg(), p.radius());
        },
        py::arg("seed"), py::arg("radius") = cad::kCameraRadius, "Uniform camera pose (azimuth, polar, radius).");
    m.def(
        "turntable",
        [](double azimuth, double polar, int frames) {
            std::vector<std::tuple<double, double, double>> out;
            for (const auto &p : cad::turntable(cad::pose_from_spherical(azimuth, polar, cad::kCameraRadius), frames)) {
                out.emplace_back(p.azimuth_deg(), p.polar_deg(), p.radius());
            }
            return out;
        },
        py::arg("azimuth"), py::arg("polar"), py::arg("frames") = 120);
    m.def(
        "render_oracle",
        [](std::uint64_t condition_seed, double azimuth, double polar, std::int64_t resolution) {
            return to_numpy(cad::render_oracle(cad::oracle_scene(condition_seed),
                                               cad::pose_from_spherical(azimuth, polar, cad::kCameraRadius),
                                               cad::Intrinsics{49.1, resolution}));
        },
        py::arg("condition_seed"), py::arg("azimuth"), py::arg("polar"), py::arg("resolution") = 128,
        "Ray-cast render of the synthetic oracle scene, (H, W, 3) float32.");
    m.def(
        "semantic_score",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast> &image,
           const py::array_t<float, py::array::c_style | py::array::forcecast> &reference) {
            return cad::semantic_score(from_numpy(image), from_numpy(reference), cad::RandomProjectionEmbedder{});
        },
        py::arg("image"), py::arg("reference"));
    m.def(
        "psnr",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast> &a,
           const py::array_t<float, py::array::c_style | py::array::forcecast> &b) {
            return cad::psnr(from_numpy(a), from_numpy(b));
        },
        py::arg("a"), py::arg("b"));
    m.def("f_logistic", py::overload_cast<double>(&cad::f_logistic), py::arg("u"), "-log(1 + exp(-u))");

    py::class_<Model>(m, "Model")
        .def(py::init<const fs::path &>(), py::arg("ckpt"))
        .def_property_readonly("stage", &Model::stage)
        .def_property_readonly("iteration", &Model::iteration)
        .def("config_json", &Model::config_json)
        .def("render", &Model::render, py::arg("latent_seed") = 0, py::arg("azimuth") = 180.0,
             py::arg("polar") = 90.0, py::arg("radius") = cad::kCameraRadius, py::arg("branch") = "3d",
             py::arg("seed") = 0)
        .def("interpolate", &Model::interpolate, py::arg("seed_a") = 0, py::arg("seed_b") = 1,
             py::arg("steps") = 11, py::arg("azimuth") = 180.0, py::arg("polar") = 90.0, py::arg("branch") = "3d",
             py::arg("seed") = 0)
        .def("invert", &Model::invert, py::arg("target"), py::arg("azimuth"), py::arg("polar"),
             py::arg("steps") = 500, py::arg("lr") = 0.01, py::arg("branch") = "3d", py::arg("seed") = 0)
        .def("evaluate", &Model::evaluate, py::arg("n_latents") = 16, py::arg("frames") = 120, py::arg("seed") = 3);
}
