# Copyright Contributors to the cad3d Project
# SPDX-License-Identifier: Apache-2.0

"""Latent-to-triplane 3D generator distilled from a synthetic multi-view prior."""

import json as _json

from ._cad import (
    ConfigError,
    ContractError,
    Model,
    RuntimeFailure,
    __version__,
    build_cache,
    f_logistic,
    psnr,
    render_oracle,
    sample_pose,
    semantic_score,
    train,
    turntable,
)


def load_config(path):
    """Validated run configuration with defaults filled in, as a dict."""
    from ._cad import config_json

    return _json.loads(config_json(str(path)))


def model_config(model):
    """Run configuration stored in a loaded checkpoint, as a dict."""
    return _json.loads(model.config_json())


__all__ = [
    "ConfigError",
    "ContractError",
    "Model",
    "RuntimeFailure",
    "__version__",
    "build_cache",
    "f_logistic",
    "load_config",
    "model_config",
    "psnr",
    "render_oracle",
    "sample_pose",
    "semantic_score",
    "train",
    "turntable",
]
