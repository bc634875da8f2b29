# Copyright 2026 The covchange Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Channel covariance change detection (C++ core)."""

from ._core import (
    ConfigParseError,
    ConfigValidationError,
    InvalidParameter,
    NotHermitianError,
    NotPositiveDefiniteError,
    __version__,
    cusum,
    divergence,
    ld_divergence,
    llr,
    logdet,
    ml_covariance,
    noise_floor,
    normalize_config,
    onering_covariance,
    preset_names,
    preset_text,
    run_experiment,
    shrinkage_weight,
    sweep,
)

__all__ = [
    "ConfigParseError",
    "ConfigValidationError",
    "InvalidParameter",
    "NotHermitianError",
    "NotPositiveDefiniteError",
    "__version__",
    "cusum",
    "divergence",
    "ld_divergence",
    "llr",
    "logdet",
    "ml_covariance",
    "noise_floor",
    "normalize_config",
    "onering_covariance",
    "preset_names",
    "preset_text",
    "run_experiment",
    "shrinkage_weight",
    "sweep",
]
