# Copyright 2026 The mccshap Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Shapley values with multicollinearity correction."""

from ._core import (
    Dataset,
    MccshapError,
    Model,
    adjustment_plan,
    exact_shapley,
    explain,
    fit,
    run_cli,
    synthetic,
    synthetic_presets,
)

__all__ = [
    "Dataset",
    "MccshapError",
    "Model",
    "adjustment_plan",
    "exact_shapley",
    "explain",
    "fit",
    "run_cli",
    "synthetic",
    "synthetic_presets",
]

__version__ = "0.1.0"
