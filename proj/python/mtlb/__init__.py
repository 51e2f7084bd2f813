# Copyright 2026 The mtlb Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Motion-prediction transfer-learning workbench.

Thin Python layer over the native core: dataset generation, metric
functions, the learning-rate schedule and the seven-method study.
"""

from ._mtlb import (
    ConfigError,
    Dataset,
    DegenerateInputError,
    DimensionError,
    FormatError,
    InputError,
    MtlbError,
    NumericError,
    StateError,
    __version__,
    average_precision,
    evaluate_oracle,
    generate,
    lr_at,
    min_ade,
    min_fde,
    run_study,
    scale_lr,
)

METHODS = ("TB", "SB", "MTL", "FT", "FTD", "FTE", "FR")

__all__ = [
    "ConfigError",
    "Dataset",
    "DegenerateInputError",
    "DimensionError",
    "FormatError",
    "InputError",
    "METHODS",
    "MtlbError",
    "NumericError",
    "StateError",
    "__version__",
    "average_precision",
    "evaluate_oracle",
    "generate",
    "lr_at",
    "min_ade",
    "min_fde",
    "run_study",
    "scale_lr",
]
