# Copyright 2026 The edgeprune Authors
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.
"""Python bindings for the edgeprune pruning control plane and simulator."""

import json as _json
import os as _os

from ._core import (  # noqa: F401
    Error,
    ModelGraph,
    PruneMask,
    apply_prune,
    cost_metrics,
    device_slope,
    fit_accuracy,
    fit_latency,
    generate_poisson_arrivals,
    l1_channel_ranking,
    make_chain,
    partition,
    predict_accuracy,
    restore,
    solve_ratios,
)

__version__ = "0.1.0"


def simulate(config, seed=None, controller=None, base_dir=None):
    """Run a scenario and return its metrics as a dict.

    ``config`` is a path to a JSON scenario or an already-parsed dict.
    """
    if isinstance(config, (str, _os.PathLike)):
        path = _os.fspath(config)
        with open(path) as f:
            doc = f.read()
        base_dir = base_dir or _os.path.dirname(_os.path.abspath(path))
    else:
        doc = _json.dumps(config)
    out = _core._simulate_json(doc, seed=seed, controller=controller, base_dir=base_dir or ".")
    return _json.loads(out)


from . import _core  # noqa: E402
