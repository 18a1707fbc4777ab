"""Tests for checkpoint serialization."""

import json

import numpy as np
import pytest

from seamgraph.errors import NumericalError
from seamgraph.gnn.checkpoint import (
    dumps_checkpoint,
    load_checkpoint,
    loads_checkpoint,
    save_checkpoint,
)
from seamgraph.gnn.model import init_model
from seamgraph.models import ModelSpec


def _model(arch: str = "sage", aggregator: str = "pool"):
    spec = ModelSpec(arch=arch, aggregator=aggregator, hidden=4, layers=2, heads=2, out_heads=2)
    return init_model(spec, seed=3)


def _edit(text: str, fn) -> str:
    payload = json.loads(text)
    fn(payload)
    return json.dumps(payload)


class TestRoundTrip:
    @pytest.mark.parametrize("arch", ["gcn", "gat", "sage", "gin"])
    def test_exact(self, arch):
        model = _model(arch)
        model.params["head.bias"][0, 1] = 0.1 + 0.2
        restored = loads_checkpoint(dumps_checkpoint(model))
        assert restored.spec == model.spec
        assert set(restored.params) == set(model.params)
        for name, value in model.params.items():
            np.testing.assert_array_equal(restored.params[name], value)

    def test_file(self, tmp_path):
        model = _model()
        path = save_checkpoint(model, tmp_path / "nested" / "model.json")
        restored = load_checkpoint(path)
        assert restored.parameter_count == model.parameter_count


class TestRejects:
    def test_wrong_format(self):
        text = _edit(dumps_checkpoint(_model()), lambda p: p.update(format="other"))
        with pytest.raises(ValueError, match="not a checkpoint"):
            loads_checkpoint(text)

    def test_wrong_version(self):
        text = _edit(dumps_checkpoint(_model()), lambda p: p.update(version=99))
        with pytest.raises(ValueError, match="version 99"):
            loads_checkpoint(text)

    def test_missing_parameter(self):
        text = _edit(dumps_checkpoint(_model()), lambda p: p["params"].pop("head.bias"))
        with pytest.raises(ValueError, match="missing"):
            loads_checkpoint(text)

    def test_wrong_shape(self):
        def shrink(payload):
            payload["params"]["head.bias"] = {"shape": [1, 1], "values": [[0.0]]}

        with pytest.raises(ValueError, match="shape"):
            loads_checkpoint(_edit(dumps_checkpoint(_model()), shrink))

    def test_non_finite_parameter(self):
        model = _model()
        model.params["head.weight"][0, 0] = np.inf
        with pytest.raises(NumericalError):
            dumps_checkpoint(model)
