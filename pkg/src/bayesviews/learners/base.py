"""Common interface of the online view models."""

from __future__ import annotations

import copy
import json

import numpy as np

CHECKPOINT_VERSION = 1


def as_input(x) -> np.ndarray:
    """Accept a :class:`~bayesviews.features.FeatureVector` or a plain vector."""
    return np.asarray(getattr(x, "flattened", x), dtype=float).reshape(-1)


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "dtype": str(obj.dtype), "shape": list(obj.shape)}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.array(obj["__ndarray__"], dtype=obj["dtype"]).reshape(obj["shape"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


class OnlineViewModel:
    """Stateful regressor updated one sample at a time.

    Subclasses keep every piece of mutable state in ``self.state`` (a dict)
    so that :meth:`snapshot` and :meth:`restore` are exact.
    """

    kind = "base"

    def __init__(self, n_inputs: int, n_outputs: int):
        self.n_inputs = n_inputs
        self.n_outputs = n_outputs
        self.state = {}

    def predict(self, x) -> np.ndarray:
        raise NotImplementedError

    def update(self, x, target) -> float:
        raise NotImplementedError

    def reset(self):
        raise NotImplementedError

    def config(self) -> dict:
        return {"n_inputs": self.n_inputs, "n_outputs": self.n_outputs}

    def snapshot(self):
        return copy.deepcopy(self.state)

    def restore(self, snap):
        self.state = copy.deepcopy(snap)

    def to_json(self) -> str:
        return json.dumps({
            "version": CHECKPOINT_VERSION,
            "model": self.kind,
            "config": self.config(),
            "state": _encode(self.state),
        })

    @classmethod
    def from_json(cls, text: str):
        d = json.loads(text)
        if d.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {d.get('version')}")
        if d["model"] != cls.kind:
            raise ValueError(f"checkpoint holds a {d['model']!r} model, not {cls.kind!r}")
        obj = cls(**d["config"])
        obj.state = _decode(d["state"])
        return obj
