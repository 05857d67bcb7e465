"""Deterministic JSON reports with embedded run manifests.

Reports are canonical: keys sorted, tight separators, no timestamps, so
rerunning the same command on the same inputs writes identical bytes.
Wall-clock numbers go to a separate runtime sidecar that is not part of
the canonical report.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .fit import FittedModel
from .select import SelectionResult

REPORT_KINDS = ("bin", "fit-select", "classify", "simulate", "validate")


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run, embedded in its report."""

    subcommand: str
    seed: int
    config: dict
    inputs: tuple = ()
    tool: str = "tailmix"
    version: str = __version__
    backend: str = field(default_factory=lambda: kernels.ACTIVE_BACKEND)

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "backend": self.backend,
            "subcommand": self.subcommand,
            "seed": self.seed,
            "config": dict(self.config),
            "inputs": [dict(i) for i in self.inputs],
        }


def describe_input(path) -> dict:
    """Path plus content hash, so the manifest pins what was read."""
    path = Path(path)
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return {"path": path.name, "sha256": h.hexdigest()}


def jsonable(obj):
    """Coerce report structures to plain JSON types.

    Numpy scalars become Python scalars; non-finite floats become their
    repr strings, since canonical JSON refuses NaN and infinities.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def canonical_json(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def build_report(kind: str, manifest: RunManifest, results) -> dict:
    if kind not in REPORT_KINDS:
        raise ValueError(f"unknown report kind {kind!r}")
    return {"kind": kind, "manifest": manifest.to_dict(), "results": results}


def write_report(path, report: dict) -> None:
    Path(path).write_text(canonical_json(report) + "\n", encoding="utf-8")


def serialize_fitted(model: FittedModel) -> dict:
    return {
        "model": model.spec.label,
        "x_min": model.spec.x_min,
        "exp_mode": model.spec.exp_mode,
        "dof": model.spec.dof,
        "params": {
            "weights": list(model.params.weights),
            "lambdas": list(model.params.lambdas),
            "alpha": model.params.alpha,
        },
        "loglik": model.loglik,
        "bic": model.bic,
        "n": model.n,
        "data_fingerprint": model.data_fingerprint,
        "diagnostics": model.diagnostics,
    }


def serialize_selection(sel: SelectionResult) -> dict:
    strengths = {}
    for base in ("log10", "natural"):
        for cmp_name, st in sel.strengths(base).items():
            strengths.setdefault(cmp_name, {})[base] = {
                "label": st.label,
                "sign": st.sign,
            }
    return {
        "chosen": sel.chosen,
        "threshold": sel.threshold,
        "log_bf_ep_p": sel.log_bf_ep_p,
        "log_bf_eep_ep": sel.log_bf_eep_ep,
        "eep_failure": sel.eep_failure,
        "strengths": strengths,
        "models": {label: serialize_fitted(m) for label, m in sel.models.items()},
    }
