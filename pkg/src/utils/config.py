"""
Experiment configuration.

One JSON document describes a run. Every key has a default in DEFAULTS;
unknown keys are rejected so a typo never silently falls back to a
default. The only environment setting is WORKBENCH_THREADS, read from
the process environment or a .env file in the working directory.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

THREADS_ENV = "WORKBENCH_THREADS"

DEFAULTS: Dict[str, Any] = {
    "dimension": 2,
    "half_width": 4.0,
    "cells": 128,
    "seed": 0,
    "theta": 1e-6,
    "bump_count": 20,
    "omega_count": 10,
    "omega_degree": 4,
    "omega_mean": 1.0,
    "project_mean_zero": True,
    "sphere_nodes": 64,
    "nodes_per_octave": 8,
    "p": 1.5,
    "q": 6.0,
    "alpha": 1.0,
    "r": 1.5,
    "lemma_r": 1.5,
    "epsilon": 0.5,
    "neg_epsilon": 1.0,
    "delta": 0.5,
    "iter_k": 2,
    "selfimp_operator": "M",
    "explore_gauge": {"variant": "power", "r": 1.5},
    "resolutions": [64, 128],
    "radii": [4.0, 8.0, 16.0, 32.0],
    "probe_axis": None,
    "probe_h": 0.125,
    "out_dir": "reports",
    "cases": ["repr-2"],
    "weights": [{"kind": "power", "a": 0.0}],
    "stride_shift": 3,
    "stability_tolerance": 0.2,
}


@dataclass
class ExperimentConfig:
    dimension: int = DEFAULTS["dimension"]
    half_width: float = DEFAULTS["half_width"]
    cells: int = DEFAULTS["cells"]
    seed: int = DEFAULTS["seed"]
    theta: float = DEFAULTS["theta"]
    bump_count: int = DEFAULTS["bump_count"]
    omega_count: int = DEFAULTS["omega_count"]
    omega_degree: int = DEFAULTS["omega_degree"]
    omega_mean: float = DEFAULTS["omega_mean"]
    project_mean_zero: bool = DEFAULTS["project_mean_zero"]
    sphere_nodes: int = DEFAULTS["sphere_nodes"]
    nodes_per_octave: int = DEFAULTS["nodes_per_octave"]
    p: float = DEFAULTS["p"]
    q: float = DEFAULTS["q"]
    alpha: float = DEFAULTS["alpha"]
    r: float = DEFAULTS["r"]
    lemma_r: float = DEFAULTS["lemma_r"]
    epsilon: float = DEFAULTS["epsilon"]
    neg_epsilon: float = DEFAULTS["neg_epsilon"]
    delta: float = DEFAULTS["delta"]
    iter_k: int = DEFAULTS["iter_k"]
    selfimp_operator: str = DEFAULTS["selfimp_operator"]
    explore_gauge: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS["explore_gauge"]))
    resolutions: List[int] = field(default_factory=lambda: list(DEFAULTS["resolutions"]))
    radii: List[float] = field(default_factory=lambda: list(DEFAULTS["radii"]))
    probe_axis: Optional[str] = DEFAULTS["probe_axis"]
    probe_h: float = DEFAULTS["probe_h"]
    out_dir: str = DEFAULTS["out_dir"]
    cases: List[str] = field(default_factory=lambda: list(DEFAULTS["cases"]))
    weights: List[Dict[str, Any]] = field(default_factory=lambda: [dict(w) for w in DEFAULTS["weights"]])
    stride_shift: Optional[int] = DEFAULTS["stride_shift"]
    stability_tolerance: float = DEFAULTS["stability_tolerance"]

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        for resolution in [self.cells, *self.resolutions]:
            if resolution < 2 or resolution % 2:
                raise ValueError(f"resolutions must be even and >= 2, got {resolution}")
        if not 0 <= self.theta < 1:
            raise ValueError(f"mask threshold theta must lie in [0, 1), got {self.theta}")
        if self.bump_count < 1 or self.omega_count < 1:
            raise ValueError("suite sizes must be positive")
        if not 1 < self.p < self.q:
            raise ValueError(f"exponents must satisfy 1 < p < q, got p={self.p}, q={self.q}")
        if self.probe_axis not in (None, "radius", "resolution"):
            raise ValueError(f"probe_axis must be 'radius', 'resolution' or null, got {self.probe_axis}")
        if self.selfimp_operator not in ("identity", "M", "Tstar"):
            raise ValueError(f"selfimp_operator must be identity, M or Tstar, got {self.selfimp_operator}")
        if not self.cases:
            raise ValueError("config names no cases")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def output_path(self) -> Path:
        return Path(self.out_dir)


def load_config(path: Path) -> ExperimentConfig:
    """Read and validate a JSON experiment config."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError(f"config must be a JSON object, got {type(data).__name__}")
    config = ExperimentConfig.from_dict(data)
    logger.info(f"Loaded config {path}: n={config.dimension}, N={config.cells}, R={config.half_width}, cases={config.cases}")
    return config


def thread_count() -> int:
    """Worker threads for case-level parallelism (WORKBENCH_THREADS, default 1)."""
    load_dotenv()
    raw = os.getenv(THREADS_ENV, "1")
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got '{raw}'")
    if threads < 1:
        raise ValueError(f"{THREADS_ENV} must be >= 1, got {threads}")
    return threads
