"""Seeded synthetic score datasets for self-tests and desk-scale experiments.

The generator draws per-cell adequacy and fluency penalties from per-system
normal distributions (optionally correlated), truncates at zero, and
quantizes to the penalty lattice, then emits score matrices directly; no
error-level annotations are fabricated because every downstream analysis
consumes score matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EvaluationSet, Orientation, ScoreMatrix
from .scoring import ADEQUACY_MQM, ALL_MQM, FLUENCY_MQM, OTHER_MQM, MqmMatrices
from .stats import derive_subseed


def _per_system(values, k: int, what: str) -> tuple[float, ...]:
    arr = np.broadcast_to(np.asarray(values, dtype=np.float64), (k,)) if np.ndim(values) == 0 else np.asarray(values, dtype=np.float64)
    if arr.shape != (k,):
        raise ValueError(f"{what} must be a scalar or a length-{k} sequence")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a synthetic dataset: per-system penalty distributions."""

    n_systems: int
    n_segments: int
    adequacy_means: tuple[float, ...]
    adequacy_stds: tuple[float, ...]
    fluency_means: tuple[float, ...]
    fluency_stds: tuple[float, ...]
    correlation: float = 0.0
    seed: int = 0
    lattice: float = 0.1
    name: str = "synthetic"

    def __post_init__(self) -> None:
        if self.n_systems < 2:
            raise ValueError("need at least 2 systems")
        if self.n_segments < 1:
            raise ValueError("need at least 1 segment")
        if not -1.0 <= self.correlation <= 1.0:
            raise ValueError("correlation must be in [-1, 1]")
        if self.lattice < 0.0:
            raise ValueError("lattice must be >= 0 (0 disables quantization)")
        for field_name in ("adequacy_means", "adequacy_stds", "fluency_means", "fluency_stds"):
            object.__setattr__(self, field_name, _per_system(getattr(self, field_name), self.n_systems, field_name))
        if any(v < 0 for v in self.adequacy_stds) or any(v < 0 for v in self.fluency_stds):
            raise ValueError("standard deviations must be >= 0")

    @classmethod
    def ladder(
        cls,
        n_systems: int,
        n_segments: int,
        adequacy_range: tuple[float, float] = (1.0, 6.0),
        adequacy_std: float = 2.0,
        fluency_range: tuple[float, float] = (1.0, 3.0),
        fluency_std: float = 1.0,
        correlation: float = 0.0,
        seed: int = 0,
        lattice: float = 0.1,
        name: str = "synthetic",
    ) -> "SyntheticSpec":
        """Evenly spaced per-system means between the range endpoints."""
        return cls(
            n_systems=n_systems,
            n_segments=n_segments,
            adequacy_means=tuple(np.linspace(*adequacy_range, n_systems)),
            adequacy_stds=(adequacy_std,) * n_systems,
            fluency_means=tuple(np.linspace(*fluency_range, n_systems)),
            fluency_stds=(fluency_std,) * n_systems,
            correlation=correlation,
            seed=seed,
            lattice=lattice,
            name=name,
        )


@dataclass(frozen=True)
class SyntheticDataset:
    eval_set: EvaluationSet
    mqm: MqmMatrices
    spec: SyntheticSpec


def generate_dataset(spec: SyntheticSpec) -> SyntheticDataset:
    """Draw the dataset; bit-identical for a fixed seed and shape."""
    rng = np.random.default_rng(derive_subseed(spec.seed, "generate"))
    k, n = spec.n_systems, spec.n_segments
    z1 = rng.standard_normal((k, n))
    z2 = rng.standard_normal((k, n))
    rho = spec.correlation
    mu_a = np.asarray(spec.adequacy_means)[:, None]
    sd_a = np.asarray(spec.adequacy_stds)[:, None]
    mu_f = np.asarray(spec.fluency_means)[:, None]
    sd_f = np.asarray(spec.fluency_stds)[:, None]
    adequacy = mu_a + sd_a * z1
    fluency = mu_f + sd_f * (rho * z1 + np.sqrt(1.0 - rho**2) * z2)
    adequacy = np.clip(adequacy, 0.0, None)
    fluency = np.clip(fluency, 0.0, None)
    if spec.lattice > 0:
        adequacy = np.round(adequacy / spec.lattice) * spec.lattice
        fluency = np.round(fluency / spec.lattice) * spec.lattice

    width_s = len(str(k))
    width_g = len(str(n))
    systems = tuple(f"sys{i:0{width_s}d}" for i in range(1, k + 1))
    segments = tuple(f"seg{j:0{width_g}d}" for j in range(1, n + 1))
    eval_set = EvaluationSet(
        name=spec.name,
        language_pair="synthetic",
        systems=systems,
        segments=segments,
        candidates={(s, g): "" for s in systems for g in segments},
        annotations=(),
    )

    def matrix(name: str, raw: np.ndarray) -> ScoreMatrix:
        return ScoreMatrix.from_raw(name, raw, Orientation.LOWER_BETTER, systems, segments)

    mqm = MqmMatrices(
        all=matrix(ALL_MQM, adequacy + fluency),
        adequacy=matrix(ADEQUACY_MQM, adequacy),
        fluency=matrix(FLUENCY_MQM, fluency),
        other=matrix(OTHER_MQM, np.zeros((k, n))),
    )
    return SyntheticDataset(eval_set=eval_set, mqm=mqm, spec=spec)
