"""The pairwise-discrimination state witness and its saturation diagnostics.

For a completed ensemble ``{α_i, ψ_i}`` the witness is

    W(P) = ∑_{i>j} α_i α_j ‖ψ_i − ψ_j‖₁ [P(2|i,(i,j)) − P(2|j,(i,j))]

with maximum ``1 − 1/D`` over D-dimensional realizations. Measurements
``y = (i, j)`` are enumerated j-major: (1,0), (2,0), ..., (N−1,0), (2,1), ...
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .ensemble import WeightedEnsemble
from .qmat import helstrom, overlap, projector, trace_distance


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Behavior:
    """Probability table ``P(b|x,y)`` stored as an ``(X, Y, B)`` array.

    Measurements with fewer than ``B`` outcomes are zero-padded.
    """

    table: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 3:
            raise ShapeMismatch(f"behavior table must be 3-dimensional, got shape {t.shape}")
        object.__setattr__(self, "table", t)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.table.shape

    def check(self, atol: float = 1e-9) -> None:
        if np.min(self.table) < -atol:
            raise ValueError("behavior has negative probabilities")
        dev = np.max(np.abs(self.table.sum(axis=2) - 1.0))
        if dev > atol:
            raise ValueError(f"outcome probabilities do not sum to 1 (deviation {dev:.3e})")

    def p(self, b: int, x: int, y: int) -> float:
        """``P(b|x,y)`` with 1-based outcome label and 0-based x, y."""
        return float(self.table[x, y, b - 1])


def pair_list(n: int) -> list[tuple[int, int]]:
    return [(i, j) for j in range(n) for i in range(j + 1, n)]


def behavior_from_realization(states: Sequence[np.ndarray], measurements: Sequence[Sequence[np.ndarray]]) -> Behavior:
    """``P(b|x,y) = tr(ρ_x M_{b|y})`` for density matrices and POVMs."""
    n_b = max(len(m) for m in measurements)
    table = np.zeros((len(states), len(measurements), n_b))
    for x, rho in enumerate(states):
        for y, povm in enumerate(measurements):
            for b, m in enumerate(povm):
                table[x, y, b] = overlap(rho, m)
    return Behavior(table)


@dataclass(frozen=True)
class StateWitness:
    ensemble: WeightedEnsemble
    pairs: tuple[tuple[int, int], ...]
    coefficients: np.ndarray  # aligned with ``pairs``

    @property
    def dim(self) -> int:
        return self.ensemble.dim

    @property
    def w_star(self) -> float:
        return 1.0 - 1.0 / self.dim

    @property
    def n_preparations(self) -> int:
        return len(self.ensemble)

    @property
    def n_measurements(self) -> int:
        return len(self.pairs)


def build_state_witness(e: WeightedEnsemble) -> StateWitness:
    if not e.completed:
        raise ValueError("witness requires a completed ensemble (∑ α_i ψ_i = I/D)")
    pairs = tuple(pair_list(len(e)))
    alpha = e.weights
    coeffs = []
    for i, j in pairs:
        ov = abs(np.vdot(e.states[i], e.states[j])) ** 2
        coeffs.append(alpha[i] * alpha[j] * 2.0 * np.sqrt(max(1.0 - ov, 0.0)))
    return StateWitness(e, pairs, np.array(coeffs))


def ideal_measurements(e: WeightedEnsemble, tol: Tolerances = DEFAULT) -> list[list[np.ndarray]]:
    """Helstrom measurement of ``(ψ_i, ψ_j)`` for every pair, in witness order."""
    rhos = e.projectors()
    return [helstrom(rhos[i], rhos[j], tol) for i, j in pair_list(len(e))]


def ideal_behavior(e: WeightedEnsemble, tol: Tolerances = DEFAULT) -> Behavior:
    return behavior_from_realization(e.projectors(), ideal_measurements(e, tol))


def eval_witness(w: StateWitness, p: Behavior) -> float:
    n_x, n_y, n_b = p.shape
    if n_x < w.n_preparations or n_y < w.n_measurements or n_b < 2:
        raise ShapeMismatch(
            f"behavior shape {p.shape} too small for witness "
            f"({w.n_preparations} preparations, {w.n_measurements} measurements, 2 outcomes)"
        )
    t = p.table
    total = 0.0
    for y, ((i, j), c) in enumerate(zip(w.pairs, w.coefficients)):
        total += c * (t[i, y, 1] - t[j, y, 1])
    return float(total)


# --------------------------------------------------------------------------
# saturation diagnostics


@dataclass(frozen=True)
class CVector:
    pairs: tuple[tuple[int, int], ...]
    c: np.ndarray  # √(α_i α_j) ‖ρ_i − ρ_j‖₁
    d: np.ndarray  # 2 √(α_i α_j) √(1 − tr ρ_i ρ_j)


def cvec(rho: Sequence[np.ndarray], weights: Sequence[float]) -> CVector:
    if any(a <= 0 for a in weights):
        raise ValueError("weights must be positive")
    rhos = [projector(r) if np.ndim(r) == 1 else np.asarray(r, dtype=complex) for r in rho]
    pairs = tuple(pair_list(len(rhos)))
    c, d = [], []
    for i, j in pairs:
        s = np.sqrt(weights[i] * weights[j])
        c.append(s * trace_distance(rhos[i], rhos[j]))
        d.append(2 * s * np.sqrt(max(1.0 - overlap(rhos[i], rhos[j]), 0.0)))
    return CVector(pairs, np.array(c), np.array(d))


def robust_overlap_bounds(epsilon: float, weights: Sequence[float], dim: int) -> tuple[float, float]:
    """``(δ_o, δ_p)`` implied by a witness deficit ``epsilon``.

    Overlap deviations are at most ``δ_o = √(8ε) / √(min_{i≠j} α_i α_j)`` and
    impurities at most ``δ_p = 2ε / ∑ α_i²``.
    """
    if not 0.0 <= epsilon <= 1.0 - 1.0 / dim + 1e-12:
        raise ValueError(f"epsilon={epsilon!r} outside [0, 1 - 1/D]")
    a = np.sort(np.asarray(weights, dtype=float))
    if a.size < 2:
        raise ValueError("need at least two weights")
    delta_p = 2.0 * epsilon / float(np.sum(a**2))
    delta_o = np.sqrt(8.0 * epsilon) / np.sqrt(a[0] * a[1])
    return float(delta_o), float(delta_p)


def pair_overlap_bound(epsilon: float, a_i: float, a_j: float) -> float:
    """Per-pair overlap deviation bound ``√(8/(α_i α_j)) √ε``."""
    return float(np.sqrt(8.0 / (a_i * a_j)) * np.sqrt(epsilon))
