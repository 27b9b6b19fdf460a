"""Ensembles with equal overlaps that no (anti-)unitary relates.

Two witnesses of inequivalence are used: the multiset of triple-product
phases ``|arg tr(ψ_i ψ_j ψ_k)|`` (a unitary invariant that conjugation leaves
unchanged) and the rank of the span of the state vectors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .qmat import as_pure_state


def sic_family(t: float) -> list[np.ndarray]:
    """Nine qutrit kets ``(|k⟩ + e^{i(t+φ)}|k+1⟩)/√2`` for φ ∈ {0, 2π/3, −2π/3}, k = 0, 1, 2."""
    out = []
    for shift in (0.0, 2 * math.pi / 3, -2 * math.pi / 3):
        for k in range(3):
            v = np.zeros(3, dtype=complex)
            v[k] = 1.0
            v[(k + 1) % 3] = np.exp(1j * (t + shift))
            out.append(v / math.sqrt(2))
    return out


@dataclass(frozen=True)
class InvariantProfile:
    """Sorted ``|arg tr(ψ_i ψ_j ψ_k)|`` over i < j < k; NaN marks vanishing products."""

    values: np.ndarray
    triples: tuple[tuple[int, int, int], ...]

    @property
    def defined(self) -> np.ndarray:
        return np.sort(self.values[~np.isnan(self.values)])

    @property
    def n_undefined(self) -> int:
        return int(np.sum(np.isnan(self.values)))

    def contains(self, angle: float, atol: float = 1e-8) -> bool:
        return bool(np.any(np.abs(self.defined - angle) <= atol))

    def count(self, angle: float, atol: float = 1e-8) -> int:
        return int(np.sum(np.abs(self.defined - angle) <= atol))


def triple_product(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> complex:
    """``tr(ψ_a ψ_b ψ_c) = ⟨a|b⟩⟨b|c⟩⟨c|a⟩``."""
    return complex(np.vdot(a, b) * np.vdot(b, c) * np.vdot(c, a))


def bargmann_profile(states: Sequence, tol: Tolerances = DEFAULT) -> InvariantProfile:
    psis = [as_pure_state(s, tol) for s in states]
    if len(psis) < 3:
        raise ValueError("need at least three states")
    triples = tuple(itertools.combinations(range(len(psis)), 3))
    vals = []
    for i, j, k in triples:
        z = triple_product(psis[i], psis[j], psis[k])
        vals.append(math.nan if abs(z) < tol.bargmann_modulus else abs(math.atan2(z.imag, z.real)))
    return InvariantProfile(np.array(vals), triples)


def profile_distance(a: InvariantProfile, b: InvariantProfile) -> float:
    """Largest entrywise gap of the sorted defined values; inf when the counts differ."""
    da, db = a.defined, b.defined
    if da.shape != db.shape or a.n_undefined != b.n_undefined:
        return math.inf
    return float(np.max(np.abs(da - db))) if da.size else 0.0


def span_rank(states: Sequence[np.ndarray], rtol: float = 1e-10) -> int:
    s = np.linalg.svd(np.column_stack(states), compute_uv=False)
    return int(np.sum(s > rtol * s[0]))


def embedded_qubit_pair(b21: float, b22: float, b31: float, b32: float, beta: float) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Qubit triple Ψ inside C³ and a triple Φ with the same overlap moduli.

    Ψ = {|0⟩, b21|0⟩ + b22|1⟩, b31|0⟩ + b32 e^{iβ}|1⟩};
    Φ = {|0⟩, b21|0⟩ + b22|1⟩, b31|0⟩ + t32|1⟩ + t33|2⟩} with
    ``b22 t32 = |b21 b31 + b22 b32 e^{iβ}| − b21 b31`` and ``t33 = √(1 − b31² − t32²)``.
    """
    for name, v in (("b21", b21), ("b22", b22), ("b31", b31), ("b32", b32)):
        if v < 0:
            raise ValueError(f"{name} must be nonnegative")
    if abs(b21**2 + b22**2 - 1) > 1e-12 or abs(b31**2 + b32**2 - 1) > 1e-12:
        raise ValueError("need b21² + b22² = 1 and b31² + b32² = 1")
    e = np.eye(3, dtype=complex)
    psi = [e[0], b21 * e[0] + b22 * e[1], b31 * e[0] + b32 * np.exp(1j * beta) * e[1]]
    if b22 == 0:
        t32 = b32
    else:
        t32 = (abs(b21 * b31 + b22 * b32 * np.exp(1j * beta)) - b21 * b31) / b22
    t33_sq = 1 - b31**2 - t32**2
    assert t33_sq >= -1e-12, f"t33² = {t33_sq!r} < 0"
    t33 = math.sqrt(max(t33_sq, 0.0))
    phi = [e[0], b21 * e[0] + b22 * e[1], b31 * e[0] + t32 * e[1] + t33 * e[2]]
    return psi, phi


@dataclass(frozen=True)
class Verdict:
    verdict: str  # "not-equivalent" or "inconclusive"
    reason: str
    gram_deviation: float
    profile_deviation: float
    ranks: tuple[int, int]


def wigner_violation_check(a: Sequence, b: Sequence, tol: float = DEFAULT.profile) -> Verdict:
    """Decide whether two overlap-equivalent ensembles are provably inequivalent.

    Matching profiles and ranks never prove equivalence, so the answer is then
    ``inconclusive``.
    """
    pa = [as_pure_state(s) for s in a]
    pb = [as_pure_state(s) for s in b]
    if len(pa) != len(pb):
        raise ValueError("ensembles must have equal size")
    if pa[0].shape != pb[0].shape:
        raise ValueError("ensembles must share one dimension")
    ga = np.abs(np.array([[np.vdot(x, y) for y in pa] for x in pa]))
    gb = np.abs(np.array([[np.vdot(x, y) for y in pb] for x in pb]))
    gdev = float(np.max(np.abs(ga - gb)))
    ranks = (span_rank(pa), span_rank(pb))
    pdev = profile_distance(bargmann_profile(pa), bargmann_profile(pb)) if len(pa) >= 3 else 0.0
    if gdev > tol:
        return Verdict("inconclusive", "overlap moduli differ", gdev, pdev, ranks)
    if ranks[0] != ranks[1]:
        return Verdict("not-equivalent", "span ranks differ", gdev, pdev, ranks)
    if pdev > tol:
        return Verdict("not-equivalent", "triple-product phase profiles differ", gdev, pdev, ranks)
    return Verdict("inconclusive", "overlaps, ranks and phase profiles agree", gdev, pdev, ranks)
