"""Weighted ensembles resolving the identity, and the fiducial set.

A :class:`WeightedEnsemble` satisfies ``∑ α_i ψ_i = I/D``. Arbitrary target
states are completed to such an ensemble by the canonical spectral
completion; :func:`fiducial_set` builds the ``5D − 6`` anchor states used by
the high-dimensional reconstruction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .qmat import DimensionMismatch, as_pure_state, basis, haar_unitary, ket, overlap, projector


@dataclass(frozen=True)
class WeightedEnsemble:
    states: tuple[np.ndarray, ...]
    weights: tuple[float, ...]
    completed: bool = False
    n_targets: int | None = None  # states beyond this index were added by completion

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __len__(self) -> int:
        return len(self.states)

    def projectors(self) -> list[np.ndarray]:
        return [projector(s) for s in self.states]

    def resolution(self) -> np.ndarray:
        return sum(a * projector(s) for a, s in zip(self.weights, self.states))

    def check(self, atol: float = 1e-9) -> None:
        if any(a <= 0 for a in self.weights):
            raise ValueError("ensemble weights must be positive")
        if abs(sum(self.weights) - 1.0) > atol:
            raise ValueError(f"weights sum to {sum(self.weights)!r}, expected 1")
        if self.completed:
            dev = np.max(np.abs(self.resolution() - np.eye(self.dim) / self.dim))
            if dev > atol:
                raise ValueError(f"∑ α_i ψ_i deviates from I/D by {dev:.3e}")


def _common_dim(states: Sequence[np.ndarray]) -> int:
    if not states:
        raise ValueError("need at least one state")
    dim = states[0].shape[0]
    for i, s in enumerate(states):
        if s.shape[0] != dim:
            raise DimensionMismatch(f"state {i} has dimension {s.shape[0]}, expected {dim}")
    return dim


def complete_ensemble(states: Sequence, tol: Tolerances = DEFAULT) -> WeightedEnsemble:
    """Spectral completion of ``states`` to a resolution of ``I/D``.

    All input states get weight ``λ* = 1 / (D λ_max(∑ψ_i))``; the positive
    eigenvectors of ``V = I/D − λ* ∑ψ_i`` are appended with their eigenvalues
    as weights (at most ``D − 1`` of them).
    """
    psis = [as_pure_state(s, tol) for s in states]
    dim = _common_dim(psis)
    total = sum(projector(s) for s in psis)
    lam = 1.0 / (dim * np.linalg.eigvalsh(total)[-1])
    v_op = np.eye(dim) / dim - lam * total
    w, vecs = np.linalg.eigh(v_op)
    cut = max(tol.completion_rank * max(w[-1], 0.0), tol.completion_floor)
    extras = [(float(w[k]), vecs[:, k]) for k in range(dim) if w[k] > cut]
    all_states = tuple(psis) + tuple(np.ascontiguousarray(v) for _, v in extras)
    weights = tuple([float(lam)] * len(psis) + [b for b, _ in extras])
    return WeightedEnsemble(all_states, weights, completed=True, n_targets=len(psis))


# --------------------------------------------------------------------------
# fiducial set


@dataclass(frozen=True)
class FiducialSet:
    """The anchor states Z_k, X_k, Y_k, XX_k, YY_k (0-based ``k`` in code)."""

    dim: int
    z: tuple[np.ndarray, ...]
    x: tuple[np.ndarray, ...]
    y: tuple[np.ndarray, ...]
    xx: tuple[np.ndarray, ...]
    yy: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = field(default=())

    @property
    def states(self) -> list[np.ndarray]:
        return [*self.z, *self.x, *self.y, *self.xx, *self.yy]

    def __len__(self) -> int:
        return 5 * self.dim - 6

    def slices(self) -> dict[str, slice]:
        """Index ranges of each family inside :attr:`states`."""
        d = self.dim
        bounds = {"Z": d, "X": d - 1, "Y": d - 1, "XX": d - 2, "YY": d - 2}
        out, start = {}, 0
        for name, n in bounds.items():
            out[name] = slice(start, start + n)
            start += n
        return out


def fiducial_set(dim: int) -> FiducialSet:
    if dim < 3:
        raise ValueError(f"fiducial set needs D >= 3, got {dim}")
    e = [basis(dim, k) for k in range(dim)]
    z = tuple(e)
    x = tuple(ket(*(e[k] + e[k + 1])) for k in range(dim - 1))
    y = tuple(ket(*(e[k] + 1j * e[k + 1])) for k in range(dim - 1))
    xx = tuple(ket(*(e[k] + e[k + 1] + e[k + 2])) for k in range(dim - 2))
    # YY_k = (i|k⟩ + |k+1⟩ + i|k+2⟩)/√3, as printed
    yy = tuple(ket(*(1j * e[k] + e[k + 1] + 1j * e[k + 2])) for k in range(dim - 2))
    labels = (
        [f"Z{k + 1}" for k in range(dim)]
        + [f"X{k + 1}" for k in range(dim - 1)]
        + [f"Y{k + 1}" for k in range(dim - 1)]
        + [f"XX{k + 1}" for k in range(dim - 2)]
        + [f"YY{k + 1}" for k in range(dim - 2)]
    )
    return FiducialSet(dim, z, x, y, xx, yy, tuple(labels))


# --------------------------------------------------------------------------
# basis randomization and Gram matrices


def min_basis_weight(psi: np.ndarray) -> float:
    return float(np.min(np.abs(psi) ** 2))


def randomize_basis(
    states: Sequence,
    seed: int,
    floor: float | None = None,
    max_tries: int = 1000,
    tol: Tolerances = DEFAULT,
) -> tuple[np.ndarray, list[np.ndarray], list[float]]:
    """Rotate ``states`` so every computational-basis weight is at least ``floor``.

    Returns the unitary, the rotated states and ``f_j = 1 / min_k |⟨k|ψ_j⟩|²``.
    States already meeting the floor are returned untouched with the identity.
    """
    floor = tol.genericity_floor if floor is None else floor
    psis = [as_pure_state(s, tol) for s in states]
    dim = _common_dim(psis)
    if all(min_basis_weight(p) >= floor for p in psis):
        u = np.eye(dim, dtype=complex)
        rotated = psis
    else:
        rng = np.random.default_rng(seed)
        for _ in range(max_tries):
            u = haar_unitary(rng, dim)
            rotated = [u @ p for p in psis]
            if all(min_basis_weight(p) >= floor for p in rotated):
                break
        else:
            raise RuntimeError(f"no rotation met the genericity floor {floor} in {max_tries} draws")
    return u, rotated, [1.0 / min_basis_weight(p) for p in rotated]


def gram(states: Sequence[np.ndarray]) -> np.ndarray:
    """``G_ij = tr(ρ_i ρ_j)``; kets are accepted and turned into projectors."""
    rhos = [projector(s) if np.ndim(s) == 1 else np.asarray(s, dtype=complex) for s in states]
    _common_dim(rhos)
    n = len(rhos)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = overlap(rhos[i], rhos[j])
    return g
