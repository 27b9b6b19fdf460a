"""Qubit reconstruction by aligning Bloch-vector Gram matrices.

Qubit states map to Bloch vectors, overlaps to dot products, and (anti-)
unitaries to orthogonal maps of R³. :func:`align_bloch` follows the
constructive proof: square roots of the two Gram matrices, isometries into
R^N, completion on the orthogonal complement and a polar decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import polar

from .config import DEFAULT, Tolerances
from .qmat import InvalidOperator, SymOp, psd_sqrt

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
# complex conjugation acts on Bloch vectors as this reflection
CONJ_REFLECTION = np.diag([1.0, -1.0, 1.0])

__all__ = [
    "SymOp",
    "bloch",
    "bloch_to_state",
    "align_bloch",
    "Alignment",
    "orthogonal_to_quantum",
    "polar_orthogonal",
]


def bloch(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        state = np.outer(state, state.conj())
    if state.shape != (2, 2):
        raise InvalidOperator(f"Bloch vectors need a qubit state, got shape {state.shape}")
    return np.array([np.real(np.trace(state @ s)) for s in PAULI])


def bloch_to_state(m: Sequence[float]) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (3,):
        raise ValueError("Bloch vector must have three components")
    if np.linalg.norm(m) > 1 + 1e-12:
        raise ValueError(f"Bloch vector norm {np.linalg.norm(m)!r} exceeds 1")
    return 0.5 * (np.eye(2) + sum(c * s for c, s in zip(m, PAULI)))


@dataclass(frozen=True)
class Alignment:
    orthogonal: np.ndarray
    residuals: np.ndarray
    bound: float
    delta_prime: float
    c_prime: float


def _range_and_complement(a: np.ndarray, rank: int) -> tuple[np.ndarray, np.ndarray]:
    u, _, _ = np.linalg.svd(a)
    return u[:, :rank], u[:, rank:]


def align_bloch(
    ms: Sequence[Sequence[float]],
    ns: Sequence[Sequence[float]],
    delta: float,
    tol: Tolerances = DEFAULT,
    rank_tol: float = 1e-10,
) -> Alignment:
    """Orthogonal ``Õ`` with ``‖n_k − Õ m_k‖ ≤ √(Nδ) + √(δ′c′)``.

    ``δ′ = δ + Nδ + 2√(Nδ)`` and ``c′ = ∑_i ‖c_i‖₁² / λ_i`` over the nonzero
    eigenpairs of the Gram matrix of ``ms``.
    """
    m = np.asarray(ms, dtype=float).T  # 3 × N
    n = np.asarray(ns, dtype=float).T
    if m.shape != n.shape or m.shape[0] != 3:
        raise ValueError("ms and ns must be equally long lists of 3-vectors")
    n_vec = m.shape[1]
    g_bar = m.T @ m
    g = n.T @ n
    worst = float(np.max(np.abs(g_bar - g)))
    if worst > delta + tol.overlap_slack:
        raise ValueError(f"overlap deviation {worst:.3e} exceeds delta={delta!r}")

    def isometry(vecs: np.ndarray, gram_matrix: np.ndarray) -> tuple[np.ndarray, int]:
        # maps vecs[:, k] to √G e_k; defined on span(vecs)
        u, s, vt = np.linalg.svd(vecs, full_matrices=False)
        r = int(np.sum(s > rank_tol * max(s[0], 1e-300)))
        return vt[:r].T @ u[:, :r].T, r

    o_bar, r_m = isometry(m, g_bar)  # N × 3
    o, _ = isometry(n, g)
    core = o.T @ o_bar  # 3 × 3, ≈ maps m_k to n_k on span(ms)

    # complete on span(ms)^⊥ by an isometry onto (core·span(ms))^⊥, index order
    h, h_perp = _range_and_complement(m, r_m)
    image = core @ h
    r_img = int(np.linalg.matrix_rank(image, tol=rank_tol)) if r_m else 0
    _, img_perp = _range_and_complement(image, r_img) if r_m else (None, np.eye(3))
    k = min(h_perp.shape[1], img_perp.shape[1])
    full = core @ (h @ h.T) + img_perp[:, :k] @ h_perp[:, :k].T
    o_tilde = polar_orthogonal(full)

    residuals = np.linalg.norm(n - o_tilde @ m, axis=0)
    w, c = np.linalg.eigh(g_bar)
    keep = w > rank_tol * max(w[-1], 1e-300)
    c_prime = float(np.sum(np.sum(np.abs(c[:, keep]), axis=0) ** 2 / w[keep]))
    nd = n_vec * delta
    delta_prime = delta + nd + 2 * np.sqrt(nd)
    bound = float(np.sqrt(nd) + np.sqrt(delta_prime * c_prime))
    return Alignment(o_tilde, residuals, bound, float(delta_prime), c_prime)


def polar_orthogonal(z: np.ndarray) -> np.ndarray:
    """Unitary/orthogonal factor ``O`` of the polar decomposition ``Z = O √(Z†Z)``."""
    u, _ = polar(z)
    return u


def orthogonal_to_quantum(o: np.ndarray, tol: Tolerances = DEFAULT) -> SymOp:
    """Lift a 3×3 orthogonal matrix to the qubit (anti-)unitary acting as it on Bloch vectors.

    Rotations lift to SU(2) elements; improper maps become conjugation followed
    by the lift of ``o · diag(1, −1, 1)``. The global phase is fixed so the
    first nonzero entry (row-major) is real positive.
    """
    o = np.asarray(o, dtype=float)
    if o.shape != (3, 3) or np.max(np.abs(o @ o.T - np.eye(3))) > tol.orthogonal:
        raise InvalidOperator("matrix is not orthogonal")
    det = np.linalg.det(o)
    if abs(det - 1) < tol.det_orthogonal:
        conj, rot = False, o
    elif abs(det + 1) < tol.det_orthogonal:
        conj, rot = True, o @ CONJ_REFLECTION
    else:
        raise InvalidOperator(f"determinant {det!r} is not ±1")
    # u σ_j u† = ∑_i R_ij σ_i  ⇔  u σ_j − (∑_i R_ij σ_i) u = 0, linear in u
    rows = []
    for j in range(3):
        target = sum(rot[i, j] * PAULI[i] for i in range(3))
        rows.append(np.kron(np.eye(2), PAULI[j].T) - np.kron(target, np.eye(2)))
    _, _, vh = np.linalg.svd(np.vstack(rows))
    u = vh[-1].conj().reshape(2, 2)
    u = u / np.sqrt(abs(np.linalg.det(u)))
    u, _ = polar(u)
    for entry in u.reshape(-1):
        if abs(entry) > 1e-12:
            u = u * (abs(entry) / entry)
            break
    return SymOp(u, conj)
