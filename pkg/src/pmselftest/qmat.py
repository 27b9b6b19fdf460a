"""Dense complex linear algebra and the quantum primitives built on it.

Operators are plain ``numpy`` arrays. The ``as_*`` constructors validate the
invariants of the corresponding quantum objects (Hermitian operator, pure
state, density matrix, POVM) and return cleaned copies; every other function
assumes validated input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances


class DimensionMismatch(ValueError):
    pass


class InvalidOperator(ValueError):
    pass


# --------------------------------------------------------------------------
# constructors / validators


def as_hermitian(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Validate a square matrix as Hermitian and symmetrize away rounding.

    Asymmetry up to ``tol.hermitian`` is absorbed as ``(A + A†)/2``; anything
    larger is rejected rather than silently projected.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidOperator(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 2:
        raise InvalidOperator("dimension must be at least 2")
    asym = np.max(np.abs(a - a.conj().T))
    if asym > tol.hermitian:
        raise InvalidOperator(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    return (a + a.conj().T) / 2


def as_pure_state(v, tol: Tolerances = DEFAULT) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size < 2:
        raise InvalidOperator("dimension must be at least 2")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol.pure_norm:
        raise InvalidOperator(f"state vector has norm {norm!r}, expected 1")
    return v


def ket(*amplitudes) -> np.ndarray:
    """Normalized ket from (possibly unnormalized) amplitudes."""
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    return v / np.linalg.norm(v)


def basis(dim: int, k: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[k] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def as_density_matrix(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return projector(as_pure_state(a, tol))
    h = as_hermitian(a, tol)
    tr = np.trace(h).real
    if abs(tr - 1.0) > tol.density_trace:
        raise InvalidOperator(f"trace {tr!r} differs from 1")
    lo = np.linalg.eigvalsh(h)[0]
    if lo < -tol.density_psd:
        raise InvalidOperator(f"not positive semidefinite (min eigenvalue {lo:.3e})")
    return h


def as_povm(elements: Sequence, tol: Tolerances = DEFAULT) -> list[np.ndarray]:
    elems = [as_hermitian(m, tol) for m in elements]
    if not elems:
        raise InvalidOperator("a POVM needs at least one element")
    dim = elems[0].shape[0]
    for b, m in enumerate(elems):
        if m.shape[0] != dim:
            raise DimensionMismatch(f"POVM element {b} has dimension {m.shape[0]}, expected {dim}")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -tol.povm:
            raise InvalidOperator(f"POVM element {b} is not PSD (min eigenvalue {lo:.3e})")
    dev = np.max(np.abs(sum(elems) - np.eye(dim)))
    if dev > tol.povm:
        raise InvalidOperator(f"POVM elements do not sum to identity (deviation {dev:.3e})")
    return elems


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.shape} vs {b.shape}")


# --------------------------------------------------------------------------
# scalar functionals


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Trace norm ``‖a − b‖₁`` (not halved); lies in [0, 2] for states."""
    _same_dim(a, b)
    return float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    _same_dim(a, b)
    return float(np.real(np.sum(a * b.T)))


def purity(a: np.ndarray) -> float:
    return overlap(a, a)


def op_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


def psd_min_eig(h: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(h)[0])


# --------------------------------------------------------------------------
# eigen-based routines


def phase_normalize(v: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real positive."""
    v = np.asarray(v, dtype=complex)
    for amp in v:
        if abs(amp) > atol:
            return v * (abs(amp) / amp)
    return v


def top_eigenstate(a: np.ndarray, tol: Tolerances = DEFAULT) -> tuple[np.ndarray, float]:
    """Dominant eigenvector and eigenvalue of a density matrix.

    ``‖a − φφ†‖₁ = 2(1 − p₁) ≤ 2(1 − tr a²)``. A degenerate top eigenspace is
    resolved deterministically: the normalized projections of the computational
    basis vectors onto it are phase-normalized and the lexicographically largest
    (real parts, then imaginary parts) is returned.
    """
    w, v = np.linalg.eigh(a)
    top = w[-1]
    tied = w >= top - tol.degeneracy
    if np.count_nonzero(tied) == 1:
        return phase_normalize(v[:, -1]), float(top)
    span = v[:, tied]
    proj = span @ span.conj().T
    candidates = []
    for k in range(a.shape[0]):
        c = proj[:, k]
        n = np.linalg.norm(c)
        if n > 1e-8:
            candidates.append(phase_normalize(c / n))
    best = max(candidates, key=lambda c: tuple(np.round(c.real, 10)) + tuple(np.round(c.imag, 10)))
    return best, float(top)


def helstrom(a: np.ndarray, b: np.ndarray, tol: Tolerances = DEFAULT) -> list[np.ndarray]:
    """Optimal two-outcome measurement discriminating ``a`` from ``b``.

    Outcome 2 (index 1) projects onto the positive eigenspace of ``a − b``, so
    ``tr((a − b) M₂) = ‖a − b‖₁ / 2``. The kernel of ``a − b`` goes to outcome 1.
    """
    _same_dim(a, b)
    w, v = np.linalg.eigh(a - b)
    pos = v[:, w > tol.helstrom_kernel]
    m2 = pos @ pos.conj().T
    return [np.eye(a.shape[0], dtype=complex) - m2, m2]


def psd_sqrt(g: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    w, v = np.linalg.eigh(g)
    if w[0] < -tol.sqrt_negative:
        raise InvalidOperator(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    r = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return r if np.iscomplexobj(g) else r.real


def psd_inv_sqrt(g: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Moore-Penrose inverse square root, defined on the support of ``g``."""
    w, v = np.linalg.eigh(g)
    if w[0] < -tol.sqrt_negative:
        raise InvalidOperator(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    cut = tol.support * max(w[-1], 0.0)
    inv = np.zeros_like(w)
    keep = w > cut
    inv[keep] = 1.0 / np.sqrt(w[keep])
    r = (v * inv) @ v.conj().T
    return r if np.iscomplexobj(g) else r.real


# --------------------------------------------------------------------------
# random objects and noise


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with R's diagonal made positive."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    return haar_unitary(rng, dim)[:, 0]


def random_density_matrix(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_povm(rng: np.random.Generator, dim: int, outcomes: int) -> list[np.ndarray]:
    """Random POVM: random PSD operators rescaled by ``S^{-1/2}`` so they sum to I."""
    raw = []
    for _ in range(outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        raw.append(g @ g.conj().T)
    s_inv = psd_inv_sqrt(sum(raw))
    return [s_inv @ m @ s_inv for m in raw]


def depolarize(rho: np.ndarray, p: float) -> np.ndarray:
    dim = rho.shape[0]
    return (1 - p) * rho + p * np.eye(dim) / dim


# --------------------------------------------------------------------------
# symmetries


@dataclass(frozen=True)
class SymOp:
    """Unitary (``conjugate=False``) or anti-unitary symmetry.

    The anti-unitary case is complex conjugation in the computational basis
    followed by ``unitary``: ``|v⟩ ↦ U |v̄⟩``.
    """

    unitary: np.ndarray
    conjugate: bool = False

    def __post_init__(self) -> None:
        u = np.asarray(self.unitary, dtype=complex)
        if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-10:
            raise InvalidOperator("SymOp matrix is not unitary")
        object.__setattr__(self, "unitary", u)

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def apply_ket(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        return self.unitary @ (v.conj() if self.conjugate else v)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if self.conjugate:
            rho = rho.conj()
        return self.unitary @ rho @ self.unitary.conj().T

    def compose(self, first: "SymOp") -> "SymOp":
        """The symmetry ``self ∘ first``."""
        u = first.unitary.conj() if self.conjugate else first.unitary
        return SymOp(self.unitary @ u, self.conjugate != first.conjugate)
