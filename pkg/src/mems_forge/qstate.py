"""Two-qubit polarization states, index reshuffling and entanglement measures.

Matrices are plain ``numpy`` arrays in the basis ``|00>, |01>, |10>, |11>``
with ``0 = H`` and ``1 = V``; row and column of a 4x4 matrix use the
composite index ``2*a + b``. Constructors return read-only arrays.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DomainError, StateError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

BASIS_LABEL = "00,01,10,11"
MEMS2_NOTE = "out-of-paper form"

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)

_SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)
_ROUNDOFF = 16 * np.finfo(float).eps


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def ket(*amplitudes):
    return np.asarray(amplitudes, dtype=complex)


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return _frozen(np.outer(psi, psi.conj()))


def reshuffle(x):
    """Return ``X^R`` with ``X^R[(ik),(jl)] = X[(ij),(kl)]``.

    The map is a pure index permutation and therefore an exact involution.
    """
    x = np.asarray(x)
    if x.shape != (4, 4):
        raise ValueError(f"reshuffle expects a 4x4 matrix, got shape {x.shape}")
    return x.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def check_state(rho, dim=4):
    """Validate a density matrix and return it as a complex array.

    Raises :class:`StateError` when the matrix is not Hermitian, not of unit
    trace, or has an eigenvalue below ``-1e-10``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise StateError(f"expected a {dim}x{dim} matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise StateError("matrix has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise StateError(f"matrix is not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise StateError(f"trace is {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -PSD_TOL:
        raise StateError(f"matrix has negative eigenvalue {lo:.3e}")
    return rho


def is_state(rho, dim=4):
    try:
        check_state(rho, dim)
    except StateError:
        return False
    return True


def _check_unit_interval(name, value, lo=0.0, hi=1.0, lo_open=False):
    value = float(value)
    if not np.isfinite(value) or value > hi or value < lo or (lo_open and value == lo):
        bracket = "(" if lo_open else "["
        raise DomainError(f"{name}={value!r} outside {bracket}{lo:g}, {hi:g}]")
    return value


# --- constructors -----------------------------------------------------------

PHI_PLUS = ket(1, 0, 0, 1) / np.sqrt(2)
PSI_SINGLET = ket(0, 1, -1, 0) / np.sqrt(2)


def singlet():
    """Singlet ``(|HV> - |VH>)/sqrt(2)`` as a density matrix."""
    return projector(PSI_SINGLET)


def singlet_pauli_form():
    """Singlet written as ``(I⊗I - σx⊗σx - σy⊗σy - σz⊗σz) / 4``."""
    rho = np.kron(I2, I2) - sum(np.kron(s, s) for s in PAULIS[1:])
    return _frozen(rho / 4)


def werner(p):
    p = _check_unit_interval("p", p)
    return _frozen(p * singlet() + (1 - p) / 4 * np.eye(4))


def mems1(p):
    """``p |phi+><phi+| + (1-p) |01><01|``.

    Only ``2/3 <= p <= 1`` gives a maximally entangled mixed state; smaller
    ``p`` is accepted and yields an ordinary entangled mixture
    (see :func:`is_mems1_regime`).
    """
    p = _check_unit_interval("p", p)
    rho = p * projector(PHI_PLUS) + (1 - p) * projector(ket(0, 1, 0, 0))
    return _frozen(rho)


def is_mems1_regime(p):
    return 2 / 3 <= p <= 1


def mems2(c):
    """MEMS II family: diagonal ``(1/3, 1/3, 0, 1/3)`` with coherence ``c/2``.

    This parametrization comes from the general MEMS literature, not the
    bench this package models; serialized states carry :data:`MEMS2_NOTE`.
    """
    c = _check_unit_interval("c", c, hi=2 / 3, lo_open=True)
    rho = np.diag([1 / 3, 1 / 3, 0, 1 / 3]).astype(complex)
    rho[0, 3] = rho[3, 0] = c / 2
    return _frozen(rho)


# --- measures ------------------------------------------------------------------

def purity(rho):
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def linear_entropy(rho):
    """``(4/3) (1 - Tr rho^2)``; 0 for pure states, 1 for ``I/4``."""
    return float(np.clip(4 / 3 * (1 - purity(rho)), 0.0, 1.0))


def concurrence(rho):
    """Wootters concurrence with complex conjugation in the H/V basis.

    ``sqrt(lambda_i)`` for the eigenvalues of ``rho Y rho* Y`` (``Y = σy⊗σy``)
    are the singular values of ``sqrt(rho) Y sqrt(rho)*``; the SVD form keeps
    full precision for rank-deficient states.
    """
    s = psd_sqrt(rho)
    sq = np.linalg.svd(s @ _SPIN_FLIP @ s.conj(), compute_uv=False)
    sq = np.sort(sq)[::-1]
    return float(min(1.0, max(0.0, sq[0] - sq[1] - sq[2] - sq[3])))


def spin_flip_eigenvalues(rho):
    """Eigenvalues of ``rho Y rho* Y``, real part, clamped at 0, descending."""
    rho = np.asarray(rho, dtype=complex)
    ev = np.linalg.eigvals(rho @ _SPIN_FLIP @ rho.conj() @ _SPIN_FLIP).real
    return np.sort(np.clip(ev, 0.0, None))[::-1]


def tangle(rho):
    return concurrence(rho) ** 2


def psd_sqrt(a):
    """Square root of a Hermitian PSD matrix via ``eigh``.

    Eigenvalues in ``[-1e-10, 0)`` are treated as roundoff and clamped;
    anything more negative raises :class:`StateError`.
    """
    a = np.asarray(a, dtype=complex)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    if w.min() < -PSD_TOL:
        raise StateError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3e})")
    # eigh is accurate to ~eps * ||a||; anything smaller is noise
    w = np.where(w > _ROUNDOFF * np.max(np.abs(w)), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma):
    """Uhlmann fidelity ``|Tr sqrt(sqrt(rho) sigma sqrt(rho))|^2``."""
    s = psd_sqrt(rho)
    inner = s @ np.asarray(sigma, dtype=complex) @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    if w.min() < -PSD_TOL:
        raise StateError(f"fidelity argument is not PSD (eigenvalue {w.min():.3e})")
    w = np.where(w > _ROUNDOFF * np.max(np.abs(w)), w, 0.0)
    f = np.sum(np.sqrt(w)) ** 2
    return float(np.clip(f, 0.0, 1.0))


def trace_distance(rho, sigma):
    diff = np.asarray(rho, dtype=complex) - np.asarray(sigma, dtype=complex)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def partial_trace(rho, subsystem):
    """Trace out qubit ``"A"`` or ``"B"`` and return the remaining 2x2 state."""
    t = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    if subsystem == "A":
        return np.einsum("ijil->jl", t)
    if subsystem == "B":
        return np.einsum("ijkj->ik", t)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


# --- serialization ----------------------------------------------------------------

def matrix_to_pairs(m):
    # "+ 0.0" turns -0.0 into 0.0 so serialized output is stable
    return [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row]
            for row in np.asarray(m, dtype=complex)]


def matrix_from_pairs(pairs):
    a = np.asarray(pairs, dtype=float)
    if a.ndim != 3 or a.shape[-1] != 2:
        raise ValueError("expected a nested array of [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def state_to_dict(rho, note=None):
    d = {"rho": matrix_to_pairs(rho), "basis": BASIS_LABEL}
    if note:
        d["note"] = note
    return d


def state_from_dict(d):
    if d.get("basis", BASIS_LABEL) != BASIS_LABEL:
        raise StateError(f"unsupported basis {d['basis']!r}")
    return _frozen(check_state(matrix_from_pairs(d["rho"])))


def load_state(path):
    with open(path) as fh:
        return state_from_dict(json.load(fh))
