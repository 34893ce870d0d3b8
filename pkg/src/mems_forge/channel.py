"""Mueller/Jones algebra for local one-qubit maps acting on photon A.

A complex Mueller matrix ``M`` (4x4, index ``M[(ij),(kl)]``) maps a
coherency matrix as ``J_out[ij] = M[(ij),(kl)] J_in[kl]``. A map with Kraus
weights ``lam`` and Jones matrices ``T`` has ``M = sum lam T ⊗ conj(T)``.
Acting on photon A of a two-photon state, ``(E ⊗ I)[rho]^R = M rho^R``.

The H (Choi) matrix of ``M`` is its reshuffle, ``H = sum lam vec(T) vec(T)^†``
with row-major ``vec``; the map is realizable by passive optics exactly when
``H`` is positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qstate
from .errors import ConversionError, PhysicalityError, PostselectionError, SynthesisError
from .qstate import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, reshuffle

COND_LIMIT = 1e12
TRACE_FLOOR = 1e-12

# Stokes ordering S0..S3 = (I, σz, σx, σy): S1 is H-V, S2 is D-A, S3 is R-L.
STOKES_PAULIS = (I2, SIGMA_Z, SIGMA_X, SIGMA_Y)
LAMBDA = np.stack([s.reshape(4) for s in STOKES_PAULIS], axis=1) / np.sqrt(2)
LAMBDA.setflags(write=False)


@dataclass(frozen=True)
class MuellerReal:
    """Real 4x4 Mueller matrix with the usual block layout.

    ``[[m00, d^T], [p, W]]`` where ``d`` is the diattenuation vector and
    ``p`` the polarizance vector.
    """

    matrix: np.ndarray

    @property
    def m00(self) -> float:
        return float(self.matrix[0, 0])

    @property
    def d(self) -> np.ndarray:
        return self.matrix[0, 1:]

    @property
    def p(self) -> np.ndarray:
        return self.matrix[1:, 0]

    @property
    def W(self) -> np.ndarray:
        return self.matrix[1:, 1:]


@dataclass(frozen=True)
class KrausDecomposition:
    """Weighted Jones matrices ``(lam, T)``, sorted by descending weight.

    Build through :meth:`from_terms` to get the canonical form: every ``T``
    scaled to unit operator norm (the scale is folded into ``lam``) and its
    global phase fixed so the first nonzero entry is real and positive.
    """

    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 1 <= len(self.terms) <= 4:
            raise ValueError(f"decomposition needs 1 to 4 terms, got {len(self.terms)}")
        for lam, T in self.terms:
            if lam < 0:
                raise ValueError(f"negative Kraus weight {lam!r}")
            if np.shape(T) != (2, 2):
                raise ValueError("Jones matrices must be 2x2")

    @classmethod
    def from_terms(cls, terms):
        out = []
        for lam, T in terms:
            T = np.array(T, dtype=complex)
            lam = float(lam)
            s = np.linalg.norm(T, 2)
            if s > 0:
                lam, T = lam * s**2, fix_phase(T / s)
            else:
                lam = 0.0
            T.setflags(write=False)
            out.append((lam, T))
        out.sort(key=lambda t: -t[0])
        return cls(tuple(out))

    @property
    def lambdas(self):
        return [lam for lam, _ in self.terms]

    @property
    def operators(self):
        return [T for _, T in self.terms]

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)


@dataclass(frozen=True)
class PhysicalityReport:
    h_eigenvalues: tuple
    physical: bool
    trace_preserving_deviation: float | None
    diattenuation: float | None = None

    def to_dict(self):
        return {
            "h_eigenvalues": [float(x) for x in self.h_eigenvalues],
            "physical": bool(self.physical),
            "tp_deviation": None if self.trace_preserving_deviation is None
            else float(self.trace_preserving_deviation),
            "diattenuation": None if self.diattenuation is None else float(self.diattenuation),
        }


def fix_phase(T, tol=1e-12):
    """Rotate the global phase so the first nonzero entry (row-major) is real positive."""
    T = np.asarray(T, dtype=complex)
    flat = T.reshape(-1)
    scale = np.max(np.abs(flat))
    if scale == 0:
        return T.copy()
    first = flat[np.argmax(np.abs(flat) > tol * scale)]
    return T * (abs(first) / first)


def equal_up_to_phase(A, B, atol=1e-9):
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    overlap = np.vdot(A, B)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return bool(np.max(np.abs(A * phase - B)) <= atol)


# --- core algebra -----------------------------------------------------------

def choi(m):
    """H matrix of a complex Mueller matrix (its reshuffle)."""
    return reshuffle(m)


def mueller_from_kraus(k):
    m = np.zeros((4, 4), dtype=complex)
    for lam, T in k:
        m += lam * np.kron(T, np.conj(T))
    return m


def synthesize_local_map(target, initial=None):
    """Mueller matrix of the local map on photon A taking ``initial`` to ``target``.

    Solves ``M initial^R = target^R``; the singlet is the default initial
    state. The result is rescaled so that applying it to ``initial`` yields
    unit trace.

    Raises
    ------
    SynthesisError
        If ``initial^R`` is singular or its condition number exceeds 1e12.
    """
    if initial is None:
        initial = qstate.singlet()
    init_r = reshuffle(np.asarray(initial, dtype=complex))
    cond = np.linalg.cond(init_r)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SynthesisError(
            f"reshuffled initial state is singular or ill-conditioned (cond = {cond:.3e})",
            condition=cond,
        )
    m = reshuffle(np.asarray(target, dtype=complex)) @ np.linalg.inv(init_r)
    tr = np.trace(reshuffle(m @ init_r)).real
    return m / tr


def _tp_operator(m):
    """``sum lam T^† T`` computed directly from the Mueller tensor."""
    t = np.asarray(m, dtype=complex).reshape(2, 2, 2, 2)
    return np.conj(np.einsum("iikl->kl", t))


def _tp_deviation(K):
    """Operator-norm distance of ``K`` from the identity after setting ``m00 = 1``."""
    m00 = np.trace(K).real / 2
    if m00 <= 0:
        return float(np.linalg.norm(K - I2, 2))
    return float(np.linalg.norm(K / m00 - I2, 2))


def _report(m, physical, h_eig, tol):
    dev = _tp_deviation(_tp_operator(m)) if physical else None
    try:
        real = to_real_mueller(m)
        dia = float(np.linalg.norm(real.d) / real.m00) if real.m00 > 0 else 0.0
    except ConversionError:
        dia = None
    return PhysicalityReport(tuple(float(x) for x in h_eig), physical, dev, dia)


def physicality(m, tol=1e-9):
    """Eigenvalues of the H matrix and the complete-positivity verdict."""
    h = choi(m)
    h_eig = np.linalg.eigvalsh((h + h.conj().T) / 2)[::-1]
    scale = max(np.max(np.abs(h_eig)), 1e-300)
    herm_ok = np.max(np.abs(h - h.conj().T)) <= tol * max(1.0, scale)
    physical = bool(herm_ok and h_eig[-1] >= -tol * scale)
    return _report(m, physical, h_eig, tol)


def kraus_decompose(m, tol=1e-9):
    """Split ``M`` into at most four weighted Jones matrices.

    Eigenvectors of the H matrix, reshaped row-major to 2x2, are the Jones
    matrices. Eigenvalues below ``tol`` relative to the largest magnitude
    are dropped.

    Raises
    ------
    PhysicalityError
        If H is not Hermitian or has an eigenvalue below ``-tol`` (relative);
        such a map cannot be built from local passive optics.
    """
    h = choi(np.asarray(m, dtype=complex))
    hh = (h + h.conj().T) / 2
    w, v = np.linalg.eigh(hh)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    scale = np.max(np.abs(w))
    if np.max(np.abs(h - h.conj().T)) > tol * max(1.0, scale):
        report = _report(m, False, w, tol)
        raise PhysicalityError("H matrix is not Hermitian; the map does not preserve Hermiticity",
                               report)
    if scale == 0:
        return KrausDecomposition(((0.0, np.zeros((2, 2), dtype=complex)),))
    if w[-1] < -tol * scale:
        report = _report(m, False, w, tol)
        neg = ", ".join(f"{x:.6g}" for x in w if x < -tol * scale)
        raise PhysicalityError(
            f"H matrix has negative eigenvalues ({neg}); the map cannot be "
            "implemented with local optical elements", report)
    keep = w > tol * scale
    return KrausDecomposition.from_terms(
        (lam, v[:, a].reshape(2, 2)) for a, lam in enumerate(w) if keep[a]
    )


def apply_local_map(m, rho):
    """``(M rho^R)^R`` renormalized to unit trace (coincidence postselection)."""
    out = reshuffle(np.asarray(m, dtype=complex) @ reshuffle(np.asarray(rho, dtype=complex)))
    tr = np.trace(out).real
    if tr <= TRACE_FLOOR:
        raise PostselectionError(f"output trace {tr:.3e}: no photon survives the device")
    return out / tr


def apply_kraus(k, rho):
    """``sum lam (T⊗I) rho (T⊗I)^†`` renormalized to unit trace."""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    for lam, T in k:
        A = np.kron(T, I2)
        out += lam * A @ rho @ A.conj().T
    tr = np.trace(out).real
    if tr <= TRACE_FLOOR:
        raise PostselectionError(f"output trace {tr:.3e}: no photon survives the device")
    return out / tr


def to_real_mueller(m):
    """Real Mueller matrix ``Lambda^† M Lambda`` in (I, σz, σx, σy) Stokes order."""
    real = LAMBDA.conj().T @ np.asarray(m, dtype=complex) @ LAMBDA
    resid = np.max(np.abs(real.imag))
    if resid > 1e-8:
        raise ConversionError(
            f"imaginary residue {resid:.3e}: map is not Hermiticity-preserving")
    return MuellerReal(np.ascontiguousarray(real.real))


def from_real_mueller(M):
    mat = M.matrix if isinstance(M, MuellerReal) else np.asarray(M, dtype=float)
    return LAMBDA @ mat @ LAMBDA.conj().T


def trace_preservation(k):
    """Trace-preservation and diattenuation check for a Kraus decomposition.

    The deviation is ``||sum lam T^† T / m00 - I||`` in operator norm, with
    ``m00`` the polarization-independent transmission; a map that only
    loses intensity uniformly is counted as trace preserving. It vanishes
    exactly when the diattenuation vector does.
    """
    m = mueller_from_kraus(k)
    K = sum((lam * T.conj().T @ T for lam, T in k), np.zeros((2, 2), dtype=complex))
    h_eig = np.linalg.eigvalsh(choi(m))[::-1]
    real = to_real_mueller(m)
    dia = float(np.linalg.norm(real.d) / real.m00) if real.m00 > 0 else 0.0
    return PhysicalityReport(tuple(float(x) for x in h_eig), True, _tp_deviation(K), dia)


# --- serialization ---------------------------------------------------------------

def kraus_to_list(k):
    return [{"lambda": float(lam), "T": qstate.matrix_to_pairs(T)} for lam, T in k]


def kraus_from_list(items):
    return KrausDecomposition.from_terms(
        (d["lambda"], qstate.matrix_from_pairs(d["T"])) for d in items)


def channel_to_dict(m, k=None, report=None):
    d = {"mueller": qstate.matrix_to_pairs(m)}
    d["kraus"] = kraus_to_list(k) if k is not None else None
    if report is not None:
        d["physicality"] = report.to_dict()
    return d
