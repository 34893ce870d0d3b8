"""Simulated two-photon polarization tomography.

Sixteen product projectors built from ``{H, V, D, L}`` on each photon,
Poisson coincidence counts, and a maximum-likelihood fit over the Cholesky
parametrization ``rho(t) = T T^† / Tr(T T^†)`` with ``T`` lower triangular.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.optimize import minimize

from . import qstate
from .errors import ReconstructionError

COUNT_FLOOR = 1e-12
OBJECTIVE_TOL = 1e-10
MAX_ITERATIONS = 100_000

ANALYZER_STATES = {
    "H": qstate.ket(1, 0),
    "V": qstate.ket(0, 1),
    "D": qstate.ket(1, 1) / np.sqrt(2),
    "L": qstate.ket(1, 1j) / np.sqrt(2),
}

# lower-triangle positions filled by the 12 real off-diagonal parameters
_OFFDIAG = [(1, 0), (2, 0), (3, 0), (2, 1), (3, 1), (3, 2)]
_ROWS = np.array([i for i, _ in _OFFDIAG])
_COLS = np.array([j for _, j in _OFFDIAG])
_DIAG = np.arange(4)


class ProjectorSchedule:
    """Ordered list of product projectors ``|s_A s_B><s_A s_B|``."""

    def __init__(self, labels):
        self.labels = [tuple(l) for l in labels]
        kets = [np.kron(ANALYZER_STATES[a], ANALYZER_STATES[b]) for a, b in self.labels]
        self.projectors = np.array([np.outer(k, k.conj()) for k in kets])
        # probabilities are design @ rho.ravel()
        self.design = np.array([P.T.reshape(-1) for P in self.projectors])
        if len(self.labels) == 16 and not self.is_complete():
            raise ValueError("projector schedule is not tomographically complete")

    def __len__(self):
        return len(self.labels)

    def is_complete(self):
        return np.linalg.matrix_rank(self.design) == 16

    def probabilities(self, rho):
        return np.real(self.design @ np.asarray(rho, dtype=complex).reshape(-1))


def standard_schedule():
    return ProjectorSchedule(product("HVDL", repeat=2))


@dataclass(frozen=True)
class CountRecord:
    setting: int
    counts: float
    N: int
    seed: int | None = None


@dataclass(frozen=True)
class ReconstructionResult:
    rho_hat: np.ndarray
    final_objective: float
    iterations: int
    converged: bool

    def to_dict(self):
        d = qstate.state_to_dict(self.rho_hat)
        d.update(objective=float(self.final_objective), iterations=int(self.iterations),
                 converged=bool(self.converged))
        return d


def simulate_counts(rho, schedule, N, seed=None, noiseless=False):
    """Coincidence counts for each setting, ``N`` trials per setting.

    The mean for setting ``k`` is ``N Tr(P_k rho)``. Noiseless mode returns
    the means themselves (as floats); otherwise Poisson draws come from a
    ``numpy`` PCG64 generator seeded with ``seed``.
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    means = N * np.clip(schedule.probabilities(rho), 0.0, None)
    if noiseless:
        values = [float(m) for m in means]
    else:
        rng = np.random.default_rng(seed)
        values = [int(x) for x in rng.poisson(means)]
    return [CountRecord(i, v, int(N), seed) for i, v in enumerate(values)]


# --- parametrization ------------------------------------------------------------

def t_to_matrix(t):
    t = np.asarray(t, dtype=float)
    T = np.zeros((4, 4), dtype=complex)
    T[_DIAG, _DIAG] = t[:4]
    T[_ROWS, _COLS] = t[4::2] + 1j * t[5::2]
    return T


def rho_from_t(t):
    T = t_to_matrix(t)
    rho = T @ T.conj().T
    return rho / np.sum(np.abs(T) ** 2)


def t_from_rho(rho, mix=1e-8):
    """Parameters reproducing ``rho`` after mixing in ``mix * I/4`` to make it full rank."""
    rho = np.asarray(rho, dtype=complex)
    rho = (1 - mix) * rho + mix * np.eye(4) / 4
    L = np.linalg.cholesky((rho + rho.conj().T) / 2)
    t = np.empty(16)
    t[:4] = L.diagonal().real
    t[4::2], t[5::2] = L[_ROWS, _COLS].real, L[_ROWS, _COLS].imag
    return t


def _arrays(counts, schedule):
    by_setting = {}
    for c in counts:
        by_setting[c.setting] = c
    idx = sorted(by_setting)
    n = np.array([by_setting[i].counts for i in idx], dtype=float)
    N = np.array([by_setting[i].N for i in idx], dtype=float)
    return idx, n, N


def _objective(t, design, n, N, kind):
    x = N * np.real(design @ rho_from_t(t).reshape(-1))
    if kind == "gaussian":
        return float(np.sum((x - n) ** 2 / (2 * (x + COUNT_FLOOR))))
    mu = x + COUNT_FLOOR
    # Poisson deviance mu - n + n log(n/mu), written as n (u - log1p(u)) with
    # u = (mu - n)/n so large counts do not cancel catastrophically
    pos = n > 0
    u = (mu[pos] - n[pos]) / n[pos]
    return float(np.sum(n[pos] * (u - np.log1p(u))) + np.sum(mu[~pos]))


def likelihood_objective(t, counts, schedule, kind="gaussian"):
    """Negative log-likelihood of the counts under ``rho(t)``, up to a constant.

    ``kind="gaussian"`` is the Gaussian-approximated Poisson sum
    ``sum (x - n)^2 / (2 x)`` with predicted counts ``x = N Tr(P rho(t))``;
    ``kind="poisson"`` is the exact Poisson deviance. Both are nonnegative.
    """
    idx, n, N = _arrays(counts, schedule)
    return _objective(t, schedule.design[idx], n, N, kind)


def likelihood_gradient(t, counts, schedule, kind="gaussian"):
    idx, n, N = _arrays(counts, schedule)
    P = schedule.projectors[idx]
    T = t_to_matrix(t)
    s = np.sum(np.abs(T) ** 2)
    PT = P @ T
    q = np.real(np.einsum("kab,ab->k", PT, T.conj()))
    p = q / s
    x = N * p
    mu = x + COUNT_FLOOR
    if kind == "gaussian":
        dg = (x - n) / mu - (x - n) ** 2 / (2 * mu**2)
    else:
        dg = 1 - n / mu
    # d p_k / d Re T_ab and d Im T_ab
    dre = (2 * PT.real - p[:, None, None] * 2 * T.real) / s
    dim = (2 * PT.imag - p[:, None, None] * 2 * T.imag) / s
    gre = np.einsum("k,kab->ab", dg * N, dre)
    gim = np.einsum("k,kab->ab", dg * N, dim)
    grad = np.empty(16)
    grad[:4] = gre.diagonal()
    grad[4::2], grad[5::2] = gre[_ROWS, _COLS], gim[_ROWS, _COLS]
    return grad


def linear_inversion(counts, schedule):
    """Direct inversion of the frequencies, projected onto the state space."""
    idx, n, N = _arrays(counts, schedule)
    vec, *_ = np.linalg.lstsq(schedule.design[idx], n / N, rcond=None)
    rho = vec.reshape(4, 4)
    rho = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(4, dtype=complex) / 4
    return (v * (w / w.sum())) @ v.conj().T


def reconstruct(counts, schedule, kind="gaussian", method="nelder-mead", x0=None,
                max_iterations=MAX_ITERATIONS):
    """Maximum-likelihood density matrix from coincidence counts.

    The fit starts from the linear-inversion estimate unless ``x0`` is given
    and runs Nelder-Mead with restarts until one restart lowers the objective
    by less than 1e-10 or ``max_iterations`` is reached (``converged=False``).
    ``method="bfgs"`` uses the analytic gradient instead.

    Raises
    ------
    ReconstructionError
        If a setting is missing or all counts are zero.
    """
    idx, n, N = _arrays(counts, schedule)
    if idx != list(range(len(schedule))) or len(schedule) != 16:
        raise ReconstructionError("need counts for all 16 settings of the schedule")
    if not np.sum(n) > 0:
        raise ReconstructionError("all coincidence counts are zero")
    design = schedule.design
    if x0 is None:
        x0 = t_from_rho(linear_inversion(counts, schedule))
    fun = lambda t: _objective(t, design, n, N, kind)  # noqa: E731

    best_t = np.asarray(x0, dtype=float)
    best_f = fun(best_t)
    iterations = 0
    converged = False
    while iterations < max_iterations:
        budget = max_iterations - iterations
        if method == "bfgs":
            jac = lambda t: likelihood_gradient(t, counts, schedule, kind)  # noqa: E731
            res = minimize(fun, best_t, jac=jac, method="BFGS",
                           options={"maxiter": budget, "gtol": 1e-10})
        elif method == "nelder-mead":
            res = minimize(fun, best_t, method="Nelder-Mead",
                           options={"maxiter": budget, "maxfev": 4 * budget, "xatol": 1e-10,
                                    "fatol": 1e-12, "adaptive": True})
        else:
            raise ValueError(f"unknown method {method!r}")
        iterations += max(int(res.nit), 1)
        decrease = best_f - res.fun
        if res.fun < best_f:
            best_t, best_f = res.x, float(res.fun)
        if decrease < OBJECTIVE_TOL:
            converged = True
            break
    rho_hat = rho_from_t(best_t)
    rho_hat = qstate.check_state((rho_hat + rho_hat.conj().T) / 2)
    return ReconstructionResult(rho_hat, best_f, iterations, converged)


# --- serialization ------------------------------------------------------------------

def _fmt_count(v):
    if float(v).is_integer() and isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def counts_to_csv(counts, schedule):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["setting", "sA", "sB", "counts", "N", "seed"])
    for c in sorted(counts, key=lambda c: c.setting):
        sa, sb = schedule.labels[c.setting]
        w.writerow([c.setting, sa, sb, _fmt_count(c.counts), c.N,
                    "" if c.seed is None else c.seed])
    return buf.getvalue()


def counts_from_csv(text):
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        raw = row["counts"]
        value = int(raw) if raw.lstrip("-").isdigit() else float(raw)
        seed = int(row["seed"]) if row["seed"] else None
        out.append(CountRecord(int(row["setting"]), value, int(row["N"]), seed))
    return out
