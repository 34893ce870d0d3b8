"""Multi-path linear-optical device acting on photon A.

A photon enters through a beam splitter into one of several spatial paths,
each holding a short chain of passive elements. The detector does not
resolve the path, so every path contributes one incoherent Kraus term
``(split, T_path)`` with ``T_path`` the ordered product of its Jones
matrices.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import channel, qstate
from .channel import KrausDecomposition
from .errors import DegenerateDeviceError, DomainError, MemsForgeError


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _retarder(theta, phase):
    return rotation(theta) @ np.diag([1, phase]).astype(complex) @ rotation(-theta)


@dataclass(frozen=True)
class Polarizer:
    theta: float = 0.0

    def jones(self):
        c, s = np.cos(self.theta), np.sin(self.theta)
        return np.array([[c * c, c * s], [c * s, s * s]], dtype=complex)


@dataclass(frozen=True)
class HalfWavePlate:
    theta: float = 0.0

    def jones(self):
        return _retarder(self.theta, -1)


@dataclass(frozen=True)
class QuarterWavePlate:
    theta: float = 0.0

    def jones(self):
        return _retarder(self.theta, 1j)


@dataclass(frozen=True)
class Rotator:
    theta: float = 0.0

    def jones(self):
        return rotation(self.theta)


@dataclass(frozen=True)
class Attenuator:
    """Neutral-density filter with intensity transmission ``a = P_out / P_in``."""

    a: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise DomainError(f"attenuation ratio {self.a!r} outside [0, 1]")

    def jones(self):
        return np.sqrt(self.a) * np.eye(2, dtype=complex)


OpticalElement = Union[Polarizer, HalfWavePlate, QuarterWavePlate, Rotator, Attenuator]

_ELEMENT_TYPES = {
    "polarizer": (Polarizer, "theta"),
    "hwp": (HalfWavePlate, "theta"),
    "qwp": (QuarterWavePlate, "theta"),
    "rotator": (Rotator, "theta"),
    "attenuator": (Attenuator, "a"),
}
_TYPE_NAMES = {cls: (name, key) for name, (cls, key) in _ELEMENT_TYPES.items()}


def jones_of(element):
    return element.jones()


@dataclass(frozen=True)
class PathSpec:
    split: float
    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 <= self.split <= 1.0:
            raise DomainError(f"splitter intensity {self.split!r} outside [0, 1]")
        object.__setattr__(self, "elements", tuple(self.elements))


@dataclass(frozen=True)
class DeviceSpec:
    paths: tuple

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not 1 <= len(self.paths) <= 4:
            raise DomainError(f"a device has 1 to 4 paths, got {len(self.paths)}")
        total = sum(p.split for p in self.paths)
        if total > 1 + 1e-12:
            raise DomainError(f"splitter intensities sum to {total!r} > 1")


def path_kraus(path):
    """Weight and Jones matrix of one path; the first element listed acts first."""
    T = np.eye(2, dtype=complex)
    for e in path.elements:
        T = jones_of(e) @ T
    return path.split, T


def device_map(device):
    terms = [path_kraus(p) for p in device.paths]
    terms = [(w, T) for w, T in terms if w * np.linalg.norm(T, 2) ** 2 > 0]
    if not terms:
        raise DegenerateDeviceError("device transmits nothing on any path")
    return KrausDecomposition.from_terms(terms)


def mems_device(a1, a2, split=0.5):
    """Two-path bench: attenuator + horizontal polarizer, attenuator + HWP pair at 45°."""
    for name, a in (("a1", a1), ("a2", a2)):
        if not 0.0 <= a <= 1.0:
            raise DomainError(f"{name}={a!r} outside [0, 1]")
    if a1 == 0 and a2 == 0:
        raise DegenerateDeviceError("both attenuators fully block their paths")
    return DeviceSpec((
        PathSpec(split, (Attenuator(a1), Polarizer(0.0))),
        PathSpec(1 - split, (Attenuator(a2), HalfWavePlate(0.0), HalfWavePlate(np.pi / 4))),
    ))


def effective_p(a1, a2):
    """MEMS I parameter produced by :func:`mems_device` with a 50/50 splitter.

    Matching the path weights ``a1/2`` (polarizer) and ``a2/2`` (rotator) to
    ``2(1-p)`` and ``p`` gives ``p = 2 a2 / (2 a2 + a1)``.
    """
    if a1 < 0 or a2 < 0:
        raise DomainError("attenuation ratios must be nonnegative")
    if a1 == 0 and a2 == 0:
        raise DomainError("effective p undefined when both paths are blocked")
    return 2 * a2 / (2 * a2 + a1)


# --- sweep --------------------------------------------------------------------

CURVES = ("device", "mems1", "mems2", "werner")


@dataclass(frozen=True)
class SweepRow:
    a1: float | None
    a2: float | None
    p: float
    linear_entropy: float
    tangle: float
    curve: str
    error: str | None = None


def sweep(grid, initial=None):
    """Device output measures for each ``(a1, a2)``, in grid order.

    Points where the device fails are kept as rows with NaN values and the
    error message in ``error``.
    """
    if initial is None:
        initial = qstate.singlet()
    rows = []
    for a1, a2 in grid:
        try:
            rho = channel.apply_kraus(device_map(mems_device(a1, a2)), initial)
            rows.append(SweepRow(a1, a2, effective_p(a1, a2), qstate.linear_entropy(rho),
                                 qstate.tangle(rho), "device"))
        except MemsForgeError as exc:
            nan = float("nan")
            rows.append(SweepRow(a1, a2, nan, nan, nan, "device", error=str(exc)))
    return rows


def reference_curves(n=51, curves=("mems1", "mems2", "werner")):
    """Theory curves for the linear-entropy/tangle plane.

    MEMS I over ``p in [2/3, 1]``, MEMS II over ``c in (0, 2/3]`` and Werner
    states over ``p in [0, 1]``. Both MEMS branches include the ``T = 4/9``
    junction point at their ``2/3`` end.
    """
    rows = []
    grids = {
        "mems1": (np.linspace(2 / 3, 1, n), qstate.mems1),
        "mems2": (np.linspace(2 / 3, 0, n, endpoint=False)[::-1], qstate.mems2),
        "werner": (np.linspace(0, 1, n), qstate.werner),
    }
    for name in curves:
        params, ctor = grids[name]
        for x in params:
            rho = ctor(x)
            rows.append(SweepRow(None, None, float(x), qstate.linear_entropy(rho),
                                 qstate.tangle(rho), name))
    return rows


def _fmt(x):
    if x is None:
        return ""
    return format(float(x), ".12g")


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a1", "a2", "p", "linear_entropy", "tangle", "curve"])
    for r in rows:
        w.writerow([_fmt(r.a1), _fmt(r.a2), _fmt(r.p), _fmt(r.linear_entropy),
                    _fmt(r.tangle), r.curve])
    return buf.getvalue()


# --- serialization --------------------------------------------------------------

def element_to_dict(e):
    name, key = _TYPE_NAMES[type(e)]
    return {"type": name, key: float(getattr(e, key))}


def element_from_dict(d):
    try:
        cls, key = _ELEMENT_TYPES[d["type"]]
    except KeyError:
        raise DomainError(f"unknown optical element {d.get('type')!r}") from None
    extra = set(d) - {"type", key}
    if extra:
        raise DomainError(f"unexpected keys for {d['type']}: {sorted(extra)}")
    return cls(float(d.get(key, getattr(cls(), key))))


def device_to_dict(device):
    return {"paths": [{"split": float(p.split),
                       "elements": [element_to_dict(e) for e in p.elements]}
                      for p in device.paths]}


def device_from_dict(d):
    return DeviceSpec(tuple(
        PathSpec(float(p["split"]), tuple(element_from_dict(e) for e in p.get("elements", [])))
        for p in d["paths"]))


def device_to_json(device):
    return json.dumps(device_to_dict(device), sort_keys=True)
