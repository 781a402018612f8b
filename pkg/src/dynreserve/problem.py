"""Problem data model: domain records, platform thresholds, and the general form.

Every constraint is stored in one direction, ``sum_i b_ik x_i >= B_k``; upper
bounds are negated before they get here (the impression cap becomes
``sum -x_i >= -tpv``).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

MAX_CONSTRAINTS = 20

DOMAIN = "domain-compiled"
GENERAL = "raw-general"


@dataclass(frozen=True)
class TrafficRecord:
    """One column of the integer program: value ``c`` and constraint row ``b``."""

    id: object
    c: float
    b: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if not math.isfinite(self.c):
            raise ValueError(f"record {self.id!r}: c must be finite")
        if not all(math.isfinite(v) for v in self.b):
            raise ValueError(f"record {self.id!r}: constraint coefficients must be finite")


@dataclass(frozen=True)
class DomainTrafficRecord:
    id: object
    bid: float
    ctr: float
    gpm: float

    def __post_init__(self):
        if not (math.isfinite(self.ctr) and 0.0 < self.ctr <= 1.0):
            raise ValueError(f"record {self.id!r}: ctr must be in (0, 1], got {self.ctr}")
        if not (math.isfinite(self.bid) and self.bid > 0.0):
            raise ValueError(f"record {self.id!r}: bid must be positive, got {self.bid}")
        if not (math.isfinite(self.gpm) and self.gpm >= 0.0):
            raise ValueError(f"record {self.id!r}: gpm must be nonnegative, got {self.gpm}")

    @property
    def ecpm(self) -> float:
        return self.bid * self.ctr


@dataclass(frozen=True)
class PlatformConstraints:
    """Lower bounds on CTR and GPM, upper bound ``tpv`` on sold impressions."""

    tctr: float
    tgpm: float
    tpv: float

    def __post_init__(self):
        for name in ("tctr", "tgpm", "tpv"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")
        if self.tpv <= 0.0:
            raise ValueError(f"tpv must be positive, got {self.tpv}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GeneralProblem:
    """N records and L bounds of ``max c.x s.t. b.T x >= B, x binary``.

    ``b`` is kept column-major, shape ``(N, L)``, so each constraint's
    coefficients are contiguous. Arrays are read-only after construction.
    """

    c: np.ndarray
    b: np.ndarray
    bounds: np.ndarray
    ids: Sequence = field(default=None)
    mode: str = GENERAL

    def __post_init__(self):
        c = np.array(self.c, dtype=np.float64, copy=True).reshape(-1)
        b = np.asfortranarray(np.array(self.b, dtype=np.float64, copy=True))
        bounds = np.array(self.bounds, dtype=np.float64, copy=True).reshape(-1)
        if b.ndim != 2:
            raise ValueError("b must be a 2-d (N, L) array")
        n, L = c.shape[0], bounds.shape[0]
        if n < 1:
            raise ValueError("empty problem")
        if L < 1:
            raise ValueError("at least one constraint is required")
        if b.shape != (n, L):
            raise ValueError(f"b has shape {b.shape}, expected ({n}, {L})")
        if L > MAX_CONSTRAINTS:
            warnings.warn(f"{L} constraints exceeds the soft cap of {MAX_CONSTRAINTS}",
                          stacklevel=3)
        if not (np.isfinite(c).all() and np.isfinite(b).all() and np.isfinite(bounds).all()):
            raise ValueError("problem data must be finite")
        if self.mode not in (DOMAIN, GENERAL):
            raise ValueError(f"unknown mode {self.mode!r}")
        ids = self.ids
        if ids is None:
            ids = range(n)
        elif len(ids) != n:
            raise ValueError(f"{len(ids)} ids for {n} records")
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "bounds", _frozen(bounds))
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.bounds.shape[0]

    def record(self, i: int) -> TrafficRecord:
        return TrafficRecord(self.ids[i], float(self.c[i]), tuple(self.b[i]))

    @property
    def records(self) -> Iterator[TrafficRecord]:
        return (self.record(i) for i in range(self.n))

    @classmethod
    def from_records(cls, records: Sequence[TrafficRecord], bounds, mode=GENERAL):
        if not records:
            raise ValueError("empty problem")
        L = len(bounds)
        for r in records:
            if len(r.b) != L:
                raise ValueError(f"record {r.id!r} has {len(r.b)} coefficients, expected {L}")
        return cls(
            c=[r.c for r in records],
            b=np.array([r.b for r in records], dtype=np.float64).reshape(len(records), L),
            bounds=bounds,
            ids=[r.id for r in records],
            mode=mode,
        )


def compile_domain(records: Sequence[DomainTrafficRecord],
                   cons: PlatformConstraints) -> GeneralProblem:
    """Map ecpm revenue with CTR/GPM floors and an impression cap to general form."""
    if len(records) == 0:
        raise ValueError("empty problem")
    for r in records:
        if not r.ctr > 0.0:
            raise ValueError(f"record {r.id!r}: ctr must be positive")
    bid = np.fromiter((r.bid for r in records), np.float64, len(records))
    ctr = np.fromiter((r.ctr for r in records), np.float64, len(records))
    gpm = np.fromiter((r.gpm for r in records), np.float64, len(records))
    return compile_domain_arrays(bid, ctr, gpm, cons, ids=[r.id for r in records])


def compile_domain_arrays(bid, ctr, gpm, cons: PlatformConstraints, ids=None) -> GeneralProblem:
    """Vectorised :func:`compile_domain` for columnar input."""
    bid = np.asarray(bid, dtype=np.float64)
    ctr = np.asarray(ctr, dtype=np.float64)
    gpm = np.asarray(gpm, dtype=np.float64)
    n = bid.shape[0]
    if n == 0:
        raise ValueError("empty problem")
    bad = np.flatnonzero(~(ctr > 0.0))
    if bad.size:
        i = int(bad[0])
        rid = ids[i] if ids is not None else i
        raise ValueError(f"record {rid!r}: ctr must be positive, got {ctr[i]}")
    if cons.tpv > n:
        warnings.warn(f"tpv={cons.tpv} exceeds N={n}; the impression cap is vacuous",
                      stacklevel=2)
    b = np.empty((n, 3), dtype=np.float64, order="F")
    b[:, 0] = ctr - cons.tctr
    b[:, 1] = gpm - cons.tgpm
    b[:, 2] = -1.0
    return GeneralProblem(c=bid * ctr, b=b, bounds=(0.0, 0.0, -cons.tpv), ids=ids, mode=DOMAIN)


def generate_synthetic(n: int, l: int, seed: int, bound_fractions=None,
                       kind: str = "cover") -> GeneralProblem:
    """Random instance with ``c`` and constraint weights drawn from U[0, 1].

    ``kind="cover"`` keeps the weights as lower-bound rows,
    ``sum_i b_ik x_i >= f_k * n``, and rejects fractions the full selection
    cannot reach. ``kind="pack"`` reads them as capacity rows,
    ``sum_i w_ik x_i <= f_k * n``, stored negated; the empty selection is then
    always feasible and the constraints actually bind.
    """
    if n < 1 or l < 1:
        raise ValueError(f"need n >= 1 and l >= 1, got n={n}, l={l}")
    if bound_fractions is None:
        bound_fractions = (0.1,) * l
    fr = np.asarray(bound_fractions, dtype=np.float64).reshape(-1)
    if fr.shape[0] != l:
        raise ValueError(f"{fr.shape[0]} bound fractions for {l} constraints")
    if not ((fr > 0.0) & (fr < 1.0)).all():
        raise ValueError("bound fractions must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.0, 1.0, size=n)
    w = np.asfortranarray(rng.uniform(0.0, 1.0, size=(l, n)).T)
    if kind == "cover":
        bounds = fr * n
        if (w.sum(axis=0) < bounds).any():
            raise ValueError("infeasible synthetic instance")
        return GeneralProblem(c=c, b=w, bounds=bounds)
    if kind == "pack":
        np.negative(w, out=w)
        return GeneralProblem(c=c, b=w, bounds=-fr * n)
    raise ValueError(f"unknown synthetic kind {kind!r}")


def generate_domain(n: int, seed: int):
    """Random domain traffic (bid, ctr, gpm) columns for demos and benchmarks."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    bid = rng.lognormal(mean=0.0, sigma=0.5, size=n)
    ctr = np.clip(rng.beta(2.0, 40.0, size=n), 1e-4, 1.0)
    gpm = rng.gamma(shape=2.0, scale=20.0, size=n)
    return bid, ctr, gpm
