"""Closed-form bounds on the minimum average error probability.

Pairwise terms are evaluated with the two states in a canonical order and
summed with :func:`math.fsum`, so every bound is exactly invariant under a
relabeling of the ensemble.
"""

import json
import math
import time
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import InvalidInput, NonUniformPriors, NotPureStates, NotTwoStates, TooFewStates, ValidationError
from .linalg import DEFAULT_POLICY, fidelity_from_sqrts, trace_norm
from .measurement import optimize_measurement


def _canonical_fidelity(a, b, policy=DEFAULT_POLICY):
    # evaluate F(a, b) in an order fixed by the matrix contents, so that
    # F(a, b) and F(b, a) are bitwise equal
    if a.matrix.tobytes() > b.matrix.tobytes():
        a, b = b, a
    return fidelity_from_sqrts(a.sqrt, b.sqrt, policy)


def pairwise_fidelities(e, policy=DEFAULT_POLICY):
    """Symmetric ``n x n`` matrix of ``F(rho_i, rho_j)`` with unit diagonal."""
    n = e.n
    f = np.eye(n)
    for i, j in combinations(range(n), 2):
        f[i, j] = f[j, i] = _canonical_fidelity(e.states[i], e.states[j], policy)
    return f


def _pair_terms(e, fid, term):
    return [term(e.priors[i], e.priors[j], fid[i, j]) for i, j in combinations(range(e.n), 2)]


def montanaro_lower(e, fidelities=None):
    """Fidelity lower bound ``sum_{i>j} p_i p_j F(rho_i, rho_j)``.

    Holds for every measurement; lies in ``[0, 1/2]``.
    """
    fid = pairwise_fidelities(e) if fidelities is None else fidelities
    return math.fsum(_pair_terms(e, fid, lambda pi, pj, f: (pi * pj) * f))


def barnum_knill_upper(e, fidelities=None, clamp=True):
    """Upper bound ``2 sum_{i>j} sqrt(p_i p_j) sqrt(F(rho_i, rho_j))``.

    The raw formula can exceed 1; by default the value is clamped to 1.
    """
    fid = pairwise_fidelities(e) if fidelities is None else fidelities
    raw = 2.0 * math.fsum(_pair_terms(e, fid, lambda pi, pj, f: math.sqrt(pi * pj) * math.sqrt(f)))
    return min(raw, 1.0) if clamp else raw


def helstrom_exact_two(e, policy=DEFAULT_POLICY):
    """Minimum error for two states: ``1/2 - 1/2 ||p0 rho0 - p1 rho1||_1``."""
    if e.n != 2:
        raise NotTwoStates(f"exact two-state formula needs 2 states, got {e.n}")
    (p0, s0), (p1, s1) = e.entries
    # order-independent: the trace norm of X equals that of -X
    if s0.matrix.tobytes() > s1.matrix.tobytes() or (
        s0.matrix.tobytes() == s1.matrix.tobytes() and p0 > p1
    ):
        p0, s0, p1, s1 = p1, s1, p0, s0
    gamma = p0 * s0.matrix - p1 * s1.matrix
    val = 0.5 - 0.5 * trace_norm(gamma, policy)
    return float(min(max(val, 0.0), 0.5))


def multicopy_lower(e, m, fidelities=None):
    """Lower bound for ``m`` copies of an equiprobable ensemble.

    ``(1/n^2) sum_{i>j} F(rho_i, rho_j)^m``, which equals the fidelity bound
    of the ``m``-fold tensor-power ensemble.
    """
    if m < 1:
        raise InvalidInput(f"number of copies must be >= 1, got {m}")
    if not e.is_uniform():
        raise NonUniformPriors("the multicopy bound assumes equiprobable states")
    fid = pairwise_fidelities(e) if fidelities is None else fidelities
    n = e.n
    return math.fsum(fid[i, j] ** m for i, j in combinations(range(n), 2)) / n**2


def multicopy_floor(n, fidelity_floor, m):
    """Weaker closed form ``(n-1) F^m / (2n)`` for a uniform fidelity floor ``F``."""
    if n < 2:
        raise InvalidInput(f"need n >= 2 states, got {n}")
    if not 0 <= fidelity_floor <= 1:
        raise InvalidInput(f"fidelity floor must lie in [0, 1], got {fidelity_floor}")
    return (n - 1) * fidelity_floor**m / (2 * n)


def copies_needed(fidelity_floor, epsilon):
    """Real-valued lower bound ``(log2(1/eps) - 2) / log2(1/F)`` on the copy count.

    May be zero or negative for large ``epsilon``; rounding up is left to the
    caller.
    """
    if not 0 < fidelity_floor < 1:
        raise InvalidInput(f"fidelity floor must lie in (0, 1), got {fidelity_floor}")
    if not 0 < epsilon < 1:
        raise InvalidInput(f"epsilon must lie in (0, 1), got {epsilon}")
    return (math.log2(1.0 / epsilon) - 2.0) / math.log2(1.0 / fidelity_floor)


def zhang_unambiguous_lower(e, fidelities=None, purity_tol=1e-9):
    """Failure-probability bound for unambiguous discrimination of pure states.

    ``(2/(n-1)) sum_{i>j} sqrt(p_i p_j) |<psi_i|psi_j>|`` with the overlaps
    taken as ``sqrt(F)``.
    """
    if e.n < 2:
        raise TooFewStates(f"need at least 2 states, got {e.n}")
    for i, s in enumerate(e.states):
        if not s.is_pure(purity_tol):
            raise NotPureStates(f"state {i} is not pure (second eigenvalue {s.eigenvalues[-2]:.3e})")
    fid = pairwise_fidelities(e) if fidelities is None else fidelities
    total = math.fsum(_pair_terms(e, fid, lambda pi, pj, f: math.sqrt(pi * pj) * math.sqrt(f)))
    return 2.0 / (e.n - 1) * total


@dataclass
class BoundReport:
    montanaro_lower: float
    barnum_knill_upper: float
    barnum_knill_raw: float
    pairwise_fidelities: list
    helstrom_exact: Optional[float] = None
    optimized_error: Optional[float] = None
    optimizer: Optional[dict] = None
    zhang_unambiguous_lower: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def check(self, tol=1e-9):
        """Raise :class:`ValidationError` if the report's invariants fail."""
        lo = self.montanaro_lower
        if self.optimized_error is not None and lo > self.optimized_error + tol:
            raise ValidationError(f"lower bound {lo} exceeds optimized error {self.optimized_error}")
        if self.helstrom_exact is not None and lo > self.helstrom_exact + tol:
            raise ValidationError(f"lower bound {lo} exceeds exact error {self.helstrom_exact}")
        for name in ("montanaro_lower", "barnum_knill_upper", "helstrom_exact",
                     "optimized_error", "zhang_unambiguous_lower"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValidationError(f"{name} is negative: {v}")
        return self

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def bound_report(e, optimize=False, seed=None, max_iters=10000, cert_tol=1e-7, policy=DEFAULT_POLICY):
    """Every applicable bound for ``e``.

    ``helstrom_exact`` is filled for two states, ``zhang_unambiguous_lower``
    when all states are pure, ``optimized_error`` only with ``optimize=True``.
    """
    timings = {}
    t0 = time.perf_counter()
    fid = pairwise_fidelities(e, policy)
    timings["fidelities"] = time.perf_counter() - t0
    report = BoundReport(
        montanaro_lower=montanaro_lower(e, fid),
        barnum_knill_upper=barnum_knill_upper(e, fid),
        barnum_knill_raw=barnum_knill_upper(e, fid, clamp=False),
        pairwise_fidelities=fid.tolist(),
    )
    if e.n == 2:
        t0 = time.perf_counter()
        report.helstrom_exact = helstrom_exact_two(e, policy)
        timings["helstrom"] = time.perf_counter() - t0
    if e.n >= 2 and all(s.is_pure() for s in e.states):
        report.zhang_unambiguous_lower = zhang_unambiguous_lower(e, fid)
    if optimize:
        t0 = time.perf_counter()
        res = optimize_measurement(e, max_iters=max_iters, cert_tol=cert_tol, policy=policy)
        timings["optimize"] = time.perf_counter() - t0
        report.optimized_error = res.error_probability
        report.optimizer = {
            "iterations": res.iterations,
            "dual_gap": res.dual_gap,
            "converged": bool(res.converged),
        }
    report.metadata = {
        "n": e.n,
        "dim": e.dim,
        "seed": seed,
        "timings": {k: round(v, 3) for k, v in timings.items()},
    }
    return report.check()
