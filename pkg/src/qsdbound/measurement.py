"""POVMs and minimum-error discrimination.

Outcome ``i`` of a POVM is read as "the state was ``rho_i``", so a POVM used
against an ensemble must have exactly one operator per state.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .ensemble import decode_matrix, encode_matrix, make_rng, read_dim, read_json
from .errors import (
    BadPovm,
    CountMismatch,
    DimensionMismatch,
    NoConvergence,
    NotTwoStates,
    ParseError,
    ValidationError,
)
from .linalg import DEFAULT_POLICY, as_matrix, check_hermitian, eigvalsh, hermitian_eig, psd_inv_sqrt

log = logging.getLogger(__name__)

MONOTONE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive operators summing to the identity."""

    operators: tuple
    policy: object = field(default=DEFAULT_POLICY, repr=False)

    def __post_init__(self):
        ops = []
        if len(self.operators) < 1:
            raise BadPovm("a POVM needs at least one operator")
        dim = as_matrix(self.operators[0]).shape[0]
        for i, mu in enumerate(self.operators):
            mu = as_matrix(mu)
            if mu.shape != (dim, dim):
                raise DimensionMismatch(f"operator has shape {mu.shape}, expected ({dim}, {dim})", f"operators[{i}]")
            try:
                check_hermitian(mu, self.policy)
            except ValidationError as exc:
                raise BadPovm(str(exc), f"operators[{i}]") from None
            lam = eigvalsh(mu, self.policy)
            if lam[0] < -self.policy.psd_tol:
                raise BadPovm(f"eigenvalue {lam[0]:.3e} is negative", f"operators[{i}]")
            mu = mu.copy()
            mu.setflags(write=False)
            ops.append(mu)
        defect = np.linalg.norm(sum(ops) - np.eye(dim))
        if defect > self.policy.povm_tol:
            raise BadPovm(f"operators sum to the identity only within {defect:.3e}")
        object.__setattr__(self, "operators", tuple(ops))

    @property
    def dim(self):
        return self.operators[0].shape[0]

    @property
    def n(self):
        return len(self.operators)


@dataclass
class OptimizationResult:
    povm: Povm
    error_probability: float
    iterations: int
    dual_gap: float
    converged: bool
    history: list = field(default_factory=list, repr=False)


def _check_pair(m, e):
    if m.dim != e.dim:
        raise DimensionMismatch(f"POVM acts on dimension {m.dim}, ensemble on {e.dim}")
    if m.n != e.n:
        raise CountMismatch(f"POVM has {m.n} outcomes but the ensemble has {e.n} states")


def outcome_probabilities(m, e):
    """Matrix ``P[i, j] = p_j tr(mu_i rho_j)``: guess ``i`` when given ``j``."""
    _check_pair(m, e)
    w = e.weighted()
    return np.array([[np.vdot(mu, wj).real for wj in w] for mu in m.operators])


def error_probability(m, e):
    """Average error ``sum_{i != j} p_j tr(mu_i rho_j)``, clipped to ``[0, 1]``."""
    probs = outcome_probabilities(m, e)
    err = probs.sum() - np.trace(probs)
    return float(min(max(err, 0.0), 1.0))


def success_probability(m, e):
    return float(np.trace(outcome_probabilities(m, e)))


def _complete(ops, proj):
    # the remainder I - proj goes to outcome 0 so the operators sum to I
    ops = [0.5 * (mu + mu.conj().T) for mu in ops]
    ops[0] = ops[0] + (np.eye(proj.shape[0]) - proj)
    return ops


def pretty_good_measurement(e, policy=DEFAULT_POLICY):
    """Square-root measurement ``Sigma^{-1/2} p_i rho_i Sigma^{-1/2}``.

    ``Sigma`` is the average state, pseudo-inverted on its support; the
    identity off the support is added to the first operator.
    """
    w = e.weighted()
    r, proj = psd_inv_sqrt(sum(w), policy)
    return Povm(tuple(_complete([r @ wi @ r for wi in w], proj)), policy)


def helstrom_measurement(e, policy=DEFAULT_POLICY):
    """Optimal two-outcome measurement for a two-state ensemble.

    Outcome 0 projects onto the eigenvectors of ``p0 rho0 - p1 rho1`` with
    eigenvalue >= 0 (zero eigenvalues go to outcome 0), outcome 1 onto the
    rest.
    """
    if e.n != 2:
        raise NotTwoStates(f"the Helstrom measurement needs exactly 2 states, got {e.n}")
    w0, w1 = e.weighted()
    lam, v = hermitian_eig(w0 - w1, policy)
    pos = v[:, lam >= 0]
    mu0 = pos @ pos.conj().T
    return Povm((mu0, np.eye(e.dim) - mu0), policy)


def dual_gap(povm_ops, weighted):
    """Largest violation of ``Y >= p_i rho_i`` for the symmetrized ``Y``.

    ``Y = 1/2 sum_j (mu_j W_j + W_j mu_j)``; a zero gap certifies optimality.
    """
    y = sum(mu @ w + w @ mu for mu, w in zip(povm_ops, weighted)) / 2
    worst = 0.0
    for w in weighted:
        worst = max(worst, eigvalsh(w - y)[-1])
    return float(worst)


def optimize_measurement(e, max_iters=10000, cert_tol=1e-7, policy=DEFAULT_POLICY, strict=False):
    """Minimum-error POVM by fixed-point iteration from the pretty good measurement.

    Each step maps ``mu_i -> L^{-1/2} W_i mu_i W_i L^{-1/2}`` with
    ``W_i = p_i rho_i`` and ``L = sum_j W_j mu_j W_j``. The run stops when the
    dual gap drops to ``cert_tol`` (``converged=True``), when ``max_iters``
    is reached, or when a step would lower the success probability by more
    than 1e-12, which only happens once roundoff dominates; the iterate
    before that step is kept.

    With ``strict=True`` a non-converged run raises :class:`NoConvergence`
    carrying the result; otherwise the result is returned with
    ``converged=False``.
    """
    w = e.weighted()
    ops = list(pretty_good_measurement(e, policy).operators)
    succ = float(sum(np.vdot(mu, wi).real for mu, wi in zip(ops, w)))
    history = [succ]
    gap = dual_gap(ops, w)
    it = 0
    while gap > cert_tol and it < max_iters:
        lam = sum(wi @ mu @ wi for mu, wi in zip(ops, w))
        r, proj = psd_inv_sqrt(lam, policy)
        new = _complete([r @ wi @ mu @ wi @ r for mu, wi in zip(ops, w)], proj)
        new_succ = float(sum(np.vdot(mu, wi).real for mu, wi in zip(new, w)))
        if new_succ < succ - MONOTONE_TOL:
            log.debug("stopping at iteration %d: success fell by %.3e", it, succ - new_succ)
            break
        ops, succ = new, new_succ
        history.append(succ)
        gap = dual_gap(ops, w)
        it += 1
    povm = Povm(tuple(ops), policy)
    result = OptimizationResult(
        povm=povm,
        error_probability=error_probability(povm, e),
        iterations=it,
        dual_gap=gap,
        converged=gap <= cert_tol,
        history=history,
    )
    if strict and not result.converged:
        raise NoConvergence(f"dual gap {gap:.3e} > {cert_tol:.1e} after {it} iterations", result)
    return result


def random_povm(n_outcomes, dim, seed=0, policy=DEFAULT_POLICY):
    """Random POVM ``T^{-1/2} G_i G_i^dag T^{-1/2}`` with ``T = sum_i G_i G_i^dag``."""
    if n_outcomes < 1:
        raise ValidationError(f"need at least one outcome, got {n_outcomes}")
    rng = make_rng(seed)
    gs = []
    for _ in range(n_outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        gs.append(g @ g.conj().T)
    r, proj = psd_inv_sqrt(sum(gs), policy)
    return Povm(tuple(_complete([r @ g @ r for g in gs], proj)), policy)


def povm_from_dict(doc, policy=DEFAULT_POLICY):
    dim = read_dim(doc)
    ops = doc.get("operators")
    if not isinstance(ops, list) or not ops:
        raise ParseError("expected a non-empty list", "operators")
    mats = [decode_matrix(o, f"operators[{i}]", dim) for i, o in enumerate(ops)]
    return Povm(tuple(mats), policy)


def povm_to_dict(m):
    return {"dim": m.dim, "operators": [encode_matrix(mu) for mu in m.operators]}


def load_povm(path, policy=DEFAULT_POLICY):
    return povm_from_dict(read_json(path), policy)


def save_povm(m, path):
    with open(path, "w") as fh:
        json.dump(povm_to_dict(m), fh)
        fh.write("\n")
