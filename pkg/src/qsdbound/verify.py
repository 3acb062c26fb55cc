"""Seeded random-trial suites over the checks in :mod:`qsdbound.proofcheck`.

Trial ``t`` of a run with base seed ``s`` uses seed ``s + t``; every check
instance is a pure function of ``(check name, trial seed)``, so the
``worst_seed`` in a report reproduces the extremal case through
:func:`run_trial`.
"""

from dataclasses import dataclass

import numpy as np

from . import proofcheck as pc
from .ensemble import make_rng, random_ensemble
from .errors import InvalidInput
from .linalg import frobenius_norm, schatten_norm
from .measurement import pretty_good_measurement, random_povm

N_RANGE = (2, 5)
DIM_RANGE = (2, 6)

SUPERBLOCK_PADDING = "every super-block zero-padded to a square of side max(dim, (n-1)*dim)"


def random_instance(seed, n_range=N_RANGE, dim_range=DIM_RANGE):
    """A random ``(povm, ensemble)`` pair; kind and priors are drawn too."""
    rng = make_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    dim = int(rng.integers(dim_range[0], dim_range[1] + 1))
    kind = "pure" if rng.random() < 0.5 else "mixed"
    priors = "uniform" if rng.random() < 0.5 else "dirichlet"
    sub = rng.integers(0, 2**62, size=2)
    e = random_ensemble(n, dim, kind, priors, seed=int(sub[0]))
    return random_povm(n, dim, seed=int(sub[1])), e


def _gaussian(rng, shape, scale=True):
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if scale:
        g *= np.exp(rng.uniform(-2, 2))
    return g


def _low_rank(rng, rows, cols):
    r = int(rng.integers(1, min(rows, cols) + 1))
    return _gaussian(rng, (rows, r)) @ _gaussian(rng, (r, cols), scale=False)


def _quadruple(seed):
    rng = make_rng(seed)
    d = 4
    mats = []
    for _ in range(4):
        mats.append(_low_rank(rng, d, d) if rng.random() < 0.3 else _gaussian(rng, (d, d)))
    return mats


def _block_row(seed):
    rng = make_rng(seed)
    rows = int(rng.integers(1, 5))
    count = int(rng.integers(1, 5))
    return [_gaussian(rng, (rows, int(rng.integers(1, 5)))) for _ in range(count)]


def _psd_pair(seed):
    rng = make_rng(seed)
    d = int(rng.integers(1, 7))
    out = []
    for _ in range(2):
        g = _low_rank(rng, d, d) if rng.random() < 0.3 else _gaussian(rng, (d, d))
        out.append(g @ g.conj().T)
    return out


def _lemma1_chain_slack(seed):
    c = pc.lemma1_chain(*_quadruple(seed))
    return min(
        -abs(c.lhs - c.rotated) / max(c.lhs, 1.0),
        -abs(c.rotated - c.stacked) / max(c.lhs, 1.0),
        (c.cauchy_schwarz - c.stacked**2) / max(c.rhs, 1.0),
        (c.triangle - c.cauchy_schwarz) / max(c.rhs, 1.0),
        -abs(c.triangle - c.rhs) / max(c.rhs, 1.0),
    )


def _lemma2_chain_slack(seed):
    c = pc.lemma2_chain(_block_row(seed))
    scale = max(c.whole, 1.0)
    return min(
        -abs(c.whole - c.gram_half) / scale,
        (c.gram_half - c.parts_half) / scale,
        -abs(c.parts_half - c.parts) / scale,
        -c.gram_residual / scale,
    )


def _lemma1_slack(seed):
    mats = _quadruple(seed)
    scale = max(1.0, np.prod([frobenius_norm(x) for x in mats]))
    return pc.lemma1_slack(*mats) / scale


def _lemma2_slack(seed):
    blocks = _block_row(seed)
    return pc.lemma2_slack(blocks) / max(1.0, sum(frobenius_norm(b) ** 2 for b in blocks))


def _quasi_norm(seed):
    p, q = _psd_pair(seed)
    scale = max(1.0, frobenius_norm(p) + frobenius_norm(q))
    return (schatten_norm(p + q, 0.5) - schatten_norm(p, 0.5) - schatten_norm(q, 0.5)) / scale


def _isometry(seed):
    m, _ = random_instance(seed)
    nmat = pc.build_measurement_matrix(m).dense
    return frobenius_norm(nmat @ nmat.conj().T - np.eye(m.dim))


def _state_factor(seed):
    _, e = random_instance(seed)
    s = pc.build_state_matrix(e)
    return max(frobenius_norm(s.block(0, i) @ s.block(0, i).conj().T - w) for i, w in enumerate(e.weighted()))


def _lower_bound_pgm(seed):
    _, e = random_instance(seed)
    return pc.theorem1_slack(pretty_good_measurement(e), e)


def _row_chain(seed):
    m, e = random_instance(seed)
    return min(r.slack() for r in pc.row_inequalities(m, e))


@dataclass(frozen=True)
class Check:
    name: str
    kind: str  # "residual" (want <= tol) or "slack" (want >= -tol)
    trial: object
    description: str


# Lemma slacks on unnormalized random matrices are divided by a scale so that
# one absolute tolerance fits every draw.
CHECKS = (
    Check("state_factorization", "residual", _state_factor, "||S_i S_i^dag - p_i rho_i||_2"),
    Check("measurement_isometry", "residual", _isometry, "||N N^dag - I||_2"),
    Check("gram_identity", "residual", lambda s: pc.check_gram_identity(*random_instance(s)), "||A^dag A - S^dag S||_2"),
    Check("block_probability", "residual", lambda s: pc.block_probability_residual(*random_instance(s)),
          "max |(||A_ij||_2^2) - p_j tr(mu_i rho_j)|"),
    Check("block_fidelity", "residual", lambda s: pc.block_fidelity_residual(random_instance(s)[1]),
          "max |(||(S^dag S)_ij||_1^2) - p_i p_j F_ij|"),
    Check("lemma1", "slack", _lemma1_slack, "four-matrix trace-norm bound, scaled"),
    Check("lemma1_chain", "slack", _lemma1_chain_slack, "each step of the polar-decomposition argument"),
    Check("lemma2", "slack", _lemma2_slack, "row-partition trace-norm bound, scaled"),
    Check("lemma2_chain", "slack", _lemma2_chain_slack, "each step of the 1/2 quasi-norm argument"),
    Check("quasi_norm_superadditivity", "slack", _quasi_norm, "||P+Q||_1/2 >= ||P||_1/2 + ||Q||_1/2, scaled"),
    Check("row_chain", "slack", _row_chain, "super-block chain for every block row"),
    Check("lower_bound", "slack", lambda s: pc.theorem1_slack(*random_instance(s)), "P_E - sum_{i>j} p_i p_j F_ij"),
    Check("lower_bound_pgm", "slack", _lower_bound_pgm, "as lower_bound, measuring with the pretty good measurement"),
)

CHECKS_BY_NAME = {c.name: c for c in CHECKS}


def run_trial(name, seed):
    """Value of check ``name`` on the instance drawn from ``seed``."""
    return float(CHECKS_BY_NAME[name].trial(seed))


def run_check(check, trials, seed, tol):
    values = [check.trial(seed + t) for t in range(trials)]
    if check.kind == "residual":
        idx = int(np.argmax(values))
        ok = values[idx] <= tol
        key = "max_residual"
    else:
        idx = int(np.argmin(values))
        ok = values[idx] >= -tol
        key = "min_slack"
    return {
        "name": check.name,
        "trials": trials,
        key: float(values[idx]),
        "worst_seed": seed + idx,
        "passed": bool(ok),
        "description": check.description,
    }


def run_suite(trials=1000, seed=0, tol=1e-9, names=None):
    """Run every check (or those in ``names``); returns a JSON-ready report."""
    unknown = [n for n in names or () if n not in CHECKS_BY_NAME]
    if unknown:
        raise InvalidInput(f"unknown check {unknown[0]!r}; choose from {', '.join(CHECKS_BY_NAME)}", "--check")
    checks = [CHECKS_BY_NAME[n] for n in names] if names else CHECKS
    results = [run_check(c, trials, seed, tol) for c in checks]
    return {
        "trials": trials,
        "seed": seed,
        "tol": tol,
        "n_range": list(N_RANGE),
        "dim_range": list(DIM_RANGE),
        "superblock_padding": SUPERBLOCK_PADDING,
        "passed": all(r["passed"] for r in results),
        "checks": results,
    }
