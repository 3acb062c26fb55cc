"""Density matrices, ensembles, random instances, and the ensemble file format.

Random generation uses numpy's counter-based ``Philox`` bit generator seeded
with a 64-bit integer, so a given ``(parameters, seed)`` pair reproduces the
same ensemble on any platform.

Ensemble files are JSON::

    {"dim": 2,
     "entries": [{"prob": 0.5, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
                 ...]}

with each matrix row-major and each entry a ``[re, im]`` pair.
"""

import json
from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np

from .errors import BadPriors, BadState, DimensionMismatch, ParseError, TooLarge, ValidationError
from .linalg import DEFAULT_POLICY, hermitian_eig, kron, matrix_sqrt_psd


def make_rng(seed):
    """Seeded ``numpy`` generator backed by ``Philox``."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian, positive semidefinite, unit-trace matrix.

    The constructor validates; the stored matrix is read-only.
    """

    matrix: np.ndarray
    policy: object = field(default=DEFAULT_POLICY, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise BadState(f"density matrix must be square and non-empty, got shape {m.shape}")
        tr = np.trace(m)
        if abs(tr - 1.0) > self.policy.trace_tol:
            raise BadState(f"trace is {tr.real:.12g}, expected 1")
        try:
            eig = hermitian_eig(m, self.policy)
        except ValidationError as exc:
            raise BadState(str(exc)) from None
        if eig.eigenvalues[0] < -self.policy.psd_tol:
            raise BadState(f"eigenvalue {eig.eigenvalues[0]:.3e} is negative")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_eigenvalues", eig.eigenvalues)

    @classmethod
    def pure(cls, vector, policy=DEFAULT_POLICY):
        """``|psi><psi|`` for ``vector`` normalized to unit length."""
        v = np.asarray(vector, dtype=np.complex128).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), policy)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def eigenvalues(self):
        return self._eigenvalues

    @cached_property
    def sqrt(self):
        root = matrix_sqrt_psd(self.matrix, self.policy)
        root.setflags(write=False)
        return root

    def is_pure(self, tol=1e-9):
        """True when the second-largest eigenvalue is at most ``tol``."""
        lam = self._eigenvalues
        return lam.size == 1 or lam[-2] <= tol

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


@dataclass(frozen=True)
class Ensemble:
    """States with a priori probabilities. Build with :func:`make_ensemble`."""

    priors: tuple
    states: tuple

    def __post_init__(self):
        _validate(self.priors, self.states, self.states[0].policy if self.states else DEFAULT_POLICY)

    @property
    def n(self):
        return len(self.states)

    @property
    def dim(self):
        return self.states[0].dim

    @property
    def entries(self):
        return list(zip(self.priors, self.states))

    def weighted(self):
        """The list of matrices ``p_i * rho_i``."""
        return [p * s.matrix for p, s in self.entries]

    def average_state(self):
        return sum(self.weighted())

    def is_uniform(self, tol=1e-12):
        return all(abs(p - 1.0 / self.n) <= tol for p in self.priors)

    def permuted(self, order):
        """Relabel the entries: new entry ``k`` is old entry ``order[k]``."""
        return Ensemble(tuple(self.priors[i] for i in order), tuple(self.states[i] for i in order))


def _validate(priors, states, policy):
    if len(states) < 1:
        raise ValidationError("an ensemble needs at least one state", "entries")
    if len(priors) != len(states):
        raise ValidationError("priors and states differ in length", "entries")
    for i, p in enumerate(priors):
        if not np.isfinite(p) or p < 0:
            raise BadPriors(f"prior {p} is negative or not finite", f"entries[{i}].prob")
    total = float(np.sum(priors))
    if abs(total - 1.0) > policy.trace_tol:
        raise BadPriors(f"priors sum to {total:.12g}, expected 1", "entries")
    dim = states[0].dim
    for i, s in enumerate(states):
        if not isinstance(s, DensityMatrix):
            raise BadState("not a DensityMatrix", f"entries[{i}].matrix")
        if s.dim != dim:
            raise DimensionMismatch(f"state has dim {s.dim}, expected {dim}", f"entries[{i}].matrix")


def make_ensemble(entries, policy=DEFAULT_POLICY):
    """Validated :class:`Ensemble` from ``(prior, state)`` pairs.

    States may be :class:`DensityMatrix` objects or raw matrices. Duplicate
    states are allowed.
    """
    entries = list(entries)
    priors = []
    states = []
    for i, (p, s) in enumerate(entries):
        priors.append(float(p))
        if not isinstance(s, DensityMatrix):
            try:
                s = DensityMatrix(s, policy)
            except ValidationError as exc:
                raise BadState(str(exc), f"entries[{i}].matrix") from None
        states.append(s)
    return Ensemble(tuple(priors), tuple(states))


def _draw_priors(rng, n, priors):
    if priors == "uniform":
        return [1.0 / n] * n
    if priors == "dirichlet":
        return list(rng.dirichlet(np.ones(n)))
    raise ValueError(f"unknown prior kind {priors!r}; use 'uniform' or 'dirichlet'")


def random_pure_state(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return DensityMatrix.pure(v)


def random_mixed_state(dim, rng):
    """Hilbert-Schmidt random state ``G G^dag / tr(G G^dag)``."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m / np.trace(m).real)


def random_pure_ensemble(n, dim, priors="uniform", seed=0):
    """``n`` Haar-random pure states of dimension ``dim``."""
    rng = make_rng(seed)
    ps = _draw_priors(rng, n, priors)
    return Ensemble(tuple(ps), tuple(random_pure_state(dim, rng) for _ in range(n)))


def random_mixed_ensemble(n, dim, priors="uniform", seed=0):
    """``n`` Hilbert-Schmidt random mixed states of dimension ``dim``."""
    rng = make_rng(seed)
    ps = _draw_priors(rng, n, priors)
    return Ensemble(tuple(ps), tuple(random_mixed_state(dim, rng) for _ in range(n)))


def random_ensemble(n, dim, kind="pure", priors="uniform", seed=0):
    if kind == "pure":
        return random_pure_ensemble(n, dim, priors, seed)
    if kind == "mixed":
        return random_mixed_ensemble(n, dim, priors, seed)
    raise ValueError(f"unknown state kind {kind!r}; use 'pure' or 'mixed'")


def tensor_power(e, m, policy=DEFAULT_POLICY):
    """The ensemble of ``m``-fold copies ``rho_i^{(x) m}`` with unchanged priors."""
    if m < 1:
        raise ValidationError(f"number of copies must be >= 1, got {m}")
    if e.dim**m > policy.size_cap:
        raise TooLarge(f"dimension {e.dim}^{m} = {e.dim ** m} exceeds the cap {policy.size_cap}")
    if m == 1:
        return e
    states = tuple(DensityMatrix(reduce(kron, [s.matrix] * m), policy) for s in e.states)
    return Ensemble(e.priors, states)


# --- file format ---------------------------------------------------------


def encode_matrix(m):
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(obj, where, dim=None):
    if not isinstance(obj, list) or not obj:
        raise ParseError("expected a non-empty list of rows", where)
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise ParseError("expected a list of [re, im] pairs", f"{where}[{i}]")
        out = []
        for j, z in enumerate(row):
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)
            ):
                raise ParseError("expected a [re, im] pair of numbers", f"{where}[{i}][{j}]")
            out.append(complex(z[0], z[1]))
        rows.append(out)
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"row has {len(row)} entries, expected {width}", f"{where}[{i}]")
    m = np.array(rows, dtype=np.complex128)
    if dim is not None and m.shape != (dim, dim):
        raise DimensionMismatch(f"matrix has shape {m.shape}, expected ({dim}, {dim})", where)
    return m


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None


def read_dim(doc):
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError("expected a positive integer", "dim")
    return dim


def ensemble_from_dict(doc, policy=DEFAULT_POLICY):
    dim = read_dim(doc)
    entries = doc.get("entries")
    if not isinstance(entries, list) or not entries:
        raise ParseError("expected a non-empty list", "entries")
    pairs = []
    for i, ent in enumerate(entries):
        if not isinstance(ent, dict):
            raise ParseError("expected an object", f"entries[{i}]")
        p = ent.get("prob")
        if not isinstance(p, (int, float)) or isinstance(p, bool):
            raise ParseError("expected a number", f"entries[{i}].prob")
        if "matrix" not in ent:
            raise ParseError("missing field", f"entries[{i}].matrix")
        pairs.append((p, decode_matrix(ent["matrix"], f"entries[{i}].matrix", dim)))
    return make_ensemble(pairs, policy)


def ensemble_to_dict(e):
    return {
        "dim": e.dim,
        "entries": [{"prob": float(p), "matrix": encode_matrix(s.matrix)} for p, s in e.entries],
    }


def load_ensemble(path, policy=DEFAULT_POLICY):
    """Read an ensemble file; raises :class:`ParseError` or :class:`ValidationError`."""
    return ensemble_from_dict(read_json(path), policy)


def save_ensemble(e, path):
    with open(path, "w") as fh:
        json.dump(ensemble_to_dict(e), fh)
        fh.write("\n")
