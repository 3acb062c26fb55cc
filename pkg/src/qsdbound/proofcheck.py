"""Numerical checks of the block-matrix argument behind the fidelity lower bound.

Weighted states ``p_i rho_i = S_i S_i^dag`` and POVM elements
``mu_i = N_i N_i^dag`` are factored through scaled eigenvectors. Writing the
factors in a row gives ``S`` and ``N`` with ``N N^dag = I``, and
``A = N^dag S`` has ``A^dag A = S^dag S``. Everything the argument uses is
exposed as a residual (should be ~0) or a signed slack (should be >= 0):

* ``||A_ij||_2^2 = p_j tr(mu_i rho_j)`` and ``||(S^dag S)_ij||_1^2 = p_i p_j F``
* the four-matrix inequality
  ``||AB + CD||_1^2 <= (||A||_2^2 + ||D||_2^2)(||B||_2^2 + ||C||_2^2)``
* the row-partition inequality ``||(M_1 ... M_n)||_1^2 >= sum_i ||M_i||_1^2``
* the per-row super-block chain and the final bound.

Every block of ``S`` and ``N`` is padded to exactly ``dim`` columns, and
eigenvalues below 1e-12 give zero columns, so block shapes never depend on
numerical rank.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bounds import montanaro_lower, pairwise_fidelities
from .errors import DimensionMismatch
from .linalg import DEFAULT_POLICY, as_matrix, frobenius_norm, hermitian_eig, polar_decompose, schatten_norm, trace_norm
from .measurement import _check_pair, error_probability, outcome_probabilities

ZERO_EIG = 1e-12


@dataclass(frozen=True)
class BlockMatrix:
    """A dense matrix cut into a grid of equally shaped blocks."""

    dense: np.ndarray
    block_rows: int
    block_cols: int

    def __post_init__(self):
        r, c = self.dense.shape
        if r % self.block_rows or c % self.block_cols:
            raise DimensionMismatch(f"shape {self.dense.shape} does not split into "
                                    f"{self.block_rows}x{self.block_cols} blocks")

    @property
    def block_dim(self):
        r, c = self.dense.shape
        return r // self.block_rows, c // self.block_cols

    def block(self, i, j):
        br, bc = self.block_dim
        return self.dense[i * br:(i + 1) * br, j * bc:(j + 1) * bc]

    @property
    def blocks(self):
        return [[self.block(i, j) for j in range(self.block_cols)] for i in range(self.block_rows)]

    @classmethod
    def from_blocks(cls, grid):
        return cls(np.block([[as_matrix(b) for b in row] for row in grid]), len(grid), len(grid[0]))

    @property
    def H(self):
        return BlockMatrix(self.dense.conj().T, self.block_cols, self.block_rows)

    def __matmul__(self, other):
        return BlockMatrix(self.dense @ other.dense, self.block_rows, other.block_cols)


def factor_psd(m, policy=DEFAULT_POLICY):
    """``dim x dim`` matrix ``F`` with ``F F^dag = m``: columns ``sqrt(lambda_j) v_j``.

    Columns are in descending eigenvalue order; eigenvalues below 1e-12 give
    zero columns.
    """
    lam, v = hermitian_eig(m, policy)
    lam, v = lam[::-1], v[:, ::-1]
    scale = np.where(lam > ZERO_EIG, np.sqrt(np.clip(lam, 0.0, None)), 0.0)
    return v * scale


def build_state_matrix(e, policy=DEFAULT_POLICY):
    """``S = (S_1 ... S_n)`` with ``S_i S_i^dag = p_i rho_i``."""
    return BlockMatrix(np.hstack([factor_psd(w, policy) for w in e.weighted()]), 1, e.n)


def build_measurement_matrix(m, policy=DEFAULT_POLICY):
    """``N = (N_1 ... N_n)`` with ``N_i N_i^dag = mu_i``, hence ``N N^dag = I``."""
    return BlockMatrix(np.hstack([factor_psd(mu, policy) for mu in m.operators]), 1, m.n)


def build_A(m, e, policy=DEFAULT_POLICY):
    """``A = N^dag S`` as an ``n x n`` grid of ``dim x dim`` blocks."""
    _check_pair(m, e)
    return build_measurement_matrix(m, policy).H @ build_state_matrix(e, policy)


def _block_view(x, n):
    return BlockMatrix(x, n, n)


def check_gram_identity(m, e, policy=DEFAULT_POLICY):
    """``||A^dag A - S^dag S||_2``."""
    a = build_A(m, e, policy).dense
    s = build_state_matrix(e, policy).dense
    return frobenius_norm(a.conj().T @ a - s.conj().T @ s)


def block_probability_residual(m, e, policy=DEFAULT_POLICY):
    """``max_ij | ||A_ij||_2^2 - p_j tr(mu_i rho_j) |``."""
    a = build_A(m, e, policy)
    probs = outcome_probabilities(m, e)
    sq = np.array([[frobenius_norm(a.block(i, j)) ** 2 for j in range(e.n)] for i in range(e.n)])
    return float(np.abs(sq - probs).max())


def block_fidelity_residual(e, policy=DEFAULT_POLICY):
    """``max_{i>j} | ||(S^dag S)_ij||_1^2 - p_i p_j F(rho_i, rho_j) |``."""
    s = build_state_matrix(e, policy).dense
    g = _block_view(s.conj().T @ s, e.n)
    fid = pairwise_fidelities(e, policy)
    worst = 0.0
    for i in range(e.n):
        for j in range(i):
            lhs = trace_norm(g.block(i, j), policy) ** 2
            worst = max(worst, abs(lhs - e.priors[i] * e.priors[j] * fid[i, j]))
    return worst


def _square(*mats):
    for x in mats:
        x = as_matrix(x)
        if x.shape[0] != x.shape[1] or x.shape != as_matrix(mats[0]).shape:
            raise DimensionMismatch("all four matrices must be square and of the same size")


def lemma1_slack(a, b, c, d, policy=DEFAULT_POLICY):
    """``(||a||_2^2 + ||d||_2^2)(||b||_2^2 + ||c||_2^2) - ||ab + cd||_1^2``."""
    _square(a, b, c, d)
    a, b, c, d = map(as_matrix, (a, b, c, d))
    rhs = (frobenius_norm(a) ** 2 + frobenius_norm(d) ** 2) * (frobenius_norm(b) ** 2 + frobenius_norm(c) ** 2)
    return rhs - trace_norm(a @ b + c @ d, policy) ** 2


class Lemma1Chain(NamedTuple):
    lhs: float  # ||ab + cd||_1
    rotated: float  # ||a b u^dag + u d^dag c^dag||_1 after cd = p u
    stacked: float  # same matrix written as a product of block rows
    cauchy_schwarz: float  # ||aa^dag + u d^dag d u^dag||_1 ||u b^dag b u^dag + cc^dag||_1
    triangle: float  # (||aa^dag||_1 + ||d^dag d||_1)(||b^dag b||_1 + ||cc^dag||_1)
    rhs: float  # (||a||_2^2 + ||d||_2^2)(||b||_2^2 + ||c||_2^2)


def lemma1_chain(a, b, c, d, policy=DEFAULT_POLICY):
    """Each quantity in the polar-decomposition proof of the four-matrix bound.

    Expect ``lhs == rotated == stacked``, ``stacked**2 <= cauchy_schwarz
    <= triangle == rhs``.
    """
    _square(a, b, c, d)
    a, b, c, d = map(as_matrix, (a, b, c, d))
    tn = lambda x: trace_norm(x, policy)
    _, u = polar_decompose(c @ d, policy)
    ud = u.conj().T
    rotated = a @ b @ ud + u @ d.conj().T @ c.conj().T
    x = np.hstack([a, u @ d.conj().T])
    y = np.vstack([b @ ud, c.conj().T])
    return Lemma1Chain(
        lhs=tn(a @ b + c @ d),
        rotated=tn(rotated),
        stacked=tn(x @ y),
        cauchy_schwarz=tn(x @ x.conj().T) * tn(y.conj().T @ y),
        triangle=(tn(a @ a.conj().T) + tn(u @ d.conj().T @ d @ ud)) * (tn(u @ b.conj().T @ b @ ud) + tn(c @ c.conj().T)),
        rhs=(frobenius_norm(a) ** 2 + frobenius_norm(d) ** 2) * (frobenius_norm(b) ** 2 + frobenius_norm(c) ** 2),
    )


def _row(blocks):
    blocks = [as_matrix(b) for b in blocks]
    if len({b.shape[0] for b in blocks}) != 1:
        raise DimensionMismatch("blocks must have the same number of rows")
    return blocks


def lemma2_slack(blocks, policy=DEFAULT_POLICY):
    """``||(M_1 ... M_n)||_1^2 - sum_i ||M_i||_1^2``."""
    blocks = _row(blocks)
    whole = trace_norm(np.hstack(blocks), policy) ** 2
    return whole - sum(trace_norm(b, policy) ** 2 for b in blocks)


class Lemma2Chain(NamedTuple):
    whole: float  # ||M||_1^2
    gram_half: float  # ||sum_i N_i N_i^dag||_{1/2}
    parts_half: float  # sum_i ||N_i N_i^dag||_{1/2}
    parts: float  # sum_i ||M_i||_1^2
    gram_residual: float  # ||M M^dag - sum_i N_i N_i^dag||_2


def lemma2_chain(blocks, policy=DEFAULT_POLICY):
    """Quantities in the quasi-norm proof of the row-partition bound.

    ``N_i`` is ``M`` with every block but the ``i``-th zeroed. The Gram
    matrix that splits over the blocks is ``M M^dag = sum_i N_i N_i^dag``
    (``M^dag M`` does not: its off-diagonal blocks ``M_i^dag M_j`` survive).
    Expect ``whole == gram_half >= parts_half == parts`` and a zero
    ``gram_residual``.
    """
    blocks = _row(blocks)
    full = np.hstack(blocks)
    grams = []
    offset = 0
    for b in blocks:
        ni = np.zeros_like(full)
        ni[:, offset:offset + b.shape[1]] = b
        grams.append(ni @ ni.conj().T)
        offset += b.shape[1]
    total = sum(grams)
    return Lemma2Chain(
        whole=trace_norm(full, policy) ** 2,
        gram_half=schatten_norm(total, 0.5, policy),
        parts_half=sum(schatten_norm(g, 0.5, policy) for g in grams),
        parts=sum(trace_norm(b, policy) ** 2 for b in blocks),
        gram_residual=frobenius_norm(full @ full.conj().T - total),
    )


def theorem1_slack(m, e):
    """``P_E(m, e)`` minus the fidelity lower bound; never negative in exact arithmetic."""
    _check_pair(m, e)
    return error_probability(m, e) - montanaro_lower(e)


class RowChain(NamedTuple):
    row: int
    gram_blocks: float  # sum_{i != row} ||(A^dag A)_{row,i}||_1^2
    t_norm: float  # ||T||_1^2, T the block row of A^dag A without its diagonal block
    b_product: float  # ||B11^dag B12 + B21^dag B22||_1^2
    lemma1_rhs: float  # (||B11||_2^2 + ||B22||_2^2)(||B12||_2^2 + ||B21||_2^2)
    off_mass: float  # ||B12||_2^2 + ||B21||_2^2
    row_mass: float  # sum_{i != row} ||A_{row,i}||_2^2 + ||A_{i,row}||_2^2
    total_mass: float  # sum_ij ||B_ij||_2^2

    def slack(self):
        """Smallest signed gap along ``gram_blocks <= t_norm == b_product <= lemma1_rhs <= off_mass``."""
        return min(
            self.t_norm - self.gram_blocks,
            -abs(self.b_product - self.t_norm),
            self.lemma1_rhs - self.b_product,
            self.off_mass - self.lemma1_rhs,
            -abs(self.off_mass - self.row_mass),
            self.row_mass - self.gram_blocks,
        )


def row_chain(m, e, row, policy=DEFAULT_POLICY):
    """The super-block argument for one block row of ``A``.

    Rows and columns of ``A`` are permuted so that ``row`` comes first; the
    2x2 super-block matrix ``B`` has every block zero-padded to
    ``(n-1) dim`` square, the larger of the two super-block sizes.
    """
    n, d = e.n, e.dim
    a = build_A(m, e, policy)
    order = [row] + [k for k in range(n) if k != row]
    perm = np.concatenate([np.arange(k * d, (k + 1) * d) for k in order])
    ap = a.dense[np.ix_(perm, perm)]
    k = max(d, (n - 1) * d)
    pad = lambda x: np.pad(x, ((0, k - x.shape[0]), (0, k - x.shape[1])))
    b11, b12 = pad(ap[:d, :d]), pad(ap[:d, d:])
    b21, b22 = pad(ap[d:, :d]), pad(ap[d:, d:])
    gram = ap.conj().T @ ap
    t = gram[:d, d:]
    rest = [t[:, j * d:(j + 1) * d] for j in range(n - 1)]
    sq = lambda x: frobenius_norm(x) ** 2
    blocks = a.blocks
    return RowChain(
        row=row,
        gram_blocks=sum(trace_norm(x, policy) ** 2 for x in rest),
        t_norm=trace_norm(t, policy) ** 2 if n > 1 else 0.0,
        b_product=trace_norm(b11.conj().T @ b12 + b21.conj().T @ b22, policy) ** 2,
        lemma1_rhs=(sq(b11) + sq(b22)) * (sq(b12) + sq(b21)),
        off_mass=sq(b12) + sq(b21),
        row_mass=sum(sq(blocks[row][i]) + sq(blocks[i][row]) for i in range(n) if i != row),
        total_mass=sq(b11) + sq(b12) + sq(b21) + sq(b22),
    )


def row_inequalities(m, e, policy=DEFAULT_POLICY):
    """:func:`row_chain` for every block row."""
    return [row_chain(m, e, r, policy) for r in range(e.n)]
