"""Truncated symmetric Fock space over d modes.

Occupation-number (bosonic) representation: a basis state is a tuple
(n_0, ..., n_{d-1}) of mode occupations.  A basis is either a fixed
total-number sector or the full space truncated at a maximal total occupation.

Ordering convention (fixes all file formats): states are grouped by total
occupation (ascending) and, within each sector, enumerated in descending
lexicographic order, so for d=2, total=2 the order is (2,0), (1,1), (0,2).

Smeared operators follow the linear-in-argument convention

    a(f)  = sum_p f_p a_p,      a*(f) = sum_p f_p a+_p,

so that [a(f), a*(g)] = sum_p f_p g_p with no complex conjugate, and the
adjoint of a*(f) is a(conj(f)).  The Weyl displacement is

    C(alpha) = exp(a*(alpha) - a(conj(alpha)))
             = exp(-|alpha|^2/2) exp(a*(alpha)) exp(-a(conj(alpha))),

applied factor by factor as a (terminating) power series on the truncated
basis; the result is exactly the projection of the untruncated image onto
the basis, so 1 - ||C(alpha) v||^2 is the exact truncation loss.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import comb
import json

import numpy as np
import scipy.sparse as sparse

from .errors import CapacityError, SectorError
from .modes import ModeSystem

DEFAULT_STATE_CAP = 5_000_000
HERMITICITY_TOL = 1e-12


def fixed(n):
    """Sector spec: all occupation tuples with total exactly n."""
    if n < 0:
        raise ValueError("fixed sector needs n >= 0")
    return ("fixed", int(n))


def truncated(n_max):
    """Sector spec: all occupation tuples with total <= n_max."""
    if n_max < 0:
        raise ValueError("truncated sector needs n_max >= 0")
    return ("truncated", int(n_max))


def sector_dimension(d, sector):
    kind, n = sector
    if kind == "fixed":
        return comb(n + d - 1, d - 1)
    if kind == "truncated":
        return comb(n + d, d)
    raise ValueError(f"unknown sector kind {kind!r}")


def _compositions(total, slots):
    """All occupation tuples with the given total, descending lexicographic."""
    if slots == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Occupation-number basis with a bijective tuple <-> index map."""

    d: int
    sector: tuple
    occs: np.ndarray          # (dim, d) int array, row i = occupation tuple i
    index: dict               # occupation tuple -> dense index
    totals: np.ndarray        # (dim,) total occupation per state
    sector_offsets: np.ndarray  # start offset of each total-occupation block

    @property
    def dim(self):
        return self.occs.shape[0]

    @property
    def n_max(self):
        return int(self.sector[1])

    def __eq__(self, other):
        return (
            isinstance(other, FockBasis)
            and self.d == other.d
            and self.sector == other.sector
        )

    def __hash__(self):
        return hash((self.d, self.sector))

    def index_of(self, occ):
        return self.index[tuple(int(x) for x in occ)]

    def sector_slice(self, n):
        """Contiguous slice of the states with total occupation n."""
        kind, cap = self.sector
        if kind == "fixed":
            if n != cap:
                raise SectorError(f"basis holds only sector {cap}, asked for {n}")
            return slice(0, self.dim)
        if not 0 <= n <= cap:
            raise SectorError(f"sector {n} outside truncation n_max={cap}")
        return slice(int(self.sector_offsets[n]), int(self.sector_offsets[n + 1]))


@lru_cache(maxsize=256)
def _enumerate_cached(d, sector, cap):
    dim = sector_dimension(d, sector)
    if dim > cap:
        raise CapacityError(
            f"basis (d={d}, sector={sector}) has {dim} states, cap is {cap}"
        )
    kind, n = sector
    rows = []
    offsets = [0]
    if kind == "fixed":
        rows.extend(_compositions(n, d))
        offsets.append(len(rows))
    else:
        for k in range(n + 1):
            rows.extend(_compositions(k, d))
            offsets.append(len(rows))
    occs = np.array(rows, dtype=np.int64)
    index = {tuple(int(x) for x in row): i for i, row in enumerate(rows)}
    totals = occs.sum(axis=1)
    return FockBasis(
        d=d,
        sector=sector,
        occs=occs,
        index=index,
        totals=totals,
        sector_offsets=np.array(offsets, dtype=np.int64),
    )


def enumerate_basis(d, sector, cap=DEFAULT_STATE_CAP):
    """Build (or fetch the cached) occupation basis for the given sector."""
    if d < 1:
        raise ValueError("need d >= 1 modes")
    kind, n = sector
    if kind not in ("fixed", "truncated"):
        raise ValueError(f"unknown sector kind {kind!r}")
    if n < 0:
        raise ValueError("sector size must be >= 0")
    return _enumerate_cached(int(d), (kind, int(n)), int(cap))


@dataclass
class FockVector:
    """Complex coefficient vector over a FockBasis."""

    basis: FockBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.basis.dim,):
            raise ValueError(
                f"coefficient vector has shape {c.shape}, basis dim {self.basis.dim}"
            )
        self.coeffs = c

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other):
        """<self, other> (antilinear in self)."""
        self._check_same_basis(other)
        return complex(np.vdot(self.coeffs, other.coeffs))

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.basis, self.coeffs / n)

    def sector_norms(self):
        """||P_n v|| for every total occupation n present in the basis."""
        w = np.abs(self.coeffs) ** 2
        out = np.bincount(self.basis.totals, weights=w, minlength=self.basis.n_max + 1)
        return np.sqrt(out)

    def copy(self):
        return FockVector(self.basis, self.coeffs.copy())

    def _check_same_basis(self, other):
        if self.basis != other.basis:
            raise SectorError("vectors live on different bases")

    def __add__(self, other):
        self._check_same_basis(other)
        return FockVector(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_same_basis(other)
        return FockVector(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return FockVector(self.basis, self.coeffs * scalar)

    __rmul__ = __mul__


def vacuum(basis):
    kind, _ = basis.sector
    if kind == "fixed" and basis.sector[1] != 0:
        raise SectorError("vacuum lives in sector 0")
    c = np.zeros(basis.dim, dtype=complex)
    c[basis.index_of((0,) * basis.d)] = 1.0
    return FockVector(basis, c)


def basis_state(basis, occ):
    """Unit vector on a single occupation tuple."""
    c = np.zeros(basis.dim, dtype=complex)
    c[basis.index_of(occ)] = 1.0
    return FockVector(basis, c)


@dataclass
class SparseOperator:
    """Sparse matrix acting on a FockBasis, with an optional Hermiticity pledge."""

    basis: FockBasis
    matrix: sparse.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        if self.matrix.shape != (self.basis.dim, self.basis.dim):
            raise ValueError("matrix shape does not match basis dimension")
        if self.hermitian:
            delta = (self.matrix - self.matrix.getH()).tocoo()
            if delta.nnz and np.max(np.abs(delta.data)) > HERMITICITY_TOL:
                raise ValueError("operator flagged Hermitian but is not (1e-12)")

    def apply(self, v):
        if v.basis != self.basis:
            raise SectorError("vector and operator bases differ")
        return FockVector(self.basis, self.matrix @ v.coeffs)

    def expectation(self, v):
        ev = complex(np.vdot(v.coeffs, self.matrix @ v.coeffs))
        return ev.real if self.hermitian else ev

    def to_dense(self):
        return self.matrix.toarray()


# ---------------------------------------------------------------------------
# ladder operators


def _ladder_target_basis(kind, basis):
    bkind, n = basis.sector
    if bkind == "truncated":
        return basis
    if kind == "annihilate":
        if n == 0:
            raise SectorError("cannot annihilate on the fixed(0) sector")
        return enumerate_basis(basis.d, fixed(n - 1))
    return enumerate_basis(basis.d, fixed(n + 1))


def ladder_matrix(kind, p, basis):
    """Sparse matrix of a_p or a+_p; returns (matrix, output_basis).

    Matrix elements: <..., n_p - 1, ...| a_p |..., n_p, ...> = sqrt(n_p).
    On a truncated basis the creation operator drops amplitudes that would
    exceed n_max; on a fixed sector the output lives in the adjacent sector.
    """
    if kind not in ("create", "annihilate"):
        raise ValueError(f"ladder kind must be create|annihilate, got {kind!r}")
    if not 0 <= p < basis.d:
        raise ValueError(f"mode index {p} out of range for d={basis.d}")
    out = _ladder_target_basis(kind, basis)
    occs = basis.occs
    rows, cols, vals = [], [], []
    if kind == "annihilate":
        src = np.nonzero(occs[:, p] > 0)[0]
        for i in src:
            occ = occs[i].copy()
            amp = np.sqrt(occ[p])
            occ[p] -= 1
            rows.append(out.index_of(occ))
            cols.append(i)
            vals.append(amp)
    else:
        cap = basis.n_max if basis.sector[0] == "truncated" else None
        totals = basis.totals
        for i in range(basis.dim):
            if cap is not None and totals[i] + 1 > cap:
                continue
            occ = occs[i].copy()
            amp = np.sqrt(occ[p] + 1.0)
            occ[p] += 1
            rows.append(out.index_of(occ))
            cols.append(i)
            vals.append(amp)
    mat = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(out.dim, basis.dim), dtype=complex
    )
    return mat, out


def ladder_apply(kind, p, v):
    """Apply a single-mode ladder operator to a vector."""
    mat, out = ladder_matrix(kind, p, v.basis)
    return FockVector(out, mat @ v.coeffs)


def field_matrix(kind, f, basis):
    """Matrix of a(f) = sum_p f_p a_p or a*(f) = sum_p f_p a+_p (linear in f)."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (basis.d,):
        raise ValueError(f"smearing vector must have length d={basis.d}")
    total = None
    out = None
    for p in range(basis.d):
        if f[p] == 0:
            continue
        mat, out_p = ladder_matrix(kind, p, basis)
        term = f[p] * mat
        total = term if total is None else total + term
        out = out_p
    if total is None:  # f == 0
        out = _ladder_target_basis(kind, basis)
        total = sparse.csr_matrix((out.dim, basis.dim), dtype=complex)
    return total, out


def field_apply(kind, f, v):
    """Apply the smeared operator a(f) or a*(f) to a vector."""
    mat, out = field_matrix(kind, f, v.basis)
    return FockVector(out, mat @ v.coeffs)


# ---------------------------------------------------------------------------
# second quantization and the Hamiltonian


def second_quantize(A, basis):
    """dGamma(A) = sum_pq A_pq a+_p a_q on the given basis.

    dGamma(1) is the total number operator; any A commutes with N here since
    hopping conserves the total occupation.
    """
    A = np.asarray(A, dtype=complex)
    d = basis.d
    if A.shape != (d, d):
        raise ValueError(f"one-particle matrix must be {d}x{d}")
    hermitian = bool(np.max(np.abs(A - A.conj().T)) <= HERMITICITY_TOL)
    occs = basis.occs
    rows, cols, vals = [], [], []
    for i in range(basis.dim):
        occ = occs[i]
        for q in range(d):
            nq = occ[q]
            if nq == 0:
                continue
            for p in range(d):
                if A[p, q] == 0:
                    continue
                if p == q:
                    rows.append(i)
                    cols.append(i)
                    vals.append(A[p, p] * nq)
                else:
                    amp = np.sqrt(nq * (occ[p] + 1.0))
                    tgt = occ.copy()
                    tgt[q] -= 1
                    tgt[p] += 1
                    rows.append(basis.index_of(tgt))
                    cols.append(i)
                    vals.append(A[p, q] * amp)
    mat = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=complex
    )
    return SparseOperator(basis=basis, matrix=mat, hermitian=hermitian)


def number_operator(basis):
    """N = dGamma(1), diagonal in the occupation basis."""
    mat = sparse.diags(basis.totals.astype(complex)).tocsr()
    return SparseOperator(basis=basis, matrix=mat, hermitian=True)


def build_hamiltonian(ms: ModeSystem, n_scale, basis):
    """H = dGamma(h) + (1/2n) sum_pq v(p,q) a+_p a+_q a_q a_p.

    The interaction is diagonal in the occupation basis:
    a+_p a+_q a_q a_p |occ> = occ_p * occ_q |occ> for p != q and
    occ_p (occ_p - 1) |occ> for p == q.
    """
    if ms.d != basis.d:
        raise ValueError("mode system and basis disagree on d")
    if n_scale < 1:
        raise ValueError("n_scale must be >= 1")
    H = second_quantize(ms.h, basis).matrix.tolil()
    occ = basis.occs.astype(float)
    quad = np.einsum("ip,pq,iq->i", occ, ms.v, occ) - occ @ np.diag(ms.v)
    diag = quad / (2.0 * n_scale)
    H.setdiag(H.diagonal() + diag)
    return SparseOperator(basis=basis, matrix=H.tocsr(), hermitian=True)


# ---------------------------------------------------------------------------
# Weyl displacement


def weyl_headroom(alpha_norm):
    """Recommended n_max so the displaced-state tail above it is < 1e-10."""
    a = float(alpha_norm)
    return int(np.ceil(a * a + 8.0 * a + 16.0))


def _exp_series_apply(mat, coeffs, sign, n_terms_cap):
    """exp(sign * mat) @ coeffs with a terminating power series."""
    acc = coeffs.copy()
    term = coeffs.copy()
    for k in range(1, n_terms_cap + 2):
        term = (sign / k) * (mat @ term)
        acc += term
        tn = np.linalg.norm(term)
        if tn == 0.0 or tn < 1e-18 * np.linalg.norm(acc):
            break
    return acc


def weyl_apply(alpha, v):
    """Apply the displacement C(alpha); returns (vector, truncation_loss).

    Requires a truncated basis (displacement does not conserve particle
    number).  The loss reported is 1 - ||C(alpha) v||^2 relative to a unit
    input, which equals the probability mass pushed above the truncation.
    """
    basis = v.basis
    if basis.sector[0] != "truncated":
        raise SectorError("Weyl displacement needs a truncated basis")
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (basis.d,):
        raise ValueError(f"alpha must have length d={basis.d}")
    n_max = basis.n_max
    a2 = float(np.vdot(alpha, alpha).real)
    if a2 == 0.0 or v.norm() == 0.0:
        return v.copy(), 0.0
    ann, _ = field_matrix("annihilate", np.conj(alpha), basis)
    cre, _ = field_matrix("create", alpha, basis)
    w = _exp_series_apply(ann, v.coeffs, -1.0, n_max)
    w = _exp_series_apply(cre, w, 1.0, n_max)
    w *= np.exp(-a2 / 2.0)
    out = FockVector(basis, w)
    loss = 1.0 - (out.norm() ** 2) / (v.norm() ** 2)
    return out, max(loss, 0.0)


def sector_project(n, v):
    """P_n: zero every coefficient outside total occupation n."""
    basis = v.basis
    kind, cap = basis.sector
    if kind != "truncated":
        raise SectorError("sector projection is defined on truncated bases")
    if not 0 <= n <= cap:
        raise SectorError(f"sector {n} not contained in truncation n_max={cap}")
    c = np.zeros_like(v.coeffs)
    sl = basis.sector_slice(n)
    c[sl] = v.coeffs[sl]
    return FockVector(basis, c)


# ---------------------------------------------------------------------------
# debugging dumps (documented JSON layout: occupations as integer arrays,
# complex coefficients as [re, im] pairs)


def _c2pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def dump_basis_json(basis, path=None):
    doc = {
        "d": basis.d,
        "sector": {"kind": basis.sector[0], "n": basis.sector[1]},
        "states": basis.occs.tolist(),
    }
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
    return doc


def dump_vector_json(v, path=None):
    doc = dump_basis_json(v.basis)
    doc = {"basis": doc, "coeffs": [_c2pair(z) for z in v.coeffs]}
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
    return doc


def dump_operator_json(op, path=None):
    coo = op.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    entries = [
        [int(coo.row[k]), int(coo.col[k]), _c2pair(coo.data[k])] for k in order
    ]
    doc = {
        "basis": dump_basis_json(op.basis),
        "hermitian": bool(op.hermitian),
        "entries": entries,
    }
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
    return doc
