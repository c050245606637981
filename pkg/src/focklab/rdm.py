"""One-particle reduced density matrices, distances, and mixture targets.

On the mode basis the transition matrix is T_pq = <v, a+_p a_q v>; the
reduced density matrix follows the kernel convention rho(x; y) = T(y, x)/Tr T,
i.e. as matrices rho = T^T / <N>.  The trace of T equals <N>, so rho has unit
trace for states with and without a fixed particle number alike.  Distances
between Hermitian matrices use the eigenvalues of the difference:
trace norm = sum |lam|, Hilbert-Schmidt = sqrt(sum lam^2), operator = max |lam|.
"""

import json
from dataclasses import dataclass

import numpy as np

from .fock import FockVector, ladder_matrix

HERMITICITY_TOL = 1e-12
PSD_FLOOR = -1e-10
TRACE_TOL = 1e-10


@dataclass
class OneParticleDM:
    """d x d Hermitian, positive, trace-one matrix plus its raw trace <N>."""

    rho: np.ndarray
    trace_raw: float

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
            raise ValueError("reduced density matrix is not Hermitian to 1e-12")
        evals = np.linalg.eigvalsh(rho)
        if evals.min() < PSD_FLOOR:
            raise ValueError(
                f"reduced density matrix has eigenvalue {evals.min():.3e} "
                f"below the PSD floor {PSD_FLOOR}"
            )
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
            raise ValueError("reduced density matrix does not have unit trace")
        self.rho = rho

    @property
    def d(self):
        return self.rho.shape[0]

    def to_json(self, path=None):
        """Hermitian-packed layout: real diagonal plus upper triangle [re, im]."""
        d = self.d
        upper = []
        for p in range(d):
            for q in range(p + 1, d):
                upper.append([float(self.rho[p, q].real), float(self.rho[p, q].imag)])
        doc = {
            "d": d,
            "diag": [float(self.rho[p, p].real) for p in range(d)],
            "upper": upper,
            "trace_raw": float(self.trace_raw),
        }
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(doc, fh)
        return doc


def transition_matrix(v: FockVector):
    """T_pq = <v, a+_p a_q v> = <a_p v, a_q v>; Hermitian with trace <N>."""
    basis = v.basis
    d = basis.d
    if basis.sector == ("fixed", 0):
        return np.zeros((d, d), dtype=complex)
    lowered = []
    for p in range(d):
        mat, _ = ladder_matrix("annihilate", p, basis)
        lowered.append(mat @ v.coeffs)
    W = np.stack(lowered, axis=1)  # columns a_p v
    return W.conj().T @ W


def reduced_dm(v: FockVector):
    """Normalized one-particle reduced density matrix of a Fock vector."""
    T = transition_matrix(v)
    tr = float(np.trace(T).real)
    if tr <= 0:
        raise ValueError("vacuum input: <N> = 0, no reduced density matrix")
    return OneParticleDM(rho=T.T / tr, trace_raw=tr)


def distance(rho1, rho2, norm="trace"):
    """Distance between two density matrices in the chosen norm.

    Accepts OneParticleDM or plain Hermitian arrays; norms satisfy
    operator <= hilbert_schmidt <= trace, and trace <= 2 * hilbert_schmidt
    whenever one argument is a rank-one projection.
    """
    a = rho1.rho if isinstance(rho1, OneParticleDM) else np.asarray(rho1)
    b = rho2.rho if isinstance(rho2, OneParticleDM) else np.asarray(rho2)
    if a.shape != b.shape:
        raise ValueError("density matrices have different dimensions")
    evals = np.linalg.eigvalsh(a - b)
    if norm == "trace":
        return float(np.sum(np.abs(evals)))
    if norm == "hilbert_schmidt":
        return float(np.sqrt(np.sum(evals**2)))
    if norm == "operator":
        return float(np.max(np.abs(evals)))
    raise ValueError(f"unknown norm {norm!r}")


def mixed_target(weights, phis):
    """sum_i w_i |phi_i><phi_i| for nonnegative weights summing to one."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    if abs(np.sum(weights) - 1.0) > 1e-10:
        raise ValueError("weights must sum to 1 within 1e-10")
    phis = [np.asarray(p, dtype=complex) for p in phis]
    if len(phis) != len(weights):
        raise ValueError("need one state per weight")
    d = len(phis[0])
    rho = np.zeros((d, d), dtype=complex)
    for w, p in zip(weights, phis):
        if abs(np.linalg.norm(p) - 1.0) > 1e-10:
            raise ValueError("mixture components must be unit vectors")
        rho += w * np.outer(p, p.conj())
    return OneParticleDM(rho=rho, trace_raw=1.0)


def projector(phi):
    """|phi><phi| as a OneParticleDM."""
    return mixed_target([1.0], [phi])
