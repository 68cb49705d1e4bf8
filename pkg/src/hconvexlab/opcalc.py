"""Real symmetric operator calculus on small dense matrices.

Spectral decomposition is a hand-rolled cyclic Jacobi sweep (dimension is
capped at 64, where Jacobi's orthogonality guarantees beat any speed
argument).  On top of it sit the functional calculus f(A) = Q f(L) Q^T,
quadratic forms <Ax, x>, spectrum containment checks, and the operator
Jensen verifiers

    classical    f(<Ax,x>) <= <f(A)x,x>
    per-lambda   f(<Ax,x>) <= (h(lam)/lam) <f(A)x,x>
    infimum      f(<Ax,x>) <= M_(0,1)(h) <f(A)x,x>
    half-bound   f(<Ax,x>) <= 2 h(1/2) <f(A)x,x>

A verifier never raises on a negative margin: the signed margin is the
result, and falsification treats violations as data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError, DimensionMismatch, SpectrumDomainError,
)
from .funclib import Interval, ScalarFunction, evaluate, evaluate_array

logger = logging.getLogger(__name__)

DIM_CAP = 64
JACOBI_MAX_SWEEPS = 100
JACOBI_REL_TOL = 1e-12
SPECTRUM_SLACK = 1e-12

JENSEN_MODES = ("classical", "per-lambda", "infimum", "half-bound")


# ---------------------------------------------------------------------------
# Matrices and vectors
# ---------------------------------------------------------------------------

class SymmetricMatrix:
    """Dense real symmetric matrix; one triangle is authoritative.

    Construction mirrors the lower triangle, so entries[i][j] == entries[j][i]
    holds exactly afterwards.  Input asymmetry beyond 1e-12*(1+max|a|) is
    rejected rather than silently repaired.
    """

    __slots__ = ("_a", "_decomp")

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        n = a.shape[0]
        if n < 1:
            raise ValueError("matrix dimension must be at least 1")
        if n > DIM_CAP:
            raise ValueError(f"dimension {n} exceeds cap {DIM_CAP}")
        if not np.isfinite(a).all():
            raise ValueError("matrix entries must be finite")
        scale = 1.0 + float(np.abs(a).max(initial=0.0))
        asym = float(np.abs(a - a.T).max(initial=0.0))
        if asym > 1e-12 * scale:
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:g})")
        lower = np.tril(a)
        a = lower + np.tril(a, -1).T
        a.flags.writeable = False
        self._a = a
        self._decomp = None

    @classmethod
    def diagonal(cls, values) -> "SymmetricMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._a

    def decomposition(self) -> "SpectralDecomposition":
        if self._decomp is None:
            self._decomp = spectral_decompose(self)
        return self._decomp

    def __repr__(self):
        return f"SymmetricMatrix(dim={self.dim})"


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues ascending; eigenvectors are the matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


class UnitVector:
    """Euclidean unit vector; non-unit input is normalized (and noted)."""

    __slots__ = ("_x", "renormalized")

    def __init__(self, components):
        x = np.array(components, dtype=float).ravel()
        if x.size < 1:
            raise ValueError("vector must have at least one component")
        if not np.isfinite(x).all():
            raise ValueError("vector components must be finite")
        norm = float(np.linalg.norm(x))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        self.renormalized = abs(norm - 1.0) > 1e-12
        if self.renormalized:
            logger.debug("renormalizing input vector (norm deviation %.3e)",
                         norm - 1.0)
            x = x / norm
        x.flags.writeable = False
        self._x = x

    @property
    def dim(self) -> int:
        return self._x.size

    @property
    def components(self) -> np.ndarray:
        return self._x


# ---------------------------------------------------------------------------
# Cyclic Jacobi eigensolver
# ---------------------------------------------------------------------------

def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def spectral_decompose(A: SymmetricMatrix) -> SpectralDecomposition:
    """Cyclic Jacobi diagonalization, eigenvalues sorted ascending.

    Stops when the off-diagonal Frobenius norm drops below 1e-12 * ||A||_F,
    or raises ConvergenceError after 100 full sweeps.
    """
    a = np.array(A.entries, dtype=float)
    n = a.shape[0]
    q = np.eye(n)
    tol = JACOBI_REL_TOL * float(np.linalg.norm(a))
    converged = n == 1 or _offdiag_norm(a) <= tol
    for _ in range(JACOBI_MAX_SWEEPS):
        if converged:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if apr == 0.0:
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                if abs(theta) > 1e10:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = math.copysign(1.0, theta) / (
                        abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_r = a[:, p].copy(), a[:, r].copy()
                a[:, p] = c * col_p - s * col_r
                a[:, r] = s * col_p + c * col_r
                row_p, row_r = a[p, :].copy(), a[r, :].copy()
                a[p, :] = c * row_p - s * row_r
                a[r, :] = s * row_p + c * row_r
                a[p, r] = a[r, p] = 0.0
                qp, qr = q[:, p].copy(), q[:, r].copy()
                q[:, p] = c * qp - s * qr
                q[:, r] = s * qp + c * qr
        converged = _offdiag_norm(a) <= tol
    if not converged:
        raise ConvergenceError(
            f"Jacobi sweep cap {JACOBI_MAX_SWEEPS} hit with off-diagonal "
            f"norm {_offdiag_norm(a):g} above tolerance {tol:g}")
    eigs = np.diag(a).copy()
    order = np.argsort(eigs, kind="stable")
    return SpectralDecomposition(eigs[order], q[:, order])


# ---------------------------------------------------------------------------
# Functional calculus and forms
# ---------------------------------------------------------------------------

def _clamped_spectrum(f: ScalarFunction, eigs: np.ndarray):
    """Pull eigenvalues within slack of a closed endpoint onto it.

    Returns (clamped eigenvalues, offenders beyond slack).
    """
    dom = f.domain
    out = eigs.copy()
    if math.isfinite(dom.lo) and not dom.lo_open:
        near = (out < dom.lo) & (out >= dom.lo - SPECTRUM_SLACK)
        out[near] = dom.lo
    if math.isfinite(dom.hi) and not dom.hi_open:
        near = (out > dom.hi) & (out <= dom.hi + SPECTRUM_SLACK)
        out[near] = dom.hi
    offenders = out[~dom.contains_array(out)]
    return out, offenders


def apply_function(f: ScalarFunction, A: SymmetricMatrix) -> SymmetricMatrix:
    """Functional calculus f(A) = Q f(L) Q^T."""
    dec = A.decomposition()
    eigs, offenders = _clamped_spectrum(f, dec.eigenvalues)
    if offenders.size:
        raise SpectrumDomainError(
            f"{f.label()}: {offenders.size} eigenvalue(s) outside domain "
            f"{f.domain}", offending=tuple(float(t) for t in offenders))
    q = dec.eigenvectors
    mat = (q * evaluate_array(f, eigs)) @ q.T
    return SymmetricMatrix((mat + mat.T) / 2.0)


def quadratic_form(A: SymmetricMatrix, x: UnitVector) -> float:
    """<Ax, x> = x^T A x."""
    if A.dim != x.dim:
        raise DimensionMismatch(
            f"matrix dim {A.dim} does not match vector dim {x.dim}")
    xv = x.components
    return float(xv @ A.entries @ xv)


def spectrum_in(A: SymmetricMatrix, I: Interval):
    """(contained, offending eigenvalues); 1e-12 slack at closed endpoints."""
    eigs = A.decomposition().eigenvalues
    lo_ok = (eigs > I.lo) if I.lo_open else (eigs >= I.lo - SPECTRUM_SLACK)
    hi_ok = (eigs < I.hi) if I.hi_open else (eigs <= I.hi + SPECTRUM_SLACK)
    bad = eigs[~(lo_ok & hi_ok)]
    return bad.size == 0, tuple(float(t) for t in bad)


# ---------------------------------------------------------------------------
# Operator Jensen verifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JensenVerdict:
    """One signed comparison f(<Ax,x>) vs factor * <f(A)x,x>.

    margin = rhs - lhs; its sign is the finding, never an error.
    """

    lhs: float
    rhs_factor: float
    rhs: float
    margin: float
    mode: str
    lam: float | None = None
    expectation: float | None = None  # <f(A)x,x>

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs_factor": self.rhs_factor,
                "rhs": self.rhs, "margin": self.margin, "mode": self.mode,
                "lambda": self.lam, "expectation": self.expectation}


def jensen_verify(f: ScalarFunction, h: ScalarFunction | None,
                  A: SymmetricMatrix, x: UnitVector, mode: str,
                  lam: float | None = None,
                  coefficient=None) -> JensenVerdict:
    """Evaluate one operator Jensen comparison in the requested mode.

    ``coefficient`` may carry a precomputed JensenCoefficient for the
    infimum mode; otherwise M_(0,1)(h) is computed here.
    """
    if mode not in JENSEN_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {JENSEN_MODES}")
    if mode != "classical" and h is None:
        raise ValueError(f"mode {mode!r} requires a weight function h")

    qf = quadratic_form(A, x)
    dec = A.decomposition()
    # <Ax,x> lives in [eig_min, eig_max] up to roundoff; clamp the drift
    qf = min(max(qf, float(dec.eigenvalues[0])), float(dec.eigenvalues[-1]))
    clamped, offenders = _clamped_spectrum(f, np.array([qf]))
    if offenders.size:
        raise SpectrumDomainError(
            f"{f.label()}: <Ax,x>={qf!r} outside domain {f.domain}",
            offending=(qf,))
    lhs = evaluate(f, float(clamped[0]))
    expectation = quadratic_form(apply_function(f, A), x)

    if mode == "classical":
        factor = 1.0
    elif mode == "per-lambda":
        if lam is None or not 0.0 < lam < 1.0:
            raise ValueError(f"per-lambda mode requires lambda in (0,1), got {lam!r}")
        factor = evaluate(h, lam) / lam
    elif mode == "infimum":
        if coefficient is None:
            from .convexity import jcoeff
            coefficient = jcoeff(h, Interval(0.0, 1.0, True, True))
        factor = float(coefficient.value)
    else:  # half-bound
        factor = 2.0 * evaluate(h, 0.5)

    rhs = factor * expectation
    return JensenVerdict(lhs, factor, rhs, rhs - lhs, mode,
                         lam if mode == "per-lambda" else None, expectation)
