"""Matrix generators and finite-section inversion experiments.

Decay models produce matrices whose entries obey the envelope
|A(k, l)| <= c (1 + |k - l|_2)^(-r) exactly:

* ``det``   - every entry equals the envelope (real, positive),
* ``phase`` - envelope magnitude with an independent uniform phase,
* ``mag``   - envelope magnitude scaled by an independent uniform [0, 1).

``make_invertible`` shifts a matrix to margin * ||A|| * I + A, which bounds
the condition number by (margin + 1) / (margin - 1); the finite-section
inverse is then profiled for off-diagonal decay.  The spectral-invariance
experiment repeats this over a sequence of windows and tabulates norms of
the matrix and its inverse.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import smoothness as _smoothness
from .lattice import LatticeMatrix
from .norms import op_norm_l2

__all__ = [
    "DecayModel",
    "DecayProfile",
    "InvarianceCell",
    "InvarianceReport",
    "SingularSectionError",
    "corpus",
    "decay_profile",
    "generate",
    "invert_finite_section",
    "make_invertible",
    "spectral_invariance_report",
]

_KIND_ALIASES = {
    "det": "det",
    "deterministic-envelope": "det",
    "phase": "phase",
    "random-phase": "phase",
    "mag": "mag",
    "random-magnitude": "mag",
}


class SingularSectionError(RuntimeError):
    """The finite section is numerically singular (or its inverse failed
    the residual check)."""


@dataclass(frozen=True)
class DecayModel:
    """Envelope-decay generator: kind in {det, phase, mag}, decay exponent,
    amplitude c and a 64-bit RNG seed."""

    kind: str
    exponent: float
    amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown decay model kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.exponent < 0:
            raise ValueError("exponent must be >= 0")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be > 0")


def _all_offsets(dim, band):
    rng = range(-band, band + 1)
    if dim == 1:
        return [(m,) for m in rng]
    return [(m1, m2) for m1 in rng for m2 in rng]


def generate(model, window, dim=1, band=None):
    """Draw a matrix from a decay model on the window [-W, W]^d.

    ``band`` caps the populated offsets at |m|_inf <= band (default: the
    full window, band = 2W).  Same model and geometry always reproduce the
    same matrix bit for bit.
    """
    window = int(window)
    if window < 1:
        raise ValueError("window must be >= 1")
    if band is None:
        band = 2 * window
    band = int(band)
    if not (0 <= band <= 2 * window):
        raise ValueError("band must lie in [0, 2W]")
    rng = np.random.default_rng(model.seed)
    diags = {}
    for off in _all_offsets(dim, band):
        dist = math.sqrt(sum(m * m for m in off))
        env = model.amplitude * (1.0 + dist) ** (-model.exponent)
        shape = tuple(2 * window + 1 - abs(m) for m in off)
        if model.kind == "det":
            arr = np.full(shape, env, dtype=np.complex128)
        elif model.kind == "phase":
            arr = env * np.exp(2j * np.pi * rng.random(shape))
        else:
            arr = (env * rng.random(shape)).astype(np.complex128)
        diags[off] = arr
    return LatticeMatrix(dim, window, diags)


def corpus(seed, window, count=100, dim=1):
    """Deterministic mixed corpus: model kinds cycle through det/phase/mag
    and the decay exponents sweep [2.5, 4.0]."""
    kinds = ("det", "phase", "mag")
    out = []
    for i in range(count):
        model = DecayModel(
            kind=kinds[i % 3],
            exponent=2.5 + 1.5 * (i % 8) / 7.0,
            amplitude=1.0,
            seed=(seed * 1_000_003 + i) % 2**63,
        )
        out.append(generate(model, window, dim=dim))
    return out


def make_invertible(matrix, margin=2.0):
    """margin * ||A||_op * I + A; margin > 1 keeps the condition number
    at most (margin + 1) / (margin - 1).  Rejects the zero matrix."""
    if margin <= 1.0:
        raise ValueError("margin must be > 1")
    nrm = op_norm_l2(matrix)
    if nrm == 0.0:
        raise ValueError("cannot shift the zero matrix into invertibility")
    return margin * nrm * LatticeMatrix.identity(matrix.dim, matrix.window) + matrix


def invert_finite_section(matrix, sv_gate=1e-10, residual_gate=1e-8):
    """Dense inverse of the window section, with safety checks.

    Raises :class:`SingularSectionError` when the smallest singular value
    falls below ``sv_gate`` times the largest, or when the inverse fails the
    residual check ||B B^-1 - I||_op <= residual_gate.
    """
    dense = matrix.to_dense()
    if not matrix._diags:
        raise SingularSectionError("zero matrix has no inverse")
    svals = np.linalg.svd(dense, compute_uv=False)
    if svals[-1] < sv_gate * svals[0]:
        raise SingularSectionError(
            f"section numerically singular: s_min/s_max = {svals[-1] / svals[0]:.3e}"
        )
    inv = np.linalg.inv(dense)
    resid = dense @ inv
    np.fill_diagonal(resid, resid.diagonal() - 1.0)
    resid_norm = np.linalg.norm(resid, 2)
    if resid_norm > residual_gate:
        raise SingularSectionError(
            f"inverse failed the residual check: {resid_norm:.3e}"
        )
    return LatticeMatrix.from_dense(inv, matrix.dim, matrix.window)


@dataclass(frozen=True)
class DecayProfile:
    """Interior-row decay envelope and its log-log power fit.

    ``exponent`` is minus the fitted slope of log d(m) against
    log(1 + |m|_2); ``exponent_inner``/``exponent_outer`` refit the two
    halves of the fit window, and ``superpolynomial`` flags decay clearly
    faster than any power law (outer-half exponent running away from the
    inner half)."""

    distances: tuple
    envelope: tuple
    exponent: float
    intercept: float
    residual: float
    n_fit: int
    fit_lo: float
    fit_hi: float
    exponent_inner: float
    exponent_outer: float
    superpolynomial: bool


def _interior_envelope(matrix):
    """Per-diagonal sup of |entries| over the central 50% of rows."""
    half = matrix.window // 2
    n = 2 * matrix.window + 1
    dists, vals = [], []
    for off, arr in matrix.diagonals():
        slices = []
        empty = False
        for m in off:
            lo_k = -matrix.window + max(0, m)  # first row of this diagonal
            start = max(0, -half - lo_k)
            stop = (n - abs(m)) - max(0, (matrix.window + min(0, m)) - half)
            if stop <= start:
                empty = True
                break
            slices.append(slice(start, stop))
        if empty:
            continue
        dists.append(math.sqrt(sum(m * m for m in off)))
        vals.append(float(np.abs(arr[tuple(slices)]).max()))
    return np.asarray(dists), np.asarray(vals)


def decay_profile(matrix, fit_lo=None, fit_hi=None, min_points=8):
    """Fit the interior decay envelope to a power law.

    The fit window defaults to 1 <= |m|_2 <= 0.75 * max |m|_2 (the main
    diagonal and the outer quarter are edge-dominated and excluded) and must
    contain at least ``min_points`` diagonals.
    """
    dists, vals = _interior_envelope(matrix)
    if dists.size == 0:
        raise ValueError("decay profile of the zero matrix is undefined")
    d_max = float(dists.max())
    if fit_lo is None:
        fit_lo = 1.0
    if fit_hi is None:
        fit_hi = 0.75 * d_max
    sel = (dists >= fit_lo) & (dists <= fit_hi)
    if int(sel.sum()) < min_points:
        raise ValueError(
            f"only {int(sel.sum())} diagonals inside the fit window "
            f"[{fit_lo}, {fit_hi}]; need at least {min_points}"
        )
    x = np.log1p(dists[sel])
    y = np.log(np.maximum(vals[sel], 1e-300))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    order = np.argsort(x)
    half = order.size // 2
    lo_idx, hi_idx = order[:half], order[half:]

    def _fit(idx):
        if idx.size < 2 or np.ptp(x[idx]) == 0:
            return -slope
        s, _ = np.polyfit(x[idx], y[idx], 1)
        return -s

    exp_inner = float(_fit(lo_idx))
    exp_outer = float(_fit(hi_idx))
    super_poly = exp_outer > exp_inner + max(1.0, 0.25 * abs(exp_inner))
    srt = np.argsort(dists)
    return DecayProfile(
        distances=tuple(float(d) for d in dists[srt]),
        envelope=tuple(float(v) for v in vals[srt]),
        exponent=float(-slope),
        intercept=float(intercept),
        residual=resid,
        n_fit=int(sel.sum()),
        fit_lo=float(fit_lo),
        fit_hi=float(fit_hi),
        exponent_inner=exp_inner,
        exponent_outer=exp_outer,
        superpolynomial=bool(super_poly),
    )


@dataclass(frozen=True)
class InvarianceCell:
    window: int
    condition: float
    op_norm_forward: float
    profile_forward: DecayProfile
    profile_inverse: DecayProfile
    norms: dict  # spec string -> {"forward": float, "inverse": float}


@dataclass(frozen=True)
class InvarianceReport:
    model: DecayModel
    margin: float
    dim: int
    windows: tuple
    norm_specs: tuple
    cells: tuple
    stability: dict  # spec string -> tuple of |delta|/value between windows

    def to_dict(self):
        return {
            "model": {
                "kind": self.model.kind,
                "exponent": self.model.exponent,
                "amplitude": self.model.amplitude,
                "seed": self.model.seed,
            },
            "margin": self.margin,
            "dim": self.dim,
            "windows": list(self.windows),
            "norms": list(self.norm_specs),
            "cells": [
                {
                    "window": c.window,
                    "condition": c.condition,
                    "op_norm_forward": c.op_norm_forward,
                    "exponent_forward": c.profile_forward.exponent,
                    "exponent_inverse": c.profile_inverse.exponent,
                    "residual_forward": c.profile_forward.residual,
                    "residual_inverse": c.profile_inverse.residual,
                    "superpolynomial_inverse": c.profile_inverse.superpolynomial,
                    "norms": c.norms,
                }
                for c in self.cells
            ],
            "stability": {k: list(v) for k, v in self.stability.items()},
        }


def _default_report_norms(model):
    return (
        f"jaffard:r={repr(float(model.exponent))}",
        "w[bessel:r=1]jaffard:r=0",
        "besov:base=jaffard:r=0,r=0.5,p=inf,method=solidlp",
    )


def spectral_invariance_report(
    model, windows, norms=None, margin=2.0, dim=1, threads=1
):
    """Generate/shift/invert the model at each window and tabulate decay
    exponents and norms of the matrix and of its finite-section inverse.

    Windows below 16 are refused: the interior-row profile needs room.
    ``stability`` reports the relative change of every inverse norm between
    consecutive windows.
    """
    windows = tuple(int(w) for w in windows)
    if not windows:
        raise ValueError("need at least one window")
    if any(w < 16 for w in windows):
        raise ValueError("windows below 16 are too small for decay profiling")
    if norms is None:
        norms = _default_report_norms(model)
    norms = tuple(norms)
    parsed = [_smoothness.parse_any_spec(s) if isinstance(s, str) else s for s in norms]

    def cell(window):
        a = generate(model, window, dim=dim)
        b = make_invertible(a, margin=margin)
        b_inv = invert_finite_section(b)
        svals = np.linalg.svd(b.to_dense(), compute_uv=False)
        norm_table = {
            text: {
                "forward": _smoothness.evaluate(b, spec),
                "inverse": _smoothness.evaluate(b_inv, spec),
            }
            for text, spec in zip(norms, parsed)
        }
        return InvarianceCell(
            window=window,
            condition=float(svals[0] / svals[-1]),
            op_norm_forward=float(svals[0]),
            profile_forward=decay_profile(b),
            profile_inverse=decay_profile(b_inv),
            norms=norm_table,
        )

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = tuple(pool.map(cell, windows))
    else:
        cells = tuple(cell(w) for w in windows)
    stability = {}
    for text in norms:
        vals = [c.norms[text]["inverse"] for c in cells]
        deltas = tuple(
            abs(b - a) / abs(a) if a else math.inf for a, b in zip(vals, vals[1:])
        )
        stability[text] = deltas
    return InvarianceReport(
        model=model,
        margin=margin,
        dim=dim,
        windows=windows,
        norm_specs=norms,
        cells=cells,
        stability=stability,
    )


def report_csv_rows(report):
    """Flatten a report into (window, spec, forward, inverse) rows."""
    rows = [("window", "spec", "forward", "inverse")]
    for cell in report.cells:
        for spec, vals in cell.norms.items():
            rows.append((cell.window, spec, vals["forward"], vals["inverse"]))
    return rows
