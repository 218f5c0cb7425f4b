"""Diagonal-major complex matrices on finite windows of the integer lattice.

A matrix lives on the index window [-W, W]^d (d = 1 or 2) and is stored by
side diagonals: for each offset m with \\|m\\|_inf <= 2W the entries A(k, k-m)
are kept as a d-dimensional array over the rows k for which both k and k-m
lie in the window.  The matrix is the sum of its side diagonals, and every
translation-covariant operation (modulation, finite differences, the
derivation) acts as a scalar multiplier on each diagonal, which is why this
layout is the native one throughout the package.

Row order inside a diagonal is ascending in k (per axis for d = 2), so the
array for offset m has shape ``(2W+1-|m_1|, ..., 2W+1-|m_d|)``.

Lattice indices are plain tuples of ints; offsets may be given as bare ints
when d = 1.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

__all__ = [
    "LatticeMatrix",
    "add",
    "adjoint",
    "band_truncate",
    "bandwidth",
    "derivation",
    "difference",
    "from_json_dict",
    "load_csv",
    "load_json",
    "modulate",
    "multiply",
    "save_json",
    "side_diagonal",
    "to_json_dict",
]


def _as_offset(offset, dim):
    if np.isscalar(offset):
        if dim != 1:
            raise ValueError("scalar offset only valid for dim=1")
        return (int(offset),)
    offset = tuple(int(v) for v in offset)
    if len(offset) != dim:
        raise ValueError(f"offset {offset} has wrong length for dim={dim}")
    return offset


def _diag_shape(window, offset):
    return tuple(2 * window + 1 - abs(m) for m in offset)


class LatticeMatrix:
    """Finite-window matrix over Z^d stored diagonal by diagonal.

    Parameters
    ----------
    dim : int
        Lattice dimension, 1 or 2.
    window : int
        Half-width W of the index window [-W, W]^d.
    diagonals : mapping or iterable of (offset, array)
        Entries A(k, k-m) per offset m.  Arrays are converted to complex128
        and must have the admissible-row shape for their offset.  Diagonals
        that are identically zero are dropped, so the stored representation
        is canonical and ``==`` means entrywise equality.

    Instances are immutable; the stored arrays are marked read-only.
    """

    __slots__ = ("dim", "window", "_diags")

    def __init__(self, dim, window, diagonals=()):
        dim = int(dim)
        window = int(window)
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if window < 1:
            raise ValueError("window must be >= 1")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "window", window)
        items = diagonals.items() if hasattr(diagonals, "items") else diagonals
        store = {}
        for offset, arr in items:
            offset = _as_offset(offset, dim)
            if max(abs(m) for m in offset) > 2 * window:
                raise IndexError(f"offset {offset} outside window of half-width {window}")
            arr = np.asarray(arr, dtype=np.complex128)
            shape = _diag_shape(window, offset)
            if arr.shape != shape:
                if arr.size == int(np.prod(shape)):
                    arr = arr.reshape(shape)
                else:
                    raise ValueError(
                        f"diagonal {offset}: expected shape {shape}, got {arr.shape}"
                    )
            if not arr.any():
                continue
            arr = np.array(arr, dtype=np.complex128, order="C")
            arr.setflags(write=False)
            store[offset] = arr
        object.__setattr__(self, "_diags", store)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeMatrix is immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def _raw(cls, dim, window, diags):
        """Internal: wrap an already-canonical diagonal dict without copying."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "dim", dim)
        object.__setattr__(obj, "window", window)
        object.__setattr__(obj, "_diags", diags)
        return obj

    @classmethod
    def zeros(cls, dim, window):
        return cls(dim, window)

    @classmethod
    def identity(cls, dim, window):
        shape = _diag_shape(window, (0,) * dim)
        return cls(dim, window, {(0,) * dim: np.ones(shape)})

    @classmethod
    def from_dense(cls, dense, dim=1, window=None):
        """Build from a dense window matrix.

        For d = 1 ``dense`` is (2W+1) x (2W+1) with row index k + W.  For
        d = 2 it is (2W+1)^2 x (2W+1)^2 with rows flattened in C order,
        i.e. index (k1 + W) * (2W+1) + (k2 + W).
        """
        dense = np.asarray(dense, dtype=np.complex128)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise ValueError("dense window matrix must be square")
        n = dense.shape[0]
        if dim == 1:
            if window is None:
                window = (n - 1) // 2
            if n != 2 * window + 1:
                raise ValueError("dense size does not match window")
            diags = {}
            for m in range(-2 * window, 2 * window + 1):
                d = np.diagonal(dense, offset=-m)
                if d.any():
                    diags[(m,)] = d.copy()
            return cls(1, window, diags)
        side = int(round(math.sqrt(n)))
        if side * side != n:
            raise ValueError("dense size is not a perfect square for dim=2")
        if window is None:
            window = (side - 1) // 2
        if side != 2 * window + 1:
            raise ValueError("dense size does not match window")
        t = dense.reshape(side, side, side, side)
        diags = {}
        for m1 in range(-2 * window, 2 * window + 1):
            i1 = np.arange(max(0, m1), side + min(0, m1))
            for m2 in range(-2 * window, 2 * window + 1):
                i2 = np.arange(max(0, m2), side + min(0, m2))
                block = t[i1[:, None], i2[None, :], i1[:, None] - m1, i2[None, :] - m2]
                if block.any():
                    diags[(m1, m2)] = block
        return cls(2, window, diags)

    # -- basic queries --------------------------------------------------------

    @property
    def n_rows(self):
        return (2 * self.window + 1) ** self.dim

    def offsets(self):
        """Sorted list of stored diagonal offsets."""
        return sorted(self._diags)

    def offset_array(self):
        """Stored offsets as an (M, dim) int array, lexicographically sorted."""
        offs = self.offsets()
        if not offs:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.asarray(offs, dtype=np.int64)

    def diagonals(self):
        """Iterate over (offset, read-only array) in sorted offset order."""
        for off in self.offsets():
            yield off, self._diags[off]

    def side_diagonal(self, offset):
        """Entries A(k, k-m) for the given offset, zeros if not stored."""
        offset = _as_offset(offset, self.dim)
        if max(abs(m) for m in offset) > 2 * self.window:
            raise IndexError(f"offset {offset} outside window of half-width {self.window}")
        arr = self._diags.get(offset)
        if arr is None:
            return np.zeros(_diag_shape(self.window, offset), dtype=np.complex128)
        return arr

    def envelope(self):
        """Per-diagonal sup of |entries|, aligned with :meth:`offset_array`."""
        offs = self.offsets()
        env = np.array([np.abs(self._diags[o]).max() for o in offs], dtype=float)
        return self.offset_array(), env

    def to_dense(self):
        w, n = self.window, 2 * self.window + 1
        if self.dim == 1:
            dense = np.zeros((n, n), dtype=np.complex128)
            for (m,), arr in self._diags.items():
                i = np.arange(max(0, m), n + min(0, m))
                dense[i, i - m] = arr
            return dense
        dense = np.zeros((n * n, n * n), dtype=np.complex128)
        t = dense.reshape(n, n, n, n)
        for (m1, m2), arr in self._diags.items():
            i1 = np.arange(max(0, m1), n + min(0, m1))
            i2 = np.arange(max(0, m2), n + min(0, m2))
            t[i1[:, None], i2[None, :], i1[:, None] - m1, i2[None, :] - m2] = arr
        return dense

    # -- algebra --------------------------------------------------------------

    def _check_compatible(self, other):
        if not isinstance(other, LatticeMatrix):
            raise TypeError("expected a LatticeMatrix")
        if self.dim != other.dim or self.window != other.window:
            raise ValueError(
                f"window mismatch: (dim={self.dim}, W={self.window}) vs "
                f"(dim={other.dim}, W={other.window})"
            )

    def __add__(self, other):
        self._check_compatible(other)
        diags = {}
        for off in set(self._diags) | set(other._diags):
            a = self._diags.get(off)
            b = other._diags.get(off)
            diags[off] = (a + b) if (a is not None and b is not None) else (a if b is None else b)
        return LatticeMatrix(self.dim, self.window, diags)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        scalar = complex(scalar)
        if scalar == 0:
            return LatticeMatrix(self.dim, self.window)
        return LatticeMatrix(
            self.dim, self.window, {o: a * scalar for o, a in self._diags.items()}
        )

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def __matmul__(self, other):
        return multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, LatticeMatrix):
            return NotImplemented
        if self.dim != other.dim or self.window != other.window:
            return False
        if set(self._diags) != set(other._diags):
            return False
        return all(np.array_equal(self._diags[o], other._diags[o]) for o in self._diags)

    def __hash__(self):
        return hash((self.dim, self.window, tuple(self.offsets())))

    def allclose(self, other, rtol=1e-12, atol=1e-14):
        if self.dim != other.dim or self.window != other.window:
            return False
        for off in set(self._diags) | set(other._diags):
            a = self.side_diagonal(off)
            b = other.side_diagonal(off)
            if not np.allclose(a, b, rtol=rtol, atol=atol):
                return False
        return True

    def scale_diagonals(self, factor_fn):
        """New matrix with diagonal m multiplied by factor_fn(offsets).

        ``factor_fn`` receives the (M, dim) offset array and must return M
        complex factors.  Diagonals whose factor is exactly zero are dropped.
        """
        offs = self.offsets()
        if not offs:
            return LatticeMatrix._raw(self.dim, self.window, {})
        factors = np.asarray(factor_fn(np.asarray(offs, dtype=np.int64)))
        diags = {}
        for off, f in zip(offs, factors):
            if f == 0:
                continue
            arr = self._diags[off] * f
            arr.setflags(write=False)
            diags[off] = arr
        return LatticeMatrix._raw(self.dim, self.window, diags)

    def __repr__(self):
        return (
            f"LatticeMatrix(dim={self.dim}, window={self.window}, "
            f"diagonals={len(self._diags)})"
        )


# -- free-function interface ------------------------------------------------


def side_diagonal(matrix, offset):
    """Entries A(k, k-m) of one side diagonal (zeros if absent)."""
    return matrix.side_diagonal(offset)


def bandwidth(matrix):
    """Smallest N such that every stored offset has \\|m\\|_inf < N (0 for zero)."""
    offs = matrix.offset_array()
    if offs.shape[0] == 0:
        return 0
    return int(np.abs(offs).max()) + 1


def band_truncate(matrix, n):
    """Keep the diagonals with \\|m\\|_inf strictly below n.

    n = 0 yields the zero matrix; n = 1 keeps only the main diagonal.
    """
    n = int(n)
    if n < 0:
        raise ValueError("bandwidth must be >= 0")
    diags = {
        off: arr
        for off, arr in matrix._diags.items()
        if max(abs(m) for m in off) < n
    }
    return LatticeMatrix._raw(matrix.dim, matrix.window, diags)


def add(a, b):
    return a + b


def multiply(a, b):
    """Finite-section product: (AB)(k, l) = sum_j A(k, j) B(j, l), j in window."""
    a._check_compatible(b)
    return LatticeMatrix.from_dense(a.to_dense() @ b.to_dense(), a.dim, a.window)


def adjoint(matrix):
    """Conjugate transpose on the window: A*(k, l) = conj(A(l, k)).

    In diagonal-major storage the m diagonal of A* is the conjugate of the
    -m diagonal of A taken in the same row order.
    """
    diags = {}
    for off, arr in matrix._diags.items():
        neg = tuple(-m for m in off)
        conj = np.conj(arr)
        conj.setflags(write=False)
        diags[neg] = conj
    return LatticeMatrix._raw(matrix.dim, matrix.window, diags)


def _reduced_t(t, dim):
    if np.isscalar(t):
        t = (float(t),)
    t = np.asarray(t, dtype=float)
    if t.shape != (dim,):
        raise ValueError(f"t must have {dim} components")
    return np.mod(t, 1.0)


def _phase_fractions(offsets, t):
    # frac(m . t) with t already reduced mod 1; keeps the phase argument in
    # [0, 1) so exp stays accurate for large offsets
    return np.mod(offsets @ t, 1.0)


def modulate(matrix, t):
    """Conjugation by the modulation of frequency t: diagonal m picks up
    the phase e^{2 pi i m.t}.  Periodic in each component of t with period 1.
    """
    t = _reduced_t(t, matrix.dim)
    if not t.any():
        return matrix
    return matrix.scale_diagonals(
        lambda offs: np.exp(2j * np.pi * _phase_fractions(offs, t))
    )


def difference(matrix, t, order=1):
    """Iterated modulation difference: diagonal m is scaled by
    (e^{2 pi i m.t} - 1)^order.
    """
    order = int(order)
    if order < 1:
        raise ValueError("order must be >= 1")
    t = _reduced_t(t, matrix.dim)
    if not t.any():
        return LatticeMatrix._raw(matrix.dim, matrix.window, {})

    def factors(offs):
        ph = np.exp(2j * np.pi * _phase_fractions(offs, t)) - 1.0
        return ph ** order

    return matrix.scale_diagonals(factors)


_I_POW = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def derivation(matrix, alpha):
    """Mixed derivation: diagonal m is scaled by prod_j (2 pi i m_j)^{alpha_j}."""
    if np.isscalar(alpha):
        alpha = (int(alpha),)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != matrix.dim:
        raise ValueError(f"alpha must have {matrix.dim} components")
    if any(a < 0 for a in alpha):
        raise ValueError("alpha components must be >= 0")

    def factors(offs):
        out = np.ones(offs.shape[0], dtype=np.complex128)
        for j, a in enumerate(alpha):
            if a == 0:
                continue
            # (2 pi i m)^a split into magnitude and an exact power of i so the
            # factor is exactly real/imaginary when it should be
            out = out * (2.0 * np.pi * offs[:, j]) ** a * _I_POW[a % 4]
        return out

    return matrix.scale_diagonals(factors)


# -- serialization ------------------------------------------------------------


def to_json_dict(matrix):
    """JSON-ready dict: offsets sorted, entries split into re/im lists.

    For d = 2 the entry arrays are flattened in C (row-major) order.
    """
    diags = []
    for off, arr in matrix.diagonals():
        flat = arr.ravel(order="C")
        diags.append(
            {
                "offset": list(off),
                "re": flat.real.tolist(),
                "im": flat.imag.tolist(),
            }
        )
    return {"dim": matrix.dim, "window": matrix.window, "diagonals": diags}


def from_json_dict(payload):
    try:
        dim = int(payload["dim"])
        window = int(payload["window"])
        raw = payload["diagonals"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix payload: {exc}") from exc
    diags = {}
    for item in raw:
        off = _as_offset(item["offset"], dim)
        re = np.asarray(item["re"], dtype=float)
        im = np.asarray(item["im"], dtype=float)
        if re.shape != im.shape:
            raise ValueError(f"diagonal {off}: re/im length mismatch")
        diags[off] = (re + 1j * im).reshape(_diag_shape(window, off))
    return LatticeMatrix(dim, window, diags)


def save_json(matrix, path):
    with open(path, "w") as fh:
        json.dump(to_json_dict(matrix), fh)
        fh.write("\n")


def load_json(path):
    with open(path) as fh:
        return from_json_dict(json.load(fh))


def load_csv(path, window=None):
    """Import a dense matrix from (row, col, re, im) records, d = 1 only.

    Indices are lattice positions in [-W, W]; absent entries are zero.  The
    window is inferred from the largest index unless given.
    """
    rows = []
    with open(path) as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            if len(rec) != 4:
                raise ValueError(f"expected 4 fields per record, got {rec}")
            rows.append((int(rec[0]), int(rec[1]), float(rec[2]), float(rec[3])))
    if not rows:
        raise ValueError("empty matrix file")
    extent = max(max(abs(r), abs(c)) for r, c, _, _ in rows)
    if window is None:
        window = max(extent, 1)
    elif extent > window:
        raise ValueError(f"index {extent} outside window {window}")
    n = 2 * window + 1
    dense = np.zeros((n, n), dtype=np.complex128)
    for r, c, re, im in rows:
        dense[r + window, c + window] = re + 1j * im
    return LatticeMatrix.from_dense(dense, 1, window)
