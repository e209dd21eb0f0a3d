"""Dense real 3-way tensors and the t-product algebra built on mode-3 DFTs.

The t-product multiplies two tensors by circular convolution along the third
mode, which the DFT diagonalizes into independent frontal-slice matrix
products.  Everything here is a pure function over immutable values; the
dense block-circulant matrix is kept only as a capped oracle/debug path.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    IndexOutOfRange,
    ShapeMismatch,
    SizeOverflow,
    SymmetryViolation,
)

# Dense bcirc materialization guard (total elements of the (N1*N3) x (N2*N3)
# matrix).  bcirc is O(N1*N2*N3^2) memory; the FFT route is the fast path.
BCIRC_CAP = 4096 * 4096


class Tensor3:
    """Immutable dense real 3-way array with dims (N1, N2, N3).

    Entries are float64 in row-major (n1, n2, n3) order and are validated to
    be finite on construction.  The backing array is marked read-only so
    values can be shared freely across threads.
    """

    __slots__ = ("data",)

    def __init__(self, data, copy: bool = True):
        if copy:
            arr = np.array(data, dtype=np.float64, order="C")
        else:
            arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeMismatch(f"expected a 3-way array, got {arr.ndim} axes")
        if arr.size and not np.isfinite(arr).all():
            raise ValueError("tensor entries must be finite (no NaN/Inf)")
        arr.setflags(write=False)
        self.data = arr

    @classmethod
    def zeros(cls, dims) -> "Tensor3":
        return cls(np.zeros(tuple(dims)), copy=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    # numpy-style alias
    shape = dims

    def to_array(self) -> np.ndarray:
        """Writable copy of the entries."""
        return self.data.copy()

    def __repr__(self):
        n1, n2, n3 = self.dims
        return f"Tensor3({n1}x{n2}x{n3})"

    def __eq__(self, other):
        if not isinstance(other, Tensor3):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.dims, self.data.tobytes()))

    # Elementwise arithmetic keeps solver/certificate code readable.
    def __add__(self, other):
        _check_same_dims(self, other, "add")
        return Tensor3(self.data + other.data, copy=False)

    def __sub__(self, other):
        _check_same_dims(self, other, "subtract")
        return Tensor3(self.data - other.data, copy=False)

    def __neg__(self):
        return Tensor3(-self.data, copy=False)

    def __mul__(self, scalar):
        return Tensor3(self.data * float(scalar), copy=False)

    __rmul__ = __mul__


class FourierSlices:
    """Complex frontal slices of a tensor after the mode-3 DFT.

    For a real source tensor the slices are conjugate-symmetric along the
    third axis: slice k and slice N3-k are elementwise conjugates for
    k = 1 .. N3-1 (0-based).
    """

    __slots__ = ("slices",)

    def __init__(self, slices, copy: bool = True):
        if copy:
            arr = np.array(slices, dtype=np.complex128, order="C")
        else:
            arr = np.ascontiguousarray(slices, dtype=np.complex128)
        if arr.ndim != 3:
            raise ShapeMismatch(f"expected a 3-way array, got {arr.ndim} axes")
        if arr.size and not np.isfinite(arr).all():
            raise ValueError("Fourier slices must be finite")
        arr.setflags(write=False)
        self.slices = arr

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.slices.shape

    def slice(self, k: int) -> np.ndarray:
        """The k-th (0-based) frontal slice as an N1 x N2 complex matrix."""
        n3 = self.slices.shape[2]
        if not 0 <= k < n3:
            raise IndexOutOfRange(f"slice index {k} outside [0, {n3})")
        return self.slices[:, :, k]

    def __repr__(self):
        n1, n2, n3 = self.dims
        return f"FourierSlices({n1}x{n2}x{n3})"


def _check_same_dims(a, b, what: str):
    if a.dims != b.dims:
        raise ShapeMismatch(f"cannot {what} tensors of dims {a.dims} and {b.dims}")


def _mirror_half_spectrum(half: np.ndarray, n3: int) -> np.ndarray:
    """Expand an rfft half-spectrum to the full conjugate-symmetric spectrum."""
    n1, n2, h = half.shape
    full = np.empty((n1, n2, n3), dtype=np.complex128)
    full[:, :, :h] = half
    if n3 > h:
        full[:, :, h:] = np.conj(half[:, :, 1 : n3 - h + 1][:, :, ::-1])
    return full


def dft_mode3(a: Tensor3) -> FourierSlices:
    """Unnormalized forward DFT of every tube A(n1, n2, :).

    Matches Matlab ``fft(A, [], 3)`` semantics: the inverse carries the 1/N3
    factor.  Only the non-redundant half of the spectrum is computed; the
    remaining slices are mirrored, so conjugate symmetry holds exactly.
    """
    n3 = a.dims[2]
    half = np.fft.rfft(a.data, axis=2)
    return FourierSlices(_mirror_half_spectrum(half, n3), copy=False)


def idft_mode3(f: FourierSlices) -> Tensor3:
    """Inverse mode-3 DFT back to a real tensor.

    Raises SymmetryViolation when the imaginary residue exceeds 1e-9 of the
    output magnitude, which signals corrupted (non-conjugate-symmetric)
    Fourier data.
    """
    out = np.fft.ifft(f.slices, axis=2)
    residue = np.linalg.norm(out.imag)
    magnitude = np.linalg.norm(out.real)
    if residue > 1e-9 * magnitude or (magnitude == 0.0 and residue > 0.0):
        raise SymmetryViolation(
            f"imaginary residue {residue:.3e} exceeds 1e-9 of magnitude {magnitude:.3e}"
        )
    return Tensor3(out.real, copy=False)


def bcirc(a: Tensor3, max_elems: int = BCIRC_CAP) -> np.ndarray:
    """Dense block-circulant matrix of shape (N1*N3) x (N2*N3).

    Block (i, j) is the frontal slice with index (i - j) mod N3.  This is the
    oracle/debug path; it raises SizeOverflow beyond ``max_elems`` total
    entries rather than silently allocating.
    """
    n1, n2, n3 = a.dims
    rows, cols = n1 * n3, n2 * n3
    if rows * cols > max_elems:
        raise SizeOverflow(
            f"bcirc of dims {a.dims} needs {rows}x{cols} entries, cap is {max_elems}"
        )
    out = np.empty((rows, cols))
    for i in range(n3):
        for j in range(n3):
            out[i * n1 : (i + 1) * n1, j * n2 : (j + 1) * n2] = a.data[:, :, (i - j) % n3]
    return out


def unfold(a: Tensor3) -> np.ndarray:
    """Stack frontal slices top-to-bottom into an (N1*N3) x N2 matrix."""
    n1, n2, n3 = a.dims
    return a.data.transpose(2, 0, 1).reshape(n3 * n1, n2).copy()


def fold(m: np.ndarray, n3: int) -> Tensor3:
    """Inverse of :func:`unfold`; the row count must be divisible by n3."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeMismatch(f"fold expects a matrix, got {m.ndim} axes")
    if n3 < 1 or m.shape[0] % n3 != 0:
        raise ShapeMismatch(f"cannot fold {m.shape[0]} rows into {n3} frontal slices")
    n1 = m.shape[0] // n3
    return Tensor3(m.reshape(n3, n1, m.shape[1]).transpose(1, 2, 0), copy=False)


def tprod(a: Tensor3, b: Tensor3) -> Tensor3:
    """t-product A * B, computed slice-wise in the Fourier domain.

    Equals fold(bcirc(A) @ unfold(B)); requires A of dims (N1, N2, N3) and
    B of dims (N2, L, N3).
    """
    n1, n2, n3 = a.dims
    bn1, l, bn3 = b.dims
    if n2 != bn1 or n3 != bn3:
        raise ShapeMismatch(f"t-product needs (N1,N2,N3)*(N2,L,N3), got {a.dims}*{b.dims}")
    fa = np.fft.rfft(a.data, axis=2)
    fb = np.fft.rfft(b.data, axis=2)
    prod = np.matmul(fa.transpose(2, 0, 1), fb.transpose(2, 0, 1))
    out = np.fft.irfft(prod.transpose(1, 2, 0), n=n3, axis=2)
    return Tensor3(out, copy=False)


def ttranspose(a: Tensor3) -> Tensor3:
    """Tensor transpose: transpose each frontal slice, reverse slices 2..N3."""
    d = a.data.transpose(1, 0, 2)
    out = np.empty_like(d)
    out[:, :, 0] = d[:, :, 0]
    if a.dims[2] > 1:
        out[:, :, 1:] = d[:, :, :0:-1]
    return Tensor3(out, copy=False)


def identity_tensor(n: int, n3: int) -> Tensor3:
    """Identity of the t-product: first frontal slice I_n, others zero."""
    if n < 1 or n3 < 1:
        raise IndexOutOfRange(f"identity tensor needs positive dims, got ({n}, {n3})")
    out = np.zeros((n, n, n3))
    out[np.arange(n), np.arange(n), 0] = 1.0
    return Tensor3(out, copy=False)


def column_basis(index: int, n: int, n3: int) -> Tensor3:
    """Tensor column basis: N x 1 x N3 with a single 1 at (index, 0, 0)."""
    if not 0 <= index < n:
        raise IndexOutOfRange(f"column index {index} outside [0, {n})")
    out = np.zeros((n, 1, n3))
    out[index, 0, 0] = 1.0
    return Tensor3(out, copy=False)


def tube_basis(index: int, n3: int) -> Tensor3:
    """Tensor tube basis: 1 x 1 x N3 with a single 1 at (0, 0, index)."""
    if not 0 <= index < n3:
        raise IndexOutOfRange(f"tube index {index} outside [0, {n3})")
    out = np.zeros((1, 1, n3))
    out[0, 0, index] = 1.0
    return Tensor3(out, copy=False)


def basis(kind: str, index: int, dims) -> Tensor3:
    """Standard tensor basis element of the requested kind (0-based index).

    kind "column" builds an N x 1 x N3 column basis; kind "tube" builds a
    1 x 1 x N3 tube basis.  ``dims`` is the dims triple of the result.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ShapeMismatch(f"dims must be a triple, got {dims}")
    n1, n2, n3 = dims
    if kind == "column":
        if n2 != 1:
            raise ShapeMismatch(f"column basis dims must be (N, 1, N3), got {dims}")
        return column_basis(index, n1, n3)
    if kind == "tube":
        if n1 != 1 or n2 != 1:
            raise ShapeMismatch(f"tube basis dims must be (1, 1, N3), got {dims}")
        return tube_basis(index, n3)
    raise ValueError(f"unknown basis kind {kind!r}; expected 'column' or 'tube'")


def norm(a: Tensor3, kind: str = "fro") -> float:
    """Elementwise tensor norm: Frobenius ("fro"), l1, or infinity ("linf")."""
    if kind == "fro":
        return float(np.linalg.norm(a.data))
    if kind == "l1":
        return float(np.abs(a.data).sum())
    if kind == "linf":
        return float(np.abs(a.data).max()) if a.data.size else 0.0
    raise ValueError(f"unknown norm kind {kind!r}; expected 'fro', 'l1' or 'linf'")


def inner(a: Tensor3, b: Tensor3) -> float:
    """Inner product: sum over frontal slices of matrix inner products."""
    _check_same_dims(a, b, "pair")
    return float(np.vdot(a.data, b.data))


def write_tensor(path, a: Tensor3) -> None:
    """Write the tensor text format: header "N1 N2 N3", then entries.

    Entries follow (n1 outer, n2 middle, n3 inner) order, one tube per line,
    with 17 significant digits so float64 values round-trip exactly.
    """
    n1, n2, n3 = a.dims
    if min(a.dims) < 1:
        raise ShapeMismatch(f"text format requires positive dims, got {a.dims}")
    flat = a.data.reshape(n1 * n2, n3)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n1} {n2} {n3}\n")
        for tube in flat:
            fh.write(" ".join(f"{v:.17g}" for v in tube) + "\n")


def read_tensor(path) -> Tensor3:
    """Read the tensor text format written by :func:`write_tensor`."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if len(tokens) < 3:
        raise ShapeMismatch(f"{path}: missing 'N1 N2 N3' header")
    try:
        n1, n2, n3 = (int(t) for t in tokens[:3])
    except ValueError as exc:
        raise ShapeMismatch(f"{path}: malformed dims header {tokens[:3]}") from exc
    if n1 < 1 or n2 < 1 or n3 < 1:
        raise ShapeMismatch(f"{path}: dims must be positive, got ({n1}, {n2}, {n3})")
    want = n1 * n2 * n3
    values = tokens[3:]
    if len(values) != want:
        raise ShapeMismatch(f"{path}: expected {want} entries, found {len(values)}")
    try:
        arr = np.array([float(v) for v in values]).reshape(n1, n2, n3)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry") from exc
    return Tensor3(arr, copy=False)
