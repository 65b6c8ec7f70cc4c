"""Dense linear algebra over GF(2) on bit-packed numpy words.

Rows are stored as ``uint64`` words, least significant bit first, so column
``c`` of a row lives in word ``c // 64`` at bit ``c % 64``.  Everything that
returns a subspace returns it in reduced row echelon form, which makes bases
canonical and directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

WORD = 64
_ONE = np.uint64(1)


def _nwords(ncols: int) -> int:
    return max(1, (ncols + WORD - 1) // WORD)


def pack_bits(dense: np.ndarray) -> np.ndarray:
    """Pack a 2-D 0/1 array into uint64 words (LSB first)."""
    dense = np.asarray(dense, dtype=np.uint8) & 1
    if dense.ndim != 2:
        raise ValueError("expected a 2-D array")
    rows, cols = dense.shape
    nw = _nwords(cols)
    if rows == 0:
        return np.zeros((0, nw), dtype=np.uint64)
    padded = np.zeros((rows, nw * WORD), dtype=np.uint8)
    padded[:, :cols] = dense
    as_bytes = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(as_bytes).view("<u8").reshape(rows, nw).astype(np.uint64)


def unpack_bits(words: np.ndarray, ncols: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype="<u8")
    rows = words.shape[0]
    if rows == 0:
        return np.zeros((0, ncols), dtype=np.uint8)
    as_bytes = words.view(np.uint8).reshape(rows, -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :ncols]


class BitMatrix:
    """A matrix over GF(2) with bit-packed rows.

    Treat instances as immutable; every operation returns a new matrix.
    """

    __slots__ = ("nrows", "ncols", "words")

    def __init__(self, nrows: int, ncols: int, words: np.ndarray | None = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("negative shape")
        self.nrows = nrows
        self.ncols = ncols
        nw = _nwords(ncols)
        if words is None:
            words = np.zeros((nrows, nw), dtype=np.uint64)
        elif words.shape != (nrows, nw):
            raise ValueError(f"word array has shape {words.shape}, expected {(nrows, nw)}")
        self.words = words

    # -- construction ---------------------------------------------------
    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense) -> "BitMatrix":
        dense = np.asarray(dense, dtype=np.uint8)
        if dense.ndim == 1:
            dense = dense.reshape(1, -1)
        rows, cols = dense.shape
        return cls(rows, cols, pack_bits(dense))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "BitMatrix":
        """Build from nested lists of 0/1 entries."""
        if len(rows) == 0:
            return cls(0, ncols or 0)
        return cls.from_dense(np.array(rows, dtype=np.uint8))

    @classmethod
    def from_strings(cls, rows: Iterable[str]) -> "BitMatrix":
        """``["1101", "0110"]`` style constructor, column 0 first."""
        rows = list(rows)
        return cls.from_dense([[int(ch) for ch in r] for r in rows])

    @classmethod
    def from_ints(cls, rows: Sequence[int], ncols: int) -> "BitMatrix":
        """Rows given as Python int bitsets (bit ``c`` is column ``c``)."""
        nw = _nwords(ncols)
        out = np.zeros((len(rows), nw), dtype=np.uint64)
        nbytes = nw * 8
        for i, r in enumerate(rows):
            if r:
                out[i] = np.frombuffer(int(r).to_bytes(nbytes, "little"), dtype="<u8")
        return cls(len(rows), ncols, out)

    # -- conversion -----------------------------------------------------
    def to_dense(self) -> np.ndarray:
        return unpack_bits(self.words, self.ncols)

    def to_ints(self) -> list[int]:
        raw = np.ascontiguousarray(self.words, dtype="<u8")
        return [int.from_bytes(raw[i].tobytes(), "little") for i in range(self.nrows)]

    def row_int(self, i: int) -> int:
        return int.from_bytes(np.ascontiguousarray(self.words[i], dtype="<u8").tobytes(), "little")

    # -- queries ----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(idx)
        return int((self.words[i, j // WORD] >> np.uint64(j % WORD)) & _ONE)

    def is_zero(self) -> bool:
        return not self.words.any()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.words, other.words)

    def __hash__(self) -> int:
        return hash((self.nrows, self.ncols, self.words.tobytes()))

    def __repr__(self) -> str:
        if self.nrows * self.ncols <= 400:
            body = "; ".join("".join(map(str, r)) for r in self.to_dense())
            return f"BitMatrix({self.nrows}x{self.ncols}: {body})"
        return f"BitMatrix({self.nrows}x{self.ncols})"

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return BitMatrix(self.nrows, self.ncols, self.words ^ other.words)

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T.copy())

    @property
    def T(self) -> "BitMatrix":
        return self.transpose()

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        if self.nrows == 0 or other.ncols == 0 or self.ncols == 0:
            return BitMatrix(self.nrows, other.ncols)
        a = self.to_dense().astype(np.int64)
        b = other.to_dense().astype(np.int64)
        return BitMatrix.from_dense(((a @ b) & 1).astype(np.uint8))

    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.ncols != other.ncols:
            raise ValueError("column mismatch")
        return BitMatrix(self.nrows + other.nrows, self.ncols, np.vstack([self.words, other.words]))

    def select_rows(self, idx) -> "BitMatrix":
        idx = list(idx)
        return BitMatrix(len(idx), self.ncols, self.words[idx].copy() if idx else np.zeros((0, _nwords(self.ncols)), np.uint64))

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """``self @ vec`` for a 0/1 column vector."""
        vec = np.asarray(vec, dtype=np.int64)
        return ((self.to_dense().astype(np.int64) @ vec) & 1).astype(np.uint8)


def _rref_words(words: np.ndarray, ncols: int, col_order: Sequence[int] | None = None):
    """In-place RREF on packed rows. Returns (rank, pivot columns)."""
    nrows = words.shape[0]
    r = 0
    pivots: list[int] = []
    cols = range(ncols) if col_order is None else col_order
    ordered = col_order is None
    for c in cols:
        if r == nrows:
            break
        wi, bit = divmod(c, WORD)
        mask = _ONE << np.uint64(bit)
        hits = np.flatnonzero(words[r:, wi] & mask)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            tmp = words[r].copy()
            words[r] = words[p]
            words[p] = tmp
        others = np.flatnonzero(words[:, wi] & mask)
        others = others[others != r]
        if others.size:
            # with natural column order everything left of the pivot word is
            # already zero in the pivot row
            if ordered:
                words[others, wi:] ^= words[r, wi:]
            else:
                words[others] ^= words[r]
        pivots.append(c)
        r += 1
    return r, pivots


def row_reduce(m: BitMatrix, col_order: Sequence[int] | None = None) -> tuple[BitMatrix, list[int], int]:
    """Reduced row echelon form of ``m``.

    Returns ``(reduced, pivot_cols, rank)``; ``reduced`` keeps the shape of
    ``m`` with the zero rows at the bottom.  ``col_order`` changes the order
    in which columns are considered for pivots (used for monomial orders).
    """
    words = m.words.copy()
    rank, pivots = _rref_words(words, m.ncols, col_order)
    return BitMatrix(m.nrows, m.ncols, words), pivots, rank


def rank(m: BitMatrix) -> int:
    return row_reduce(m)[2]


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """A subspace of GF(2)^ambient_dim held as an RREF basis."""

    ambient_dim: int
    basis_rows: BitMatrix

    def __post_init__(self):
        if self.basis_rows.ncols != self.ambient_dim:
            raise ValueError("basis width does not match ambient dimension")

    @classmethod
    def span(cls, rows: BitMatrix) -> "SubspaceBasis":
        red, _, rk = row_reduce(rows)
        return cls(rows.ncols, red.select_rows(range(rk)))

    @classmethod
    def full(cls, n: int) -> "SubspaceBasis":
        return cls(n, BitMatrix.identity(n))

    @classmethod
    def zero(cls, n: int) -> "SubspaceBasis":
        return cls(n, BitMatrix(0, n))

    @property
    def dim(self) -> int:
        return self.basis_rows.nrows

    def pivots(self) -> list[int]:
        dense = self.basis_rows.to_dense()
        return [int(np.flatnonzero(row)[0]) for row in dense]

    def contains(self, vec) -> bool:
        v = BitMatrix.from_dense(np.asarray(vec, dtype=np.uint8).reshape(1, -1))
        stacked = self.basis_rows.vstack(v)
        return rank(stacked) == self.dim

    def contains_space(self, other: "SubspaceBasis") -> bool:
        if other.ambient_dim != self.ambient_dim:
            return False
        return rank(self.basis_rows.vstack(other.basis_rows)) == self.dim

    def vectors(self) -> np.ndarray:
        return self.basis_rows.to_dense()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubspaceBasis):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis_rows == other.basis_rows

    def __hash__(self) -> int:
        return hash(self.basis_rows)

    def __repr__(self) -> str:
        return f"SubspaceBasis(dim={self.dim}, ambient={self.ambient_dim})"


def nullspace_basis(m: BitMatrix) -> SubspaceBasis:
    """Basis of ``{x : m x = 0}`` (column-vector convention)."""
    n = m.ncols
    red, pivots, rk = row_reduce(m)
    free = [c for c in range(n) if c not in set(pivots)]
    if not free:
        return SubspaceBasis.zero(n)
    dense = red.to_dense()[:rk]
    out = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        out[k, f] = 1
        for i, p in enumerate(pivots):
            if dense[i, f]:
                out[k, p] = 1
    return SubspaceBasis.span(BitMatrix.from_dense(out))


def left_nullspace_basis(m: BitMatrix) -> SubspaceBasis:
    """Basis of ``{y : y m = 0}``."""
    return nullspace_basis(m.transpose())


def equalizer_basis(a: BitMatrix, b: BitMatrix) -> SubspaceBasis:
    """Basis of ``{x : a x = b x}``; in characteristic 2 this is ``null(a + b)``."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return nullspace_basis(a + b)


def annihilator(space: SubspaceBasis) -> BitMatrix:
    """Rows spanning the orthogonal complement of ``space``."""
    if space.dim == 0:
        return BitMatrix.identity(space.ambient_dim)
    return nullspace_basis(space.basis_rows).basis_rows


def intersect_subspaces(spaces: Sequence[SubspaceBasis], ambient_dim: int | None = None) -> SubspaceBasis:
    """Intersection of subspaces; the empty family gives the whole space."""
    if not spaces:
        if ambient_dim is None:
            raise ValueError("ambient dimension needed for an empty intersection")
        return SubspaceBasis.full(ambient_dim)
    n = spaces[0].ambient_dim
    if any(s.ambient_dim != n for s in spaces) or (ambient_dim is not None and ambient_dim != n):
        raise ValueError("ambient dimension mismatch")
    if len(spaces) == 1:
        return spaces[0]
    constraints = annihilator(spaces[0])
    for s in spaces[1:]:
        constraints = constraints.vstack(annihilator(s))
    return nullspace_basis(constraints)


def solve_linear(m: BitMatrix, rhs) -> np.ndarray | None:
    """Some ``x`` with ``m x = rhs``, or ``None`` when the system is inconsistent."""
    rhs = np.asarray(rhs, dtype=np.uint8).reshape(-1)
    if rhs.size != m.nrows:
        raise ValueError("right-hand side length must equal the row count")
    aug = np.concatenate([m.to_dense(), rhs.reshape(-1, 1)], axis=1)
    red, pivots, rk = row_reduce(BitMatrix.from_dense(aug))
    if m.ncols in pivots:
        return None
    dense = red.to_dense()
    x = np.zeros(m.ncols, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = dense[i, m.ncols]
    return x


class RowSpaceSolver:
    """Express vectors as combinations of a fixed list of rows.

    Precomputes an echelon form over Python int bitsets; intended for the
    many right-hand sides that share one coefficient matrix (chain lifts).
    """

    def __init__(self, rows: Sequence[int]):
        self.nrows = len(rows)
        self._pivots: dict[int, tuple[int, int]] = {}
        for i, r in enumerate(rows):
            combo = 1 << i
            while r:
                top = r.bit_length() - 1
                hit = self._pivots.get(top)
                if hit is None:
                    self._pivots[top] = (r, combo)
                    break
                r ^= hit[0]
                combo ^= hit[1]
        self.rank = len(self._pivots)

    def solve(self, target: int) -> int | None:
        """Bitset of row indices summing to ``target``, or ``None``."""
        combo = 0
        while target:
            top = target.bit_length() - 1
            hit = self._pivots.get(top)
            if hit is None:
                return None
            target ^= hit[0]
            combo ^= hit[1]
        return combo

    def contains(self, target: int) -> bool:
        return self.solve(target) is not None


class IntEchelon:
    """Incremental echelon basis over Python int bitsets (pivot = top bit)."""

    def __init__(self):
        self.rows: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            r = self.rows.get(top)
            if r is None:
                return v
            v ^= r
        return 0

    def add(self, v: int) -> bool:
        """Insert ``v``; returns False if it was already in the span."""
        v = self.reduce(v)
        if not v:
            return False
        self.rows[v.bit_length() - 1] = v
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0


def vec_to_int(vec) -> int:
    out = 0
    for i in np.flatnonzero(np.asarray(vec)):
        out |= 1 << int(i)
    return out


def int_to_vec(v: int, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.uint8)
    i = 0
    while v:
        if v & 1:
            out[i] = 1
        v >>= 1
        i += 1
    return out


def int_bits(v: int) -> list[int]:
    """Positions of set bits, ascending."""
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out
