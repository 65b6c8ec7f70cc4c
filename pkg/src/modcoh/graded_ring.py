"""Graded commutative F2-algebras given by generators and relations.

Generators carry a positive degree and a kind (``b`` or ``c``); a ``c``
generator restricts non-nilpotently to the centre of a Sylow subgroup.
Monomials are exponent tuples in generator listing order; the monomial order
is degree reverse lexicographic with variables ranked by (degree, listing
index).

Gröbner data is computed degree by degree with linear algebra: the degree-k
piece of the quotient is spanned by products ``x_i * b`` with ``b`` a standard
monomial of degree ``k - deg x_i``, and the relations among those products
are the Koszul identities ``x_i (x_j c) = x_j (x_i c)`` together with the
degree-k defining relations.  Row reduction with columns in descending
monomial order then yields the leading terms and normal forms in degree k.
"""

from __future__ import annotations

import itertools
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .gf2 import BitMatrix, IntEchelon, SubspaceBasis, int_bits, nullspace_basis, row_reduce

log = logging.getLogger(__name__)

Monomial = tuple  # exponent tuple in generator listing order


class PresentationError(ValueError):
    """Malformed presentation text or inconsistent data."""


class WindowTooShort(ValueError):
    """The coefficient window cannot determine the requested quantity."""


class InsufficientTruncation(ValueError):
    """Gröbner data was not computed far enough for the request."""


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class Generator:
    label: str
    degree: int
    kind: str = "b"

    def __post_init__(self):
        if self.degree < 1:
            raise PresentationError(f"generator {self.label} must have positive degree")
        if self.kind not in ("b", "c"):
            raise PresentationError(f"generator kind must be 'b' or 'c', got {self.kind!r}")
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", self.label):
            raise PresentationError(f"bad generator label {self.label!r}")


@dataclass(frozen=True)
class GradedPolynomial:
    """A homogeneous F2-polynomial: a set of monomials of one weighted degree."""

    terms: frozenset
    degree: int

    @classmethod
    def from_terms(cls, terms: Iterable[Monomial], degrees: Sequence[int]) -> "GradedPolynomial":
        odd: set = set()
        for t in terms:
            odd ^= {tuple(t)}
        degs = {monomial_degree(t, degrees) for t in odd}
        if len(degs) > 1:
            raise PresentationError(f"inhomogeneous polynomial (degrees {sorted(degs)})")
        return cls(frozenset(odd), degs.pop() if degs else 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "GradedPolynomial") -> "GradedPolynomial":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise PresentationError("adding polynomials of different degrees")
        return GradedPolynomial(self.terms ^ other.terms, self.degree)

    def mul(self, other: "GradedPolynomial") -> "GradedPolynomial":
        out: set = set()
        for a in self.terms:
            for b in other.terms:
                out ^= {tuple(x + y for x, y in zip(a, b))}
        return GradedPolynomial(frozenset(out), self.degree + other.degree)

    def __mul__(self, other: "GradedPolynomial") -> "GradedPolynomial":
        return self.mul(other)

    def pad(self, nvars: int) -> "GradedPolynomial":
        return GradedPolynomial(frozenset(t + (0,) * (nvars - len(t)) for t in self.terms), self.degree)


def monomial_degree(m: Monomial, degrees: Sequence[int]) -> int:
    return sum(e * d for e, d in zip(m, degrees))


def format_monomial(m: Monomial, labels: Sequence[str]) -> str:
    parts = []
    for e, lab in zip(m, labels):
        if e == 1:
            parts.append(lab)
        elif e > 1:
            parts.append(f"{lab}^{e}")
    return "*".join(parts) if parts else "1"


def _term_sort_key(m: Monomial, order: Sequence[int]):
    # descending degrevlex: smaller exponent at the last (highest-ranked) variable first
    return tuple(m[i] for i in reversed(order))


@dataclass
class RingPresentation:
    generators: list
    relations: list = field(default_factory=list)
    truncation: int | None = None

    def __post_init__(self):
        labels = [g.label for g in self.generators]
        if len(set(labels)) != len(labels):
            raise PresentationError("generator labels must be unique")
        n = len(self.generators)
        rels = []
        for r in self.relations:
            if any(len(t) != n for t in r.terms):
                raise PresentationError("relation refers to an unknown number of generators")
            if r.is_zero():
                continue
            if r.degree < 1:
                raise PresentationError("constant relation")
            rels.append(r)
        self.relations = rels

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.generators]

    @property
    def degrees(self) -> list[int]:
        return [g.degree for g in self.generators]

    @property
    def nvars(self) -> int:
        return len(self.generators)

    def variable_order(self) -> list[int]:
        """Generator indices ranked by (degree, listing index), lowest first."""
        return sorted(range(self.nvars), key=lambda i: (self.generators[i].degree, i))

    def max_relation_degree(self) -> int:
        return max((r.degree for r in self.relations), default=0)

    def variable(self, label: str) -> GradedPolynomial:
        i = self.labels.index(label)
        e = [0] * self.nvars
        e[i] = 1
        return GradedPolynomial(frozenset([tuple(e)]), self.generators[i].degree)

    def parse_polynomial(self, text: str) -> GradedPolynomial:
        return parse_polynomial(text, self.labels, self.degrees)

    def format_polynomial(self, p: GradedPolynomial) -> str:
        if p.is_zero():
            return "0"
        order = self.variable_order()
        terms = sorted(p.terms, key=lambda m: _term_sort_key(m, order))
        return " + ".join(format_monomial(t, self.labels) for t in terms)

    def with_relations(self, extra: Sequence[GradedPolynomial]) -> "RingPresentation":
        return RingPresentation(list(self.generators), list(self.relations) + list(extra), self.truncation)

    def census(self) -> dict:
        return {
            "generators": self.nvars,
            "relations": len(self.relations),
            "generator_degrees": sorted(self.degrees),
            "relation_degrees": sorted(r.degree for r in self.relations),
            "max_relation_degree": self.max_relation_degree(),
        }

    # -- text / JSON -----------------------------------------------------------
    def to_text(self, comments: Sequence[str] = ()) -> str:
        out = [f"# {c}" for c in comments]
        if self.truncation is not None:
            out.append(f"truncation {self.truncation}")
        for g in self.generators:
            out.append(f"gen {g.label} {g.degree} {g.kind}")
        for r in self.relations:
            out.append(self.format_polynomial(r))
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RingPresentation":
        gens: list[Generator] = []
        rel_lines: list[tuple[int, str]] = []
        truncation = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("gen "):
                parts = line.split()
                if len(parts) != 4:
                    raise PresentationError(f"line {lineno}: expected 'gen <label> <degree> <b|c>'")
                try:
                    deg = int(parts[2])
                except ValueError as exc:
                    raise PresentationError(f"line {lineno}: bad degree {parts[2]!r}") from exc
                gens.append(Generator(parts[1], deg, parts[3]))
            elif line.startswith("truncation"):
                truncation = int(line.split()[1])
            else:
                rel_lines.append((lineno, line))
        labels = [g.label for g in gens]
        degrees = [g.degree for g in gens]
        rels = []
        for lineno, line in rel_lines:
            try:
                p = parse_polynomial(line, labels, degrees)
            except PresentationError as exc:
                raise PresentationError(f"line {lineno}: {exc}") from exc
            rels.append(p)
        return cls(gens, rels, truncation)

    def to_json(self) -> str:
        data = {
            "generators": [{"label": g.label, "degree": g.degree, "kind": g.kind} for g in self.generators],
            "relations": [self.format_polynomial(r) for r in self.relations],
            "truncation": self.truncation,
        }
        return json.dumps(data, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RingPresentation":
        data = json.loads(text)
        gens = [Generator(g["label"], int(g["degree"]), g.get("kind", "b")) for g in data["generators"]]
        labels = [g.label for g in gens]
        degrees = [g.degree for g in gens]
        rels = [parse_polynomial(r, labels, degrees) for r in data.get("relations", [])]
        return cls(gens, rels, data.get("truncation"))

    def same_as(self, other: "RingPresentation") -> bool:
        return (self.generators == other.generators and self.truncation == other.truncation
                and [r.terms for r in self.relations] == [r.terms for r in other.relations])


def parse_polynomial(text: str, labels: Sequence[str], degrees: Sequence[int]) -> GradedPolynomial:
    """Parse ``a^2 + b*c`` style text over the given generator labels."""
    index = {lab: i for i, lab in enumerate(labels)}
    text = text.strip()
    if "=" in text:
        lhs, rhs = text.split("=", 1)
        text = lhs if rhs.strip() == "0" else f"{lhs} + {rhs}"
    terms = []
    for raw in text.split("+"):
        raw = raw.strip()
        if not raw:
            raise PresentationError(f"empty term in {text!r}")
        exps = [0] * len(labels)
        if raw != "1":
            for factor in raw.split("*"):
                factor = factor.strip()
                m = re.fullmatch(r"([A-Za-z][A-Za-z0-9_]*)(?:\^(\d+))?", factor)
                if not m:
                    raise PresentationError(f"cannot parse factor {factor!r}")
                lab, pw = m.group(1), int(m.group(2) or 1)
                if lab not in index:
                    raise PresentationError(f"unknown generator {lab!r}")
                exps[index[lab]] += pw
        terms.append(tuple(exps))
    return GradedPolynomial.from_terms(terms, degrees)


def read_presentation(path: str | Path) -> RingPresentation:
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return RingPresentation.from_json(text)
    return RingPresentation.from_text(text)


# ---------------------------------------------------------------------------
# monomial enumeration


def monomials_of_degree(degrees: Sequence[int], k: int) -> list[Monomial]:
    """All exponent tuples of weighted degree ``k``."""
    n = len(degrees)
    out: list[Monomial] = []

    def rec(i: int, rest: int, acc: list):
        if i == n:
            if rest == 0:
                out.append(tuple(acc))
            return
        d = degrees[i]
        for e in range(rest // d + 1):
            acc.append(e)
            rec(i + 1, rest - e * d, acc)
            acc.pop()

    rec(0, k, [])
    return out


# ---------------------------------------------------------------------------
# truncated Gröbner data


class GroebnerData:
    """Leading terms, standard monomials and normal forms through degree ``d``."""

    def __init__(self, pres: RingPresentation, d: int):
        self.pres = pres
        self.degree = d
        self.degrees = pres.degrees
        self.order = pres.variable_order()
        n = pres.nvars
        self.nvars = n
        self.std: list[list[Monomial]] = []
        self.std_index: list[dict] = []
        self.nf: list[dict] = []  # monomial -> bitset over std[k]
        self.lt_gens: list[Monomial] = []
        self.reduced_basis: list[GradedPolynomial] = []
        self._nf_memo: dict = {}
        rel_by_deg: dict[int, list[GradedPolynomial]] = {}
        for r in pres.relations:
            rel_by_deg.setdefault(r.degree, []).append(r)
        self._rels = rel_by_deg
        for k in range(d + 1):
            self._advance(k)

    def _unit(self, i: int) -> Monomial:
        e = [0] * self.nvars
        e[i] = 1
        return tuple(e)

    def _times(self, m: Monomial, i: int) -> Monomial:
        return m[:i] + (m[i] + 1,) + m[i + 1:]

    def _sort_key(self, m: Monomial):
        return _term_sort_key(m, self.order)

    def _advance(self, k: int) -> None:
        n, degs = self.nvars, self.degrees
        if k == 0:
            zero = (0,) * n
            self.std.append([zero])
            self.std_index.append({zero: 0})
            self.nf.append({zero: 1})
            return
        # candidate monomials x_i * b
        cands: set = set()
        for i in range(n):
            kk = k - degs[i]
            if kk >= 0:
                for b in self.std[kk]:
                    cands.add(self._times(b, i))
        cols = sorted(cands, key=self._sort_key)
        col_of = {m: c for c, m in enumerate(cols)}
        # colbit[i][kk][t] = bit of column x_i * std[kk][t]
        colbit: dict[tuple[int, int], list[int]] = {}

        def bits_for(i: int, kk: int) -> list[int]:
            key = (i, kk)
            v = colbit.get(key)
            if v is None:
                v = [1 << col_of[self._times(b, i)] for b in self.std[kk]]
                colbit[key] = v
            return v

        def x_times(i: int, kk: int, nf_bits: int) -> int:
            cb = bits_for(i, kk)
            row = 0
            for t in int_bits(nf_bits):
                row ^= cb[t]
            return row

        rows: list[int] = []
        for a in range(n):
            for b_ in range(a + 1, n):
                kk = k - degs[a] - degs[b_]
                if kk < 0:
                    continue
                for c in self.std[kk]:
                    ac = self._times(c, a)
                    bc = self._times(c, b_)
                    nf_a = self.nf[kk + degs[a]][ac]
                    nf_b = self.nf[kk + degs[b_]][bc]
                    std_a = self.std_index[kk + degs[a]].get(ac)
                    std_b = self.std_index[kk + degs[b_]].get(bc)
                    if std_a is not None and std_b is not None:
                        continue  # both products standard: the identity is trivial
                    row = x_times(b_, kk + degs[a], nf_a) ^ x_times(a, kk + degs[b_], nf_b)
                    if row:
                        rows.append(row)
        for r in self._rels.get(k, []):
            row = 0
            for m in r.terms:
                i = next(j for j in range(n) if m[j])
                q = m[:i] + (m[i] - 1,) + m[i + 1:]
                kk = k - degs[i]
                row ^= x_times(i, kk, self.normal_form_bits(q, kk))
            if row:
                rows.append(row)
        ncols = len(cols)
        pivot_rows: list[int] = []
        pivots: list[int] = []
        if rows:
            mat = BitMatrix.from_ints(sorted(set(rows)), ncols)
            red, pivots, rk = row_reduce(mat)
            pivot_rows = red.to_ints()[:rk]
        pivot_set = set(pivots)
        std = [m for c, m in enumerate(cols) if c not in pivot_set]
        std_idx = {m: t for t, m in enumerate(std)}
        col_to_std = {col_of[m]: t for m, t in std_idx.items()}
        nf: dict = {m: 1 << t for m, t in std_idx.items()}
        for p, row in zip(pivots, pivot_rows):
            tail = row ^ (1 << p)
            bits = 0
            for c in int_bits(tail):
                bits |= 1 << col_to_std[c]
            nf[cols[p]] = bits
            m = cols[p]
            # minimal leading term: every m / x_j is standard
            minimal = True
            for j in range(n):
                if m[j]:
                    q = m[:j] + (m[j] - 1,) + m[j + 1:]
                    if q not in self.std_index[k - degs[j]]:
                        minimal = False
                        break
            if minimal:
                self.lt_gens.append(m)
                terms = [m] + [std[t] for t in int_bits(bits)]
                self.reduced_basis.append(GradedPolynomial(frozenset(terms), k))
        self.std.append(std)
        self.std_index.append(std_idx)
        self.nf.append(nf)

    def normal_form_bits(self, m: Monomial, k: int | None = None) -> int:
        """Normal form of monomial ``m`` as a bitset over ``std[deg m]``."""
        if k is None:
            k = monomial_degree(m, self.degrees)
        if k > self.degree:
            raise InsufficientTruncation(f"degree {k} beyond truncation {self.degree}")
        hit = self.nf[k].get(m)
        if hit is not None:
            return hit
        hit = self._nf_memo.get(m)
        if hit is not None:
            return hit
        i = next(j for j in range(self.nvars) if m[j])
        q = m[:i] + (m[i] - 1,) + m[i + 1:]
        kk = k - self.degrees[i]
        inner = self.normal_form_bits(q, kk)
        out = 0
        for t in int_bits(inner):
            out ^= self.nf[k][self._times(self.std[kk][t], i)]
        self._nf_memo[m] = out
        return out

    def normal_form(self, p: GradedPolynomial) -> GradedPolynomial:
        bits = 0
        for m in p.terms:
            bits ^= self.normal_form_bits(m, p.degree)
        return GradedPolynomial(frozenset(self.std[p.degree][t] for t in int_bits(bits)), p.degree)

    def reduces_to_zero(self, p: GradedPolynomial) -> bool:
        return p.is_zero() or self.normal_form(p).is_zero()

    def dims(self) -> list[int]:
        return [len(s) for s in self.std]


def groebner_truncated(pres: RingPresentation, d: int) -> GroebnerData:
    return GroebnerData(pres, d)


# ---------------------------------------------------------------------------
# Hilbert series


@dataclass
class HilbertData:
    coefficients: list
    numerator: list | None = None
    denominator_degrees: list | None = None

    def __post_init__(self):
        if any(c < 0 for c in self.coefficients):
            raise ValueError("Hilbert coefficients must be non-negative")

    @property
    def window(self) -> int:
        return len(self.coefficients) - 1


def _poly_mul_trunc(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    return np.convolve(a, b)[: d + 1]


def _one_minus_t(deg: int, d: int) -> np.ndarray:
    out = np.zeros(d + 1, dtype=object)
    out[0] = 1
    if deg <= d:
        out[deg] -= 1
    return out


def _minimalize(gens: list[Monomial]) -> list[Monomial]:
    gens = sorted(set(gens), key=sum)
    out: list[Monomial] = []
    for g in gens:
        if not any(all(a <= b for a, b in zip(h, g)) for h in out):
            out.append(g)
    return out


def monomial_ideal_numerator(gens: Sequence[Monomial], degrees: Sequence[int], d: int) -> np.ndarray:
    """Numerator ``N`` with ``HS(R/J) = N / prod(1 - t^deg x_i)``, truncated at degree ``d``.

    Pivot recursion ``N(J) = N(J + (p)) + t^deg(p) N(J : p)`` on a pure power
    ``p`` of a busiest variable, with coprime generators as the base case.
    """
    gens = [g for g in _minimalize(list(gens)) if monomial_degree(g, degrees) <= d]
    return _numerator_rec(gens, list(degrees), d)


def _numerator_rec(gens: list[Monomial], degrees: list[int], d: int) -> np.ndarray:
    out = np.zeros(d + 1, dtype=object)
    if not gens:
        out[0] = 1
        return out
    supports = [frozenset(i for i, e in enumerate(g) if e) for g in gens]
    if all(not (a & b) for a, b in itertools.combinations(supports, 2)):
        out[0] = 1
        for g in gens:
            out = _poly_mul_trunc(out, _one_minus_t(monomial_degree(g, degrees), d), d)
        return out
    counts = np.zeros(len(degrees), dtype=int)
    for s in supports:
        for i in s:
            counts[i] += 1
    x = int(np.argmax(counts))
    exps = sorted(g[x] for g in gens if g[x])
    e = exps[(len(exps) - 1) // 2]
    p = tuple(e if i == x else 0 for i in range(len(degrees)))
    pdeg = e * degrees[x]
    # J + (p)
    plus = [g for g in gens if g[x] < e] + [p]
    n_plus = _numerator_rec(_minimalize(plus), degrees, d)
    if pdeg > d:
        return n_plus
    colon = [tuple(max(0, a - e) if i == x else a for i, a in enumerate(g)) for g in gens]
    colon = [g for g in _minimalize(colon) if monomial_degree(g, degrees) <= d - pdeg]
    n_colon = _numerator_rec(colon, degrees, d - pdeg)
    shifted = np.zeros(d + 1, dtype=object)
    shifted[pdeg:] = n_colon[: d + 1 - pdeg]
    return n_plus + shifted


def series_from_numerator(num: np.ndarray, denominator_degrees: Sequence[int], d: int) -> list[int]:
    """Coefficients through degree ``d`` of ``num / prod(1 - t^e)``."""
    out = np.zeros(d + 1, dtype=object)
    out[: min(len(num), d + 1)] = num[: d + 1]
    for e in denominator_degrees:
        # divide by (1 - t^e): a_k += a_{k-e}
        for k in range(e, d + 1):
            out[k] += out[k - e]
    return [int(x) for x in out]


def hilbert_coefficients(gb: GroebnerData, d: int) -> HilbertData:
    """``a_0..a_d`` from the leading-term ideal via the pivot recursion."""
    if gb.degree < d:
        raise InsufficientTruncation(f"Gröbner data only through degree {gb.degree}, need {d}")
    num = monomial_ideal_numerator(gb.lt_gens, gb.degrees, d)
    coeffs = series_from_numerator(num, gb.degrees, d)
    return HilbertData(coeffs)


def hilbert_series(pres: RingPresentation, d: int) -> list[int]:
    """Convenience: quotient dimensions ``a_0..a_d`` (standard monomial counts)."""
    return GroebnerData(pres, d).dims()


# ---------------------------------------------------------------------------
# closed forms


@dataclass
class ClosedForm:
    numerator: list
    palindromic: bool
    denominator_degrees: list
    window: int

    def nonzero_coefficients(self) -> list[int]:
        return [c for c in self.numerator if c]

    def support(self) -> list[int]:
        return [i for i, c in enumerate(self.numerator) if c]


def closed_form_match(h: HilbertData, denominator_degrees: Sequence[int],
                      numerator_degree: int | None = None) -> ClosedForm:
    """Numerator ``(sum a_k t^k) * prod(1 - t^e)`` through the window, and its symmetry.

    With ``numerator_degree`` the window must reach that degree.  Without it,
    the numerator must already have vanished on a trailing run as long as the
    largest denominator degree, which is the evidence that it has stopped.
    """
    D = h.window
    num = np.array(h.coefficients, dtype=object)
    for e in denominator_degrees:
        num = _poly_mul_trunc(num, _one_minus_t(e, D), D)
    num = [int(x) for x in num]
    if numerator_degree is not None:
        if D < numerator_degree:
            raise WindowTooShort(f"window 0..{D} cannot determine a degree-{numerator_degree} numerator")
        top = numerator_degree
    else:
        nz = [i for i, c in enumerate(num) if c]
        top = nz[-1] if nz else 0
        if D - top < max(denominator_degrees, default=1):
            raise WindowTooShort("numerator has not visibly stopped inside the window")
    trimmed = num[: top + 1]
    while len(trimmed) > 1 and trimmed[-1] == 0:
        trimmed.pop()
    pal = trimmed == trimmed[::-1]
    return ClosedForm(trimmed, pal, list(denominator_degrees), D)


# ---------------------------------------------------------------------------
# parameters


@dataclass
class ParameterSystem:
    elements: list
    filter_degree_type: list | None = None
    regular: bool | None = None
    filter_regular: bool | None = None
    stable: bool | None = None

    @property
    def degrees(self) -> list[int]:
        return [p.degree for p in self.elements]

    def __post_init__(self):
        for p in self.elements:
            if p.is_zero():
                continue
            if p.degree < 1:
                raise ValueError("parameters must have positive degree")


@dataclass
class RegularityResult:
    status: str  # "regular", "not-regular", "inconclusive"
    failure_index: int | None
    failure_degree: int | None
    verified_prefix: int
    quotient_series: list
    final_top_degree: int | None

    @property
    def regular(self) -> bool:
        return self.status == "regular"


def _top_degree_if_vanishing(coeffs: Sequence[int], window: int) -> int | None:
    """Top nonzero degree when the series vanishes on the last ``window`` slots."""
    D = len(coeffs) - 1
    if window > D:
        return None
    if any(coeffs[D - window + 1:]):
        return None
    nz = [i for i, c in enumerate(coeffs) if c]
    return nz[-1] if nz else -1


def quotient_series(pres: RingPresentation, params: Sequence[GradedPolynomial], d: int) -> list[list[int]]:
    """Hilbert coefficients of ``R/(θ_1..θ_i)`` for ``i = 0..r`` through degree ``d``."""
    out = []
    for i in range(len(params) + 1):
        extra = [p for p in params[:i] if not p.is_zero()]
        out.append(GroebnerData(pres.with_relations(extra), d).dims())
    return out


def regular_sequence_test(pres: RingPresentation, params: ParameterSystem | Sequence[GradedPolynomial],
                          d: int, series: list[list[int]] | None = None) -> RegularityResult:
    """Test ``θ_1..θ_r`` for regularity by comparing Hilbert series through degree ``d``.

    ``θ_i`` is injective on ``R/(θ_1..θ_{i-1})`` in degrees ``<= d - deg θ_i``
    exactly when the series drops by the factor ``(1 - t^deg θ_i)`` through
    degree ``d``.  "regular" additionally requires the final quotient to have
    visibly terminated (zero on a trailing window as long as the largest
    generator degree), so the sequence is a parameter system; otherwise a
    clean comparison is reported as inconclusive.
    """
    elems = list(params.elements if isinstance(params, ParameterSystem) else params)
    qs = series if series is not None else quotient_series(pres, elems, d)
    verified = 0
    for i, th in enumerate(elems):
        e = th.degree if not th.is_zero() else max(1, th.degree)
        prev = np.array(qs[i], dtype=object)
        expect = _poly_mul_trunc(prev, _one_minus_t(e, d), d)
        got = qs[i + 1]
        bad = [k for k in range(d + 1) if got[k] != expect[k]]
        if bad:
            return RegularityResult("not-regular", i, bad[0], verified, qs[-1], None)
        verified += 1
    gmax = max(pres.degrees, default=1)
    top = _top_degree_if_vanishing(qs[-1], gmax)
    status = "regular" if top is not None else "inconclusive"
    return RegularityResult(status, None, None, verified, qs[-1], top)


@dataclass
class FilterRegularResult:
    degree_type: list
    status: str  # "conclusive" or "inconclusive"
    kernel_dims: list  # per step, kernel dimension by degree

    @property
    def conclusive(self) -> bool:
        return self.status == "conclusive"


def filter_regular_test(pres: RingPresentation, params: ParameterSystem | Sequence[GradedPolynomial],
                        d: int, series: list[list[int]] | None = None) -> FilterRegularResult:
    """Filter degree type of ``θ_1..θ_r`` through degree ``d``.

    The kernel of ``θ_{i+1}`` on ``Q_i = R/(θ_1..θ_i)`` in degree ``k`` has
    dimension ``q_i(k) - q_i(k+e) + q_{i+1}(k+e)``.  Entry ``i`` is its top
    degree (-1 when it vanishes), the last entry is the top degree of the final
    quotient.  A kernel or quotient still alive in the trailing window of
    length (largest generator degree) makes the result inconclusive.
    """
    elems = list(params.elements if isinstance(params, ParameterSystem) else params)
    qs = series if series is not None else quotient_series(pres, elems, d)
    gmax = max(pres.degrees + [p.degree for p in elems], default=1)
    dtype: list[int] = []
    kernels = []
    conclusive = True
    for i, th in enumerate(elems):
        e = th.degree
        top_k = d - e
        ker = [qs[i][k] - qs[i][k + e] + qs[i + 1][k + e] for k in range(top_k + 1)]
        kernels.append(ker)
        nz = [k for k, v in enumerate(ker) if v]
        dtype.append(nz[-1] if nz else -1)
        if top_k < gmax or any(ker[max(0, top_k - gmax + 1):]):
            conclusive = False
    top = _top_degree_if_vanishing(qs[-1], gmax)
    if top is None:
        conclusive = False
        nz = [k for k, v in enumerate(qs[-1]) if v]
        top = nz[-1] if nz else -1
    dtype.append(top)
    return FilterRegularResult(dtype, "conclusive" if conclusive else "inconclusive", kernels)


def depth_bounds(pres: RingPresentation, params: ParameterSystem | Sequence[GradedPolynomial], center_rank: int,
                 d: int) -> tuple[int, int]:
    """(Duflot lower bound, length of the longest verified regular prefix)."""
    res = regular_sequence_test(pres, params, d)
    return center_rank, res.verified_prefix


# ---------------------------------------------------------------------------
# Dickson invariants


def _poly_dict_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ma in a:
        for mb in b:
            m = tuple(x + y for x, y in zip(ma, mb))
            if m in out:
                del out[m]
            else:
                out[m] = 1
    return out


def dickson_invariants(r: int) -> list[GradedPolynomial]:
    """Dickson invariants of degrees ``2^r - 2^i`` (``i = r-1 .. 0``) in ``F2[x_1..x_r]``.

    Read off from ``prod_v (X + v) = X^(2^r) + sum_i c_i X^(2^i)`` over all
    linear forms ``v``.
    """
    if r < 1:
        raise ValueError("rank must be positive")
    zero = (0,) * r
    # polynomial in X: dict power -> coefficient dict (monomial -> 1)
    prod: dict[int, dict] = {0: {zero: 1}}
    for coeffs in itertools.product([0, 1], repeat=r):
        lin = {tuple(int(j == i) for j in range(r)): 1 for i in range(r) if coeffs[i]}
        new: dict[int, dict] = {}
        for p, c in prod.items():
            # times X
            tgt = new.setdefault(p + 1, {})
            for m in c:
                if m in tgt:
                    del tgt[m]
                else:
                    tgt[m] = 1
            if lin:
                tgt0 = new.setdefault(p, {})
                for m in _poly_dict_mul(c, lin):
                    if m in tgt0:
                        del tgt0[m]
                    else:
                        tgt0[m] = 1
        prod = {p: c for p, c in new.items() if c}
    out = []
    for i in range(r - 1, -1, -1):
        c = prod.get(2 ** i, {})
        out.append(GradedPolynomial(frozenset(c), 2 ** r - 2 ** i))
    return out


def substitute_linear(p: GradedPolynomial, matrix: np.ndarray) -> GradedPolynomial:
    """Substitute ``x_j -> sum_i matrix[i, j] x_i`` (degree-1 variables)."""
    r = matrix.shape[0]
    images = [{tuple(int(k == i) for k in range(r)): 1 for i in range(r) if matrix[i, j]} for j in range(r)]
    total: dict = {}
    for m in p.terms:
        acc = {(0,) * r: 1}
        for j, e in enumerate(m):
            for _ in range(e):
                acc = _poly_dict_mul(acc, images[j])
        for t in acc:
            if t in total:
                del total[t]
            else:
                total[t] = 1
    return GradedPolynomial(frozenset(total), p.degree)


def general_linear_group(r: int) -> list[np.ndarray]:
    out = []
    for bits in itertools.product([0, 1], repeat=r * r):
        m = np.array(bits, dtype=np.uint8).reshape(r, r)
        if row_reduce(BitMatrix.from_dense(m))[2] == r:
            out.append(m)
    return out


# ---------------------------------------------------------------------------
# completion


@dataclass
class CompletionVerdict:
    verdict: str  # "complete", "not-yet", "inconclusive"
    mode: str
    reason: str
    bound: int | None = None


def completion_test(tau: RingPresentation, params: ParameterSystem | Sequence[GradedPolynomial], n: int, *,
                    oracle_dims: Sequence[int] | None = None, window: tuple[int, int] | None = None,
                    series_degree: int | None = None) -> CompletionVerdict:
    """Decide whether the presentation ``tau`` computed through degree ``n`` is complete.

    Bound mode (default): the parameters must be filter-regular on ``tau``
    with a conclusive degree type ``(d_0..d_r)``; the verdict is complete when
    ``n >= sum(deg θ_i - 1)`` and every ``d_i <= n``.  This is an operational
    rendering of the degree bound; see the README for its status.

    Oracle mode (``oracle_dims`` given): complete iff the Hilbert coefficients
    of ``tau`` equal ``oracle_dims`` on every degree of ``window``.
    """
    elems = list(params.elements if isinstance(params, ParameterSystem) else params)
    if oracle_dims is not None:
        lo, hi = window if window is not None else (0, len(oracle_dims) - 1)
        if hi < lo:
            return CompletionVerdict("inconclusive", "oracle", "empty verification window")
        if hi >= len(oracle_dims):
            raise WindowTooShort("oracle dimensions do not cover the window")
        dims = hilbert_series(tau, hi)
        bad = [k for k in range(lo, hi + 1) if dims[k] != oracle_dims[k]]
        if bad:
            return CompletionVerdict("not-yet", "oracle", f"dimension mismatch in degree {bad[0]}")
        return CompletionVerdict("complete", "oracle", f"dimensions agree on degrees {lo}..{hi}")
    bound = sum(p.degree - 1 for p in elems)
    d = series_degree if series_degree is not None else max(n, bound) + 2 * max(tau.degrees + [1])
    fr = filter_regular_test(tau, elems, d)
    if not fr.conclusive:
        return CompletionVerdict("inconclusive", "bound", "filter degree type not determined in the window", bound)
    if fr.degree_type[-1] < 0 and len(elems) == 0:
        raise ValueError("parameters are not filter-regular")
    if n < bound:
        return CompletionVerdict("not-yet", "bound", f"degree {n} below the bound {bound}", bound)
    if any(t > n for t in fr.degree_type):
        return CompletionVerdict("not-yet", "bound", f"filter degree type {fr.degree_type} exceeds {n}", bound)
    return CompletionVerdict("complete", "bound", f"filter degree type {fr.degree_type}, bound {bound}", bound)


# ---------------------------------------------------------------------------
# building presentations from evaluations


@dataclass
class BuiltGenerator:
    generator: Generator
    image: np.ndarray


class PresentationBuilder:
    """Grow ``τ_k`` degree by degree from images in a graded target algebra.

    ``multiply(vec, i, k)`` must return the image of ``vec * x_i`` where
    ``vec`` lies in degree ``k`` of the target and ``x_i`` is generator ``i``.
    ``kind_of(vec, k)`` labels a new generator ``b`` or ``c``.
    """

    def __init__(self, multiply: Callable[[np.ndarray, int, int], np.ndarray],
                 kind_of: Callable[[np.ndarray, int], str] | None = None):
        self.multiply = multiply
        self.kind_of = kind_of or (lambda vec, k: "b")
        self.gens: list[BuiltGenerator] = []
        self.relations: list[GradedPolynomial] = []
        self.degree = 0
        self._images: dict = {}
        self.log: list[str] = []

    def presentation(self) -> RingPresentation:
        n = len(self.gens)
        return RingPresentation([g.generator for g in self.gens], [r.pad(n) for r in self.relations], self.degree)

    def image(self, m: Monomial, k: int) -> np.ndarray:
        m = tuple(m) + (0,) * (len(self.gens) - len(m))
        hit = self._images.get(m)
        if hit is not None:
            return hit
        i = max(j for j in range(len(m)) if m[j])
        q = m[:i] + (m[i] - 1,) + m[i + 1:]
        d = self.gens[i].generator.degree
        if sum(q) == 0:
            out = self.gens[i].image.copy()
        else:
            out = self.multiply(self.image(q, k - d), i, k - d)
        out = np.asarray(out, dtype=np.uint8) & 1
        self._images[m] = out
        return out

    def step(self, k: int, target: SubspaceBasis) -> tuple[int, int]:
        """Advance to degree ``k`` with ``target`` the degree-k subspace to be spanned.

        Returns (new generators, new relations).
        """
        if k != self.degree + 1:
            raise ValueError("degrees must be processed in order")
        pres = self.presentation()
        std: list[Monomial] = []
        if pres.nvars:
            gb = GroebnerData(pres, k)
            std = gb.std[k]
        imgs = [self.image(m, k) for m in std]
        amb = target.ambient_dim
        new_rels = 0
        if imgs:
            mat = np.array(imgs, dtype=np.uint8).reshape(len(imgs), amb)
            for v in imgs:
                if not target.contains(v):
                    raise AssertionError(f"degree {k}: a product left the target subspace")
            kern = nullspace_basis(BitMatrix.from_dense(mat.T)) if amb else SubspaceBasis.full(len(imgs))
            n = len(self.gens)
            for row in kern.vectors():
                terms = [std[t] for t in np.flatnonzero(row)]
                self.relations.append(GradedPolynomial(frozenset(tuple(t) for t in terms), k))
                new_rels += 1
        ech = IntEchelon()
        for v in imgs:
            ech.add(BitMatrix.from_dense(v.reshape(1, -1)).row_int(0) if amb else 0)
        new_gens = 0
        per_degree = sum(1 for g in self.gens if g.generator.degree == k)
        for vec in target.vectors():
            vint = BitMatrix.from_dense(vec.reshape(1, -1)).row_int(0)
            if ech.add(vint):
                kind = self.kind_of(vec, k)
                label = f"{kind}_{k}_{per_degree + new_gens}"
                self.gens.append(BuiltGenerator(Generator(label, k, kind), vec.astype(np.uint8)))
                e = [0] * len(self.gens)
                e[-1] = 1
                self._images[tuple(e)] = vec.astype(np.uint8)
                new_gens += 1
        # pad cached monomials to the new generator count
        if new_gens:
            n = len(self.gens)
            self._images = {tuple(m) + (0,) * (n - len(m)): v for m, v in self._images.items()}
        self.degree = k
        self.log.append(f"degree {k}: {len(std)} standard monomials, {new_rels} new relations, "
                        f"{new_gens} new generators, target dim {target.dim}")
        return new_gens, new_rels
