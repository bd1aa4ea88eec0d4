"""
Exact arithmetic in the complex Clifford algebra C_N.

An element is a sparse map from mode masks to complex coefficients. Bit ``k``
of a mask stands for the Majorana generator ``c_{k+1}``: modes are 1-based in
every user-facing string and 0-based inside masks. :func:`mask_from_modes`
and :func:`modes_from_mask` are the only places that translate between them.

Monomials are stored in strictly increasing mode order, so the product of two
monomials only needs the reordering sign

    c_S c_T = (-1)^{#{(s, t) in S x T : s > t}} c_{S xor T},

which is computed with integer bit counting and never rounds.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Iterable, Mapping
from numbers import Number
from types import MappingProxyType

MAX_MODES = 24
PRUNE_TOL = 1e-14


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"


def check_modes(n_modes: int, cap: int = MAX_MODES) -> int:
    if isinstance(n_modes, bool) or not isinstance(n_modes, int):
        raise TypeError(f"mode count must be an int, got {type(n_modes).__name__}")
    if n_modes < 1:
        raise ValueError(f"mode count must be >= 1, got {n_modes}")
    if n_modes > cap:
        raise ValueError(f"mode count {n_modes} exceeds cap {cap}")
    return n_modes


def check_mask(n_modes: int, mask: int) -> int:
    if mask < 0 or mask >> n_modes:
        raise ValueError(f"mask {mask:#x} has bits outside {n_modes} modes")
    return mask


def mask_from_modes(modes: Iterable[int]) -> int:
    """Mask for a collection of 1-based mode labels."""
    mask = 0
    for m in modes:
        if m < 1:
            raise ValueError(f"mode labels are 1-based, got {m}")
        mask |= 1 << (m - 1)
    return mask


def modes_from_mask(mask: int) -> tuple[int, ...]:
    """1-based mode labels present in ``mask``, increasing."""
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k + 1)
        mask >>= 1
        k += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return mask.bit_count()


def reorder_sign(s: int, t: int) -> int:
    """Sign picked up when ``c_S c_T`` is brought to increasing order."""
    swaps = 0
    while t:
        low = t & -t
        # elements of S above this element of T must hop over it
        swaps += popcount(s & ~((low << 1) - 1))
        t ^= low
    return -1 if swaps & 1 else 1


def reversal_sign(mask: int) -> int:
    """Sign of reversing the generator order of ``c_S``."""
    k = popcount(mask)
    return -1 if (k * (k - 1) // 2) & 1 else 1


def _canonical(terms: Mapping[int, complex]) -> dict[int, complex]:
    return {m: complex(c) for m, c in sorted(terms.items()) if abs(c) > PRUNE_TOL}


class CliffordElement:
    """Immutable element of C_N; ``terms`` maps mode masks to coefficients."""

    __slots__ = ("_n", "_terms")

    def __init__(self, n_modes: int, terms: Mapping[int, complex] | None = None):
        check_modes(n_modes)
        clean = _canonical(terms or {})
        for m in clean:
            check_mask(n_modes, m)
        object.__setattr__(self, "_n", n_modes)
        object.__setattr__(self, "_terms", MappingProxyType(clean))

    def __setattr__(self, name, value):
        raise AttributeError("CliffordElement is immutable")

    @property
    def n_modes(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[int, complex]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def coefficient(self, mask: int) -> complex:
        return self._terms.get(mask, 0j)

    def is_zero(self) -> bool:
        return not self._terms

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> CliffordElement:
        if isinstance(other, CliffordElement):
            if other._n != self._n:
                raise ValueError(f"mode count mismatch: {self._n} vs {other._n}")
            return other
        if isinstance(other, Number):
            return CliffordElement(self._n, {0: complex(other)})
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0j) + c
        return CliffordElement(self._n, out)

    __radd__ = __add__

    def __neg__(self):
        return CliffordElement(self._n, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return CliffordElement(self._n, {m: c * other for m, c in self._terms.items()})
        if isinstance(other, CliffordElement):
            return mul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self * (1 / other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return self._n == other._n and dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash((self._n, tuple(self._terms.items())))

    def isclose(self, other: CliffordElement, atol: float = 1e-12) -> bool:
        other = self._coerce(other)
        diff = self - other
        return all(abs(c) <= atol for c in diff._terms.values())

    def max_abs_diff(self, other: CliffordElement) -> float:
        diff = self - self._coerce(other)
        return max((abs(c) for c in diff._terms.values()), default=0.0)

    def __repr__(self):
        return f"CliffordElement({self._n}, {format_element(self)!r})"

    def __str__(self):
        return format_element(self)


# constructors ---------------------------------------------------------------


def monomial(n_modes: int, mask: int) -> CliffordElement:
    check_modes(n_modes)
    check_mask(n_modes, mask)
    return CliffordElement(n_modes, {mask: 1.0})


def identity(n_modes: int) -> CliffordElement:
    return monomial(n_modes, 0)


def scalar(n_modes: int, value: complex) -> CliffordElement:
    return CliffordElement(n_modes, {0: value})


def generator(n_modes: int, mode: int) -> CliffordElement:
    """The generator ``c_mode`` (1-based)."""
    if not 1 <= mode <= n_modes:
        raise ValueError(f"mode {mode} outside 1..{n_modes}")
    return monomial(n_modes, 1 << (mode - 1))


def generators(n_modes: int) -> list[CliffordElement]:
    return [generator(n_modes, k) for k in range(1, n_modes + 1)]


def product(n_modes: int, factors: Iterable[CliffordElement]) -> CliffordElement:
    out = identity(n_modes)
    for f in factors:
        out = mul(out, f)
    return out


# algebra operations ---------------------------------------------------------


def mul(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    if a.n_modes != b.n_modes:
        raise ValueError(f"mode count mismatch: {a.n_modes} vs {b.n_modes}")
    out: dict[int, complex] = {}
    for s, x in a.terms.items():
        for t, y in b.terms.items():
            m = s ^ t
            out[m] = out.get(m, 0j) + reorder_sign(s, t) * (x * y)
    return CliffordElement(a.n_modes, out)


def star(a: CliffordElement) -> CliffordElement:
    """Antilinear involution fixing every generator."""
    return CliffordElement(
        a.n_modes, {m: reversal_sign(m) * c.conjugate() for m, c in a.terms.items()}
    )


def omega(a: CliffordElement) -> complex:
    """The trace-like state: coefficient of the identity monomial."""
    return a.coefficient(0)


def theta(a: CliffordElement) -> CliffordElement:
    """Grading automorphism ``c_i -> -c_i``."""
    return CliffordElement(
        a.n_modes, {m: (-c if popcount(m) & 1 else c) for m, c in a.terms.items()}
    )


def even_part(a: CliffordElement) -> CliffordElement:
    return CliffordElement(a.n_modes, {m: c for m, c in a.terms.items() if not popcount(m) & 1})


def odd_part(a: CliffordElement) -> CliffordElement:
    return CliffordElement(a.n_modes, {m: c for m, c in a.terms.items() if popcount(m) & 1})


def parity(a: CliffordElement) -> Parity:
    """Grading of ``a``; the zero element counts as even."""
    odd = {popcount(m) & 1 for m in a.terms}
    if odd == {1}:
        return Parity.ODD
    if len(odd) == 2:
        return Parity.MIXED
    return Parity.EVEN


def commutator(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return mul(a, b) - mul(b, a)


def anticommutator(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return mul(a, b) + mul(b, a)


def complex_fermion_modes(n_modes: int) -> list[tuple[CliffordElement, CliffordElement]]:
    """Pairs ``(a_k, a_k^*)`` with ``a_k = (c_{2k-1} + i c_{2k}) / 2``."""
    check_modes(n_modes)
    if n_modes % 2:
        raise ValueError(f"complex fermion modes need an even mode count, got {n_modes}")
    pairs = []
    for k in range(1, n_modes // 2 + 1):
        a = generator(n_modes, 2 * k - 1)
        b = generator(n_modes, 2 * k)
        pairs.append(((a + 1j * b) * 0.5, (a - 1j * b) * 0.5))
    return pairs


# text format ----------------------------------------------------------------


def _fmt_real(x: float) -> str:
    if x == 0:
        return "0"
    return format(x, ".12g")


def format_monomial(mask: int) -> str:
    if not mask:
        return "1"
    return "".join(f"c{m}" for m in modes_from_mask(mask))


def format_element(a: CliffordElement) -> str:
    """Serialize as ``(re,im) c1c2 + (3,0) 1``; the zero element is ``0``."""
    if a.is_zero():
        return "0"
    return " + ".join(
        f"({_fmt_real(c.real)},{_fmt_real(c.imag)}) {format_monomial(m)}"
        for m, c in a.terms.items()
    )


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_TERM_RE = re.compile(
    rf"""\s*
    (?P<sign>[-+])?\s*
    (?:
        \(\s*(?P<re>{_NUM})\s*,\s*(?P<im>{_NUM})\s*\)   # (re,im)
      | (?P<num>{_NUM})?(?P<i>[ij])?\*?                 # 2, 2i, i, 0.5j
    )\s*
    (?P<mono>(?:c\d+\s*)+|1)?\s*
    """,
    re.VERBOSE,
)


def parse_element(n_modes: int, text: str) -> CliffordElement:
    """
    Parse a sum of terms into an element of C_N.

    Coefficients may be written as ``(re,im)``, a real number, or a number with
    an ``i`` suffix (``2i``, ``i``, ``-0.5i``). A monomial is ``1`` or a run of
    generators such as ``c1c3``; runs that are not in increasing order are
    multiplied out, so ``c2c1`` parses to ``-c1c2``.
    """
    check_modes(n_modes)
    s = text.strip()
    if not s:
        raise ValueError("empty element expression")
    if s == "0":
        return CliffordElement(n_modes)
    total = CliffordElement(n_modes)
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse element at {s[pos:]!r}")
        if not first and m.group("sign") is None:
            raise ValueError(f"missing '+' or '-' before {s[pos:]!r}")
        if m.group("re") is not None:
            coef = complex(float(m.group("re")), float(m.group("im")))
        else:
            num, im = m.group("num"), m.group("i")
            if num is None and im is None and m.group("mono") is None:
                raise ValueError(f"empty term at {s[pos:]!r}")
            coef = complex(float(num) if num is not None else 1.0)
            if im:
                coef *= 1j
        if m.group("sign") == "-":
            coef = -coef
        mono = m.group("mono")
        if mono is None or mono.strip() == "1":
            term = scalar(n_modes, coef)
        else:
            labels = [int(x) for x in re.findall(r"c(\d+)", mono)]
            term = product(n_modes, (generator(n_modes, k) for k in labels)) * coef
        total = total + term
        pos = m.end()
        first = False
    return total
