"""
Bipartitions of C_N and separability decisions.

A bipartition splits the modes into two sets; the local subalgebras are
generated by the generators on each side. Every ``Entangled`` verdict carries
a witness that :func:`verify_witness` re-evaluates from scratch through the
Pauli-string representation, independently of the GNS tables.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import matrix_rep
from .clifford import (
    CliffordElement,
    check_mask,
    check_modes,
    format_element,
    format_monomial,
    generator,
    modes_from_mask,
    monomial,
    mul,
    omega,
    popcount,
    reorder_sign,
)
from .gns import (
    GnsRep,
    GnsVector,
    RestrictedBlock,
    RestrictedState,
    build_gns,
    check_restricted,
    is_pure_on_algebra,
    monomial_expectations,
)

DEFAULT_TOL = 1e-10
BOUNDARY_SLACK = 1e-12
C2_CONVENTIONS = ("e", "g")

State = Union[GnsVector, RestrictedState]


class Verdict(enum.Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Bipartition:
    n_modes: int
    first: int
    second: int

    def __post_init__(self):
        check_modes(self.n_modes)
        check_mask(self.n_modes, self.first)
        check_mask(self.n_modes, self.second)
        full = (1 << self.n_modes) - 1
        if self.first & self.second:
            raise ValueError("bipartition halves overlap")
        if self.first | self.second != full:
            raise ValueError("bipartition halves do not cover all modes")
        if not self.first or not self.second:
            raise ValueError("bipartition halves must both be nonempty")

    @classmethod
    def from_modes(cls, n_modes: int, first_modes) -> Bipartition:
        """``first_modes`` are 1-based labels; the complement forms the second half."""
        first = 0
        for m in first_modes:
            if not 1 <= m <= n_modes:
                raise ValueError(f"mode {m} outside 1..{n_modes}")
            first |= 1 << (m - 1)
        return cls(n_modes, first, ((1 << n_modes) - 1) & ~first)

    @classmethod
    def prefix(cls, n_modes: int, p: int) -> Bipartition:
        """First ``p`` modes against the rest."""
        return cls.from_modes(n_modes, range(1, p + 1))

    @classmethod
    def balanced(cls, n_modes: int) -> Bipartition:
        return cls.prefix(n_modes, n_modes // 2)

    def local_masks(self, side: int, nonempty: bool = True) -> list[int]:
        """All sub-masks of one half in increasing order."""
        half = self.first if side == 0 else self.second
        out = [m for m in range(1 << self.n_modes) if m & ~half == 0]
        return [m for m in out if m] if nonempty else out

    def describe(self) -> str:
        a = ",".join(map(str, modes_from_mask(self.first)))
        b = ",".join(map(str, modes_from_mask(self.second)))
        return f"{{{a}}}|{{{b}}}"


def local_factor(a: CliffordElement, bp: Bipartition) -> tuple[CliffordElement, CliffordElement, int]:
    """Split a monomial as ``c_S = sign * c_{S & first} * c_{S & second}``."""
    if a.n_modes != bp.n_modes:
        raise ValueError(f"mode count mismatch: element {a.n_modes}, bipartition {bp.n_modes}")
    if len(a.terms) != 1:
        raise ValueError("local_factor needs a single monomial")
    ((mask, coef),) = a.terms.items()
    if coef != 1:
        raise ValueError("local_factor needs a monomial with unit coefficient")
    s1, s2 = mask & bp.first, mask & bp.second
    # c_{s1} c_{s2} = reorder_sign * c_S
    return monomial(a.n_modes, s1), monomial(a.n_modes, s2), reorder_sign(s1, s2)


@dataclass(frozen=True)
class Witness:
    """
    Re-checkable entanglement evidence.

    ``factorization``: joint ``<c_{S1} c_{S2}>`` differs from ``<c_{S1}><c_{S2}>``.
    ``odd_odd``: nonzero ``<c_{S1} c_{S2}>`` with both masks odd.
    ``linear``: ``<operator>`` exceeds ``bound``, the maximum over separable states.
    """

    kind: str
    first_mask: int = 0
    second_mask: int = 0
    value: complex = 0j
    product: complex = 0j
    operator: Optional[CliffordElement] = None
    bound: float = 0.0

    def element(self, n_modes: int) -> CliffordElement:
        if self.operator is not None:
            return self.operator
        return mul(monomial(n_modes, self.first_mask), monomial(n_modes, self.second_mask))

    def violation(self) -> float:
        if self.kind == "factorization":
            return abs(self.value - self.product)
        if self.kind == "odd_odd":
            return abs(self.value)
        return float(self.value.real) - self.bound

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.operator is None:
            out["first"] = format_monomial(self.first_mask)
            out["second"] = format_monomial(self.second_mask)
        else:
            out["operator"] = format_element(self.operator)
            out["bound"] = self.bound
        out["value"] = [self.value.real, self.value.imag]
        if self.kind == "factorization":
            out["product"] = [self.product.real, self.product.imag]
        out["violation"] = self.violation()
        return out


@dataclass(frozen=True)
class SeparabilityVerdict:
    verdict: Verdict
    witness: Optional[Witness] = None
    certificate: Optional[dict] = None
    reason: str = ""
    residual: float = 0.0
    tolerance: float = DEFAULT_TOL

    @property
    def tag(self) -> str:
        return self.verdict.value

    def to_dict(self) -> dict:
        out: dict = {"verdict": self.verdict.value}
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.reason:
            out["reason"] = self.reason
        out["residual"] = self.residual
        out["tolerance"] = self.tolerance
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# --- independent oracle -------------------------------------------------------


def _oracle_vector_expectation(v: GnsVector, a: CliffordElement) -> complex:
    """``Omega(x^* a x)`` for ``v = x|Omega>`` as a normalised matrix trace."""
    rep = matrix_rep.build_irrep(v.n_modes)
    m = matrix_rep.represent(v.to_element(), rep)
    ma = matrix_rep.represent(a, rep)
    return complex(np.trace(m.conj().T @ ma @ m) / rep.dim)


def oracle_expectation(state: Union[State, np.ndarray], a: CliffordElement) -> complex:
    """Expectation through the Pauli-string representation only."""
    if isinstance(state, GnsVector):
        return _oracle_vector_expectation(state, a)
    rho = state.full_density() if isinstance(state, RestrictedState) else np.asarray(state)
    n_modes = a.n_modes
    evals, evecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    total = 0j
    for p, col in zip(evals, evecs.T):
        if p > 1e-14:
            total += p * _oracle_vector_expectation(GnsVector.from_dense(n_modes, col), a)
    return total


def verify_witness(state: Union[State, np.ndarray], witness: Witness, n_modes: int, tol: float = DEFAULT_TOL) -> bool:
    """Recompute the witness expectations in the matrix oracle and check the violation."""
    if witness.kind == "factorization":
        s1 = monomial(n_modes, witness.first_mask)
        s2 = monomial(n_modes, witness.second_mask)
        joint = oracle_expectation(state, mul(s1, s2))
        prod = oracle_expectation(state, s1) * oracle_expectation(state, s2)
        return abs(joint - prod) > tol / 2
    value = oracle_expectation(state, witness.element(n_modes))
    if witness.kind == "odd_odd":
        return abs(value) > tol / 2
    return value.real - witness.bound > tol / 2


# --- pure states ------------------------------------------------------------


def factorization_residuals(rep: GnsRep, state: State, bp: Bipartition) -> tuple[float, int, int, complex, complex]:
    """Largest ``|<c_{S1} c_{S2}> - <c_{S1}><c_{S2}>|`` over nonempty local masks."""
    ex = monomial_expectations(rep, state)
    best = (-1.0, 0, 0, 0j, 0j)
    for s1 in bp.local_masks(0):
        for s2 in bp.local_masks(1):
            joint = reorder_sign(s1, s2) * ex[s1 | s2]
            prod = ex[s1] * ex[s2]
            d = abs(joint - prod)
            if d > best[0]:
                best = (d, s1, s2, complex(joint), complex(prod))
    return best


def _check_state(rep: GnsRep, state: State, bp: Bipartition) -> None:
    if rep.n_modes != bp.n_modes:
        raise ValueError(f"mode count mismatch: rep {rep.n_modes}, bipartition {bp.n_modes}")
    if isinstance(state, GnsVector):
        if state.n_modes != rep.n_modes:
            raise ValueError("state and representation have different mode counts")
        if not state.is_normalized():
            raise ValueError(f"state is not normalised (norm^2 = {state.norm_sq()})")
    else:
        check_restricted(state)


def pure_factorization_test(rep: GnsRep, psi: GnsVector, bp: Bipartition, tol: float = DEFAULT_TOL) -> SeparabilityVerdict:
    """
    Product test on all local monomial pairs.

    Vanishing residuals mean the state is a product state and hence separable
    whether or not it is pure. A nonzero residual proves entanglement only for
    a pure state; otherwise the verdict is Unknown.
    """
    _check_state(rep, psi, bp)
    d, s1, s2, joint, prod = factorization_residuals(rep, psi, bp)
    if d <= tol:
        return SeparabilityVerdict(
            Verdict.SEPARABLE,
            certificate={"kind": "product", "max_residual": d},
            residual=d,
            tolerance=tol,
        )
    if not is_pure_on_algebra(psi):
        return SeparabilityVerdict(Verdict.UNKNOWN, reason="not pure", residual=d, tolerance=tol)
    w = Witness("factorization", s1, s2, joint, prod)
    return SeparabilityVerdict(Verdict.ENTANGLED, witness=w, residual=d, tolerance=tol)


def odd_odd_witness(rep: GnsRep, state: State, bp: Bipartition, tol: float = DEFAULT_TOL) -> Optional[Witness]:
    """First odd-odd local monomial with nonvanishing expectation, if any."""
    _check_state(rep, state, bp)
    ex = monomial_expectations(rep, state)
    for s1 in bp.local_masks(0):
        if not popcount(s1) & 1:
            continue
        for s2 in bp.local_masks(1):
            if not popcount(s2) & 1:
                continue
            val = reorder_sign(s1, s2) * ex[s1 | s2]
            if abs(val) > tol:
                return Witness("odd_odd", s1, s2, complex(val))
    return None


# --- C_2 ------------------------------------------------------------------------


@dataclass(frozen=True)
class C2State:
    """
    State on C_2 as a 2x2 matrix in a separable block basis.

    ``lambda_ij = <e_i|rho|e_j>`` with ``c1 -> sigma_3`` and ``c2 -> sigma_1``
    in that basis; ``basis_convention`` names the basis family ("e" or "g").
    """

    lambda11: float
    lambda22: float
    lambda12: complex
    basis_convention: str = "e"

    def __post_init__(self):
        if self.basis_convention not in C2_CONVENTIONS:
            raise ValueError(f"C2State basis must be one of {C2_CONVENTIONS}, got {self.basis_convention!r}")
        if min(self.lambda11, self.lambda22) < -BOUNDARY_SLACK:
            raise ValueError("diagonal entries must be non-negative")
        if abs(self.lambda11 + self.lambda22 - 1) > BOUNDARY_SLACK:
            raise ValueError(f"trace is {self.lambda11 + self.lambda22}, expected 1")
        if self.lambda11 * self.lambda22 < abs(self.lambda12) ** 2 - BOUNDARY_SLACK:
            raise ValueError("matrix is not positive semi-definite")

    def matrix(self) -> np.ndarray:
        l12 = complex(self.lambda12)
        return np.array([[self.lambda11, l12], [l12.conjugate(), self.lambda22]], dtype=complex)

    def to_restricted(self) -> RestrictedState:
        from .rep_decomp import e_basis, g_basis

        basis = e_basis(2) if self.basis_convention == "e" else g_basis(2)
        return RestrictedState(basis, (RestrictedBlock(1.0, self.matrix(), (0,)),))


def _c2_generators_image() -> tuple[np.ndarray, np.ndarray]:
    return matrix_rep.pauli(3), matrix_rep.pauli(1)


def c2_classify(s: C2State) -> SeparabilityVerdict:
    l11, l22, l12 = s.lambda11, s.lambda22, complex(s.lambda12)
    rho = s.matrix()
    m1, m2 = _c2_generators_image()
    if abs(l12.imag) > BOUNDARY_SLACK:
        # <c1 c2> = Tr[rho sigma_3 sigma_1] is purely imaginary and nonzero
        val = complex(np.trace(rho @ m1 @ m2))
        w = Witness("odd_odd", 1, 2, val)
        return SeparabilityVerdict(Verdict.ENTANGLED, witness=w, residual=abs(val), tolerance=BOUNDARY_SLACK)
    a = abs(l12.real)
    if l11 >= a - BOUNDARY_SLACK and l22 >= a - BOUNDARY_SLACK:
        if l12.real >= 0:
            mu = (l11 - a, l22 - a, 2 * a, 0.0)
        else:
            mu = (l11 - a, l22 - a, 0.0, 2 * a)
        mu = tuple(max(0.0, float(x)) for x in mu)
        return SeparabilityVerdict(
            Verdict.SEPARABLE,
            certificate={"kind": "convex", "states": ["e1", "e2", "psi3", "psi4"], "weights": list(mu)},
            residual=max(0.0, a - min(l11, l22)),
            tolerance=BOUNDARY_SLACK,
        )
    # separable states satisfy |<c1>| + |<c2>| <= 1
    z = float(np.real(np.trace(rho @ m1)))
    x = float(np.real(np.trace(rho @ m2)))
    op = CliffordElement(2, {1: math.copysign(1.0, z), 2: math.copysign(1.0, x)})
    w = Witness("linear", operator=op, value=complex(abs(z) + abs(x)), bound=1.0)
    return SeparabilityVerdict(Verdict.ENTANGLED, witness=w, residual=w.violation(), tolerance=BOUNDARY_SLACK)


def c2_convex_oracle(s: C2State) -> SeparabilityVerdict:
    """
    Feasibility of ``rho = mu1 e1 + mu2 e2 + mu3 psi3 + mu4 psi4``, ``mu >= 0``.

    With ``mu1`` free the other weights are affine in it; feasibility is a
    non-empty interval for ``mu1``.
    """
    l12 = complex(s.lambda12)
    if l12.imag != 0:
        raise ValueError("convex oracle needs a real lambda12")
    l11, l22, r = s.lambda11, s.lambda22, l12.real
    # mu4 = l11 - r - mu1, mu3 = l11 + r - mu1, mu2 = l22 - l11 + mu1
    lo = max(0.0, l11 - l22)
    hi = min(l11 - r, l11 + r)
    if lo <= hi + BOUNDARY_SLACK:
        mu1 = lo
        mu = (mu1, l22 - l11 + mu1, l11 + r - mu1, l11 - r - mu1)
        return SeparabilityVerdict(
            Verdict.SEPARABLE,
            certificate={"kind": "convex", "states": ["e1", "e2", "psi3", "psi4"], "weights": [max(0.0, x) for x in mu]},
            residual=max(0.0, lo - hi),
            tolerance=BOUNDARY_SLACK,
        )
    return SeparabilityVerdict(
        Verdict.ENTANGLED,
        certificate={"kind": "infeasible", "interval": [lo, hi]},
        reason="no non-negative convex weights",
        residual=lo - hi,
        tolerance=BOUNDARY_SLACK,
    )


# --- general states ---------------------------------------------------------------


def _check_pairs_unsplit(bp: Bipartition) -> None:
    for k in range(bp.n_modes // 2):
        pair = 0b11 << (2 * k)
        if bp.first & pair not in (0, pair):
            raise ValueError(f"bipartition {bp.describe()} splits the mode pair ({2 * k + 1},{2 * k + 2})")


def diagonal_form_check(s: RestrictedState, bp: Bipartition, tol: float = DEFAULT_TOL) -> SeparabilityVerdict:
    """
    Separable if the state is diagonal in the f-basis, Entangled if an
    odd-odd witness exists, Unknown otherwise.

    The bipartition must keep every f-basis mode pair on one side.
    """
    if s.basis.family != "f":
        raise ValueError(f"diagonal_form_check needs an f-basis state, got family {s.basis.family!r}")
    if s.basis.n_modes != bp.n_modes:
        raise ValueError("state and bipartition have different mode counts")
    _check_pairs_unsplit(bp)
    check_restricted(s)
    off = 0.0
    for t in s.types:
        if t.weight > tol:
            d = t.density
            off = max(off, float(np.max(np.abs(d - np.diag(np.diag(d))), initial=0.0)))
    if off <= tol:
        return SeparabilityVerdict(
            Verdict.SEPARABLE,
            certificate={"kind": "diagonal", "max_offdiagonal": off},
            residual=off,
            tolerance=tol,
        )
    rep = build_gns(bp.n_modes)
    w = odd_odd_witness(rep, s, bp, tol)
    if w is not None:
        return SeparabilityVerdict(Verdict.ENTANGLED, witness=w, residual=w.violation(), tolerance=tol)
    return SeparabilityVerdict(
        Verdict.UNKNOWN,
        reason="real off-diagonal terms, no general criterion",
        residual=off,
        tolerance=tol,
    )


def separable_state_check_omega(bp: Bipartition, tol: float = DEFAULT_TOL) -> SeparabilityVerdict:
    """Product property of the trace state on every pair of local monomials."""
    n = bp.n_modes
    worst = 0.0
    for s1 in bp.local_masks(0, nonempty=False):
        a1 = monomial(n, s1)
        for s2 in bp.local_masks(1, nonempty=False):
            a2 = monomial(n, s2)
            worst = max(worst, abs(omega(mul(a1, a2)) - omega(a1) * omega(a2)))
    if worst > tol:
        return SeparabilityVerdict(Verdict.UNKNOWN, reason="product property failed", residual=worst, tolerance=tol)
    return SeparabilityVerdict(
        Verdict.SEPARABLE,
        certificate={"kind": "product", "pairs": 2 ** popcount(bp.first) * 2 ** popcount(bp.second), "modes": n},
        residual=worst,
        tolerance=tol,
    )


def check_pipeline(rep: GnsRep, psi: GnsVector, bp: Bipartition, tol: float = DEFAULT_TOL) -> SeparabilityVerdict:
    """Factorization test, falling back to the odd-odd witness when inconclusive."""
    v = pure_factorization_test(rep, psi, bp, tol)
    if v.verdict is not Verdict.UNKNOWN:
        return v
    w = odd_odd_witness(rep, psi, bp, tol)
    if w is not None:
        return SeparabilityVerdict(Verdict.ENTANGLED, witness=w, residual=w.violation(), tolerance=tol)
    return v
