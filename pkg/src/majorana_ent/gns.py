"""
GNS construction for (C_N, Omega).

The Hilbert space has the monomials as orthonormal basis, ``|c_S> = c_S|Omega>``,
and the algebra acts by left multiplication. Each generator is therefore a
signed permutation of basis masks; the tables are built once per mode count.
Vectors are kept sparse and only densified at linear-algebra boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import TYPE_CHECKING, Mapping, Union

import numpy as np

from . import matrix_rep
from .clifford import CliffordElement, check_modes, popcount, scalar

if TYPE_CHECKING:
    from .rep_decomp import IrrepBasis

MAX_GNS_MODES = 14
NORM_TOL = 1e-12
WEIGHT_TOL = 1e-10
PURITY_TOL = 1e-10
PSD_TOL = 1e-10


class GnsVector:
    """Sparse vector over the monomial basis, amplitudes keyed by mask."""

    __slots__ = ("n_modes", "amplitudes")

    def __init__(self, n_modes: int, amplitudes: Mapping[int, complex] | None = None):
        check_modes(n_modes, MAX_GNS_MODES)
        amps = {}
        for m, a in sorted((amplitudes or {}).items()):
            if m < 0 or m >> n_modes:
                raise ValueError(f"mask {m:#x} outside {n_modes} modes")
            if abs(a) > 1e-15:
                amps[m] = complex(a)
        object.__setattr__(self, "n_modes", n_modes)
        object.__setattr__(self, "amplitudes", MappingProxyType(amps))

    def __setattr__(self, name, value):
        raise AttributeError("GnsVector is immutable")

    @classmethod
    def from_element(cls, a: CliffordElement) -> GnsVector:
        """The vector ``a|Omega>``."""
        return cls(a.n_modes, dict(a.terms))

    @classmethod
    def from_dense(cls, n_modes: int, values: np.ndarray) -> GnsVector:
        return cls(n_modes, {int(k): values[k] for k in np.flatnonzero(np.abs(values) > 1e-15)})

    def to_element(self) -> CliffordElement:
        return CliffordElement(self.n_modes, dict(self.amplitudes))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(2**self.n_modes, dtype=complex)
        for m, a in self.amplitudes.items():
            out[m] = a
        return out

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> GnsVector:
        nrm = np.sqrt(self.norm_sq())
        if nrm == 0:
            raise ValueError("cannot normalise the zero vector")
        return self * (1 / nrm)

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm_sq() - 1) <= tol

    def inner(self, other: GnsVector) -> complex:
        """``<self|other>``, antilinear in ``self``."""
        return complex(
            sum(a.conjugate() * other.amplitudes.get(m, 0) for m, a in self.amplitudes.items())
        )

    def __add__(self, other: GnsVector) -> GnsVector:
        out = dict(self.amplitudes)
        for m, a in other.amplitudes.items():
            out[m] = out.get(m, 0) + a
        return GnsVector(self.n_modes, out)

    def __sub__(self, other: GnsVector) -> GnsVector:
        return self + other * -1

    def __mul__(self, z: complex) -> GnsVector:
        return GnsVector(self.n_modes, {m: a * z for m, a in self.amplitudes.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, GnsVector):
            return NotImplemented
        return self.n_modes == other.n_modes and dict(self.amplitudes) == dict(other.amplitudes)

    def __hash__(self):
        return hash((self.n_modes, tuple(self.amplitudes.items())))

    def isclose(self, other: GnsVector, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.to_dense() - other.to_dense()), initial=0) <= atol)

    def __repr__(self):
        return f"GnsVector({self.n_modes}, {dict(self.amplitudes)!r})"


def format_vector(v: GnsVector) -> str:
    """One ``mask_hex re im`` line per stored amplitude."""
    return "".join(f"{m:x} {a.real:.12g} {a.imag:.12g}\n" for m, a in v.amplitudes.items())


def parse_vector(n_modes: int, text: str) -> GnsVector:
    amps = {}
    for ln in text.splitlines():
        if not ln.strip():
            continue
        h, re_, im = ln.split()
        amps[int(h, 16)] = complex(float(re_), float(im))
    return GnsVector(n_modes, amps)


@dataclass(frozen=True, eq=False)
class GnsRep:
    """Left-multiplication representation with per-generator signed permutations."""

    n_modes: int
    targets: tuple[np.ndarray, ...]
    signs: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return 2**self.n_modes

    @property
    def cyclic_vector(self) -> GnsVector:
        return GnsVector(self.n_modes, {0: 1.0})

    def monomial_action(self, mask: int) -> tuple[np.ndarray, np.ndarray]:
        """Signed permutation ``(target, sign)`` of ``pi(c_S)`` over all basis masks."""
        idx = np.arange(self.dim)
        cur = idx.copy()
        sgn = np.ones(self.dim, dtype=np.int8)
        # c_S = c_{s1} c_{s2} ... ; the rightmost factor acts first
        for k in reversed(range(self.n_modes)):
            if mask >> k & 1:
                sgn = sgn * self.signs[k][cur]
                cur = self.targets[k][cur]
        return cur, sgn

    def matrix(self, a: CliffordElement) -> np.ndarray:
        """Dense ``dim x dim`` matrix of ``pi(a)``."""
        _check_same(self, a.n_modes)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        cols = np.arange(self.dim)
        for mask, coef in a.terms.items():
            tgt, sgn = self.monomial_action(mask)
            out[tgt, cols] += coef * sgn
        return out

    def sparse_matrix(self, a: CliffordElement):
        from scipy import sparse

        _check_same(self, a.n_modes)
        rows, cols, vals = [], [], []
        idx = np.arange(self.dim)
        for mask, coef in a.terms.items():
            tgt, sgn = self.monomial_action(mask)
            rows.append(tgt)
            cols.append(idx)
            vals.append(coef * sgn)
        if not rows:
            return sparse.csr_matrix((self.dim, self.dim), dtype=complex)
        return sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim),
        )

    @cached_property
    def generator_matrices(self) -> tuple[np.ndarray, ...]:
        n = self.n_modes
        return tuple(self.matrix(CliffordElement(n, {1 << k: 1.0})) for k in range(n))


def _check_same(rep: GnsRep, n_modes: int) -> None:
    if rep.n_modes != n_modes:
        raise ValueError(f"mode count mismatch: rep {rep.n_modes}, operand {n_modes}")


def build_gns(n_modes: int) -> GnsRep:
    check_modes(n_modes, MAX_GNS_MODES)
    idx = np.arange(2**n_modes)
    targets, signs = [], []
    for k in range(n_modes):
        below = idx & ((1 << k) - 1)
        parity = np.bitwise_count(below.astype(np.uint64)) & 1
        targets.append(idx ^ (1 << k))
        signs.append(np.where(parity, -1, 1).astype(np.int8))
    return GnsRep(n_modes, tuple(targets), tuple(signs))


def apply(rep: GnsRep, a: CliffordElement, v: GnsVector) -> GnsVector:
    """``pi(a)|v>``, composed from the generator tables."""
    _check_same(rep, a.n_modes)
    _check_same(rep, v.n_modes)
    out: dict[int, complex] = {}
    gens = [k for k in range(rep.n_modes)]
    for mask, coef in a.terms.items():
        factors = [k for k in reversed(gens) if mask >> k & 1]
        for s, amp in v.amplitudes.items():
            cur, sgn = s, 1
            for k in factors:
                sgn *= int(rep.signs[k][cur])
                cur = int(rep.targets[k][cur])
            out[cur] = out.get(cur, 0) + sgn * coef * amp
    return GnsVector(rep.n_modes, out)


def monomial_vector(n_modes: int, mask: int) -> GnsVector:
    return GnsVector(n_modes, {mask: 1.0})


@dataclass(frozen=True, eq=False)
class RestrictedBlock:
    """One irreducible type: weight, unit-trace density matrix, representative block."""

    weight: float
    density: np.ndarray
    blocks: tuple[int, ...]

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.density @ self.density)))


@dataclass(frozen=True, eq=False)
class RestrictedState:
    """
    A state on the algebra written block-wise in an irreducible basis.

    ``types`` groups the basis blocks whose generator matrices coincide; each
    group carries one density matrix in the coordinates of its first block.
    """

    basis: IrrepBasis
    types: tuple[RestrictedBlock, ...]

    @property
    def weights(self) -> list[float]:
        return [t.weight for t in self.types]

    def total_weight(self) -> float:
        return float(sum(self.weights))

    def full_density(self) -> np.ndarray:
        """
        Density operator on the GNS space that reproduces the restricted state.

        Each type's matrix is placed on its representative block.
        """
        dim = 2**self.basis.n_modes
        rho = np.zeros((dim, dim), dtype=complex)
        for t in self.types:
            vecs = self.basis.vectors[t.blocks[0]]  # (d, dim)
            rho += t.weight * vecs.T @ t.density @ vecs.conj()
        return rho


def check_restricted(s: RestrictedState) -> None:
    if abs(s.total_weight() - 1) > WEIGHT_TOL:
        raise ValueError(f"weights sum to {s.total_weight()}, expected 1")
    for t in s.types:
        if t.weight < -WEIGHT_TOL:
            raise ValueError(f"negative block weight {t.weight}")
        if t.weight > WEIGHT_TOL:
            if abs(np.trace(t.density) - 1) > WEIGHT_TOL:
                raise ValueError("block density matrix is not unit trace")
            if np.min(np.linalg.eigvalsh((t.density + t.density.conj().T) / 2)) < -PSD_TOL:
                raise ValueError("block density matrix is not positive semi-definite")


def restrict(rep: GnsRep, v: GnsVector, basis: IrrepBasis) -> RestrictedState:
    """
    Restriction of ``|v>`` to the algebra, block by block.

    Blocks carrying identical generator matrices are one irreducible type; for
    each type ``rho_ij = sum_r <e_i^r|v><v|e_j^r>``. The basis must be complete
    and its blocks invariant.
    """
    from .rep_decomp import block_matrices, type_classes

    _check_same(rep, v.n_modes)
    if not v.is_normalized():
        raise ValueError(f"vector is not normalised (norm^2 = {v.norm_sq()})")
    basis.check_complete()
    decomp = block_matrices(rep, basis)
    psi = v.to_dense()
    coeffs = basis.vectors.conj() @ psi  # (blocks, d): <e_i^r|psi>
    types = []
    for cls in type_classes(decomp):
        rho = sum(np.outer(coeffs[r], coeffs[r].conj()) for r in cls)
        w = float(np.real(np.trace(rho)))
        d = rho.shape[0]
        dens = rho / w if w > WEIGHT_TOL else np.eye(d) / d
        types.append(RestrictedBlock(w, dens, tuple(cls)))
    return RestrictedState(basis, tuple(types))


def restricted_from_density(basis: IrrepBasis, rho: np.ndarray, block: int = 0) -> RestrictedState:
    """Single-type state given directly by a density matrix on one block."""
    rho = np.asarray(rho, dtype=complex)
    s = RestrictedState(basis, (RestrictedBlock(float(np.real(np.trace(rho))), rho / np.trace(rho), (block,)),))
    check_restricted(s)
    return s


def purity(s: RestrictedState) -> bool:
    live = [t for t in s.types if t.weight > WEIGHT_TOL]
    return len(live) == 1 and live[0].purity >= 1 - PURITY_TOL


def expectation(rep: GnsRep, state: Union[GnsVector, RestrictedState], a: CliffordElement) -> complex:
    """``<psi|pi(a)|psi>`` for a vector, ``sum_mu w_mu Tr[rho_mu pi_mu(a)]`` for a restricted state."""
    _check_same(rep, a.n_modes)
    if isinstance(state, GnsVector):
        if not state.is_normalized():
            raise ValueError(f"state is not normalised (norm^2 = {state.norm_sq()})")
        return state.inner(apply(rep, a, state))
    check_restricted(state)
    total = 0j
    for t in state.types:
        vecs = state.basis.vectors[t.blocks[0]]
        block = np.array([GnsVector.from_dense(rep.n_modes, col).to_dense() for col in vecs])
        image = np.array([apply(rep, a, GnsVector.from_dense(rep.n_modes, col)).to_dense() for col in block])
        m = block.conj() @ image.T  # m[j, k] = <e_j|pi(a)|e_k>
        total += t.weight * np.trace(t.density @ m)
    return complex(total)


def algebra_density(v: GnsVector) -> np.ndarray:
    """
    Density matrix of the restricted state in the Pauli-string representation.

    With ``v = x|Omega>`` the restricted state is ``a -> Omega(x^* a x)``, which
    equals ``Tr[M M^dag M(a)] / dim`` for ``M`` the image of ``x``. Block diagonal
    for odd N, one block per inequivalent irrep.
    """
    rep = matrix_rep.build_irrep(v.n_modes)
    m = matrix_rep.represent(v.to_element(), rep)
    rho = m @ m.conj().T
    return rho / np.real(np.trace(rho))


def is_pure_on_algebra(v: GnsVector, tol: float = PURITY_TOL) -> bool:
    rho = algebra_density(v)
    return float(np.real(np.trace(rho @ rho))) >= 1 - tol


def gram_matrix(n_modes: int) -> np.ndarray:
    """``<c_S|c_T> = Omega(c_S^* c_T)`` over all monomials, computed in the algebra."""
    from .clifford import monomial, mul, omega, star

    dim = 2**n_modes
    g = np.zeros((dim, dim), dtype=complex)
    monos = [monomial(n_modes, m) for m in range(dim)]
    stars = [star(x) for x in monos]
    for s in range(dim):
        for t in range(dim):
            g[s, t] = omega(mul(stars[s], monos[t]))
    return g


def cyclic_rank(rep: GnsRep) -> int:
    """Rank of ``{pi(c_S)|Omega>}`` over all masks."""
    omega_vec = rep.cyclic_vector
    rows = np.array(
        [apply(rep, CliffordElement(rep.n_modes, {m: 1.0}), omega_vec).to_dense() for m in range(rep.dim)]
    )
    return matrix_rep.row_rank(rows)


def identity_element(n_modes: int) -> CliffordElement:
    return scalar(n_modes, 1.0)


def parity_of_mask(mask: int) -> int:
    return popcount(mask) & 1


def monomial_expectations(rep: GnsRep, state: Union[GnsVector, RestrictedState, np.ndarray]) -> np.ndarray:
    """
    ``<c_S>`` for every mask ``S``, indexed by mask.

    ``state`` may be a vector, a restricted state, or a density operator on the
    GNS space.
    """
    if isinstance(state, GnsVector):
        _check_same(rep, state.n_modes)
        if not state.is_normalized():
            raise ValueError(f"state is not normalised (norm^2 = {state.norm_sq()})")
        psi = state.to_dense()
        rho = None
    elif isinstance(state, RestrictedState):
        check_restricted(state)
        rho = state.full_density()
    else:
        rho = np.asarray(state, dtype=complex)
        if rho.shape != (rep.dim, rep.dim):
            raise ValueError(f"density has shape {rho.shape}, expected ({rep.dim}, {rep.dim})")
    out = np.zeros(rep.dim, dtype=complex)
    idx = np.arange(rep.dim)
    for mask in range(rep.dim):
        tgt, sgn = rep.monomial_action(mask)
        if rho is None:
            out[mask] = np.sum(psi[tgt].conj() * sgn * psi)
        else:
            # Tr[rho L], with L[tgt(T), T] = sgn(T)
            out[mask] = np.sum(rho[idx, tgt] * sgn)
    return out
