"""
Decomposition of the GNS representation into irreducible blocks.

Bases are stored densely as an array ``vectors[r, i, :]`` over the monomial
basis: ``r`` is the flattened block label, ``i`` the position inside the
block. Multi-index block labels ``(r_1, ..., r_n)`` (1-based per pair) are
flattened with ``r_1`` varying fastest; inner multi-indices likewise.

Per pair of modes ``(a, b) = (c_{2k-1}, c_{2k})``:

* e-basis factors ``(1 +- a)(1 +- b)``: the sign on ``a`` follows ``i_k``, the
  sign on ``b`` follows ``r_k``. A vector with ``i_k = r_k = 2`` is negated so
  that every block carries ``c1 -> sigma_3, c2 -> sigma_1``.
* f-basis factors ``a + ib``, ``1 + iab`` (block 1) and ``1 - iab``, ``a - ib``
  (block 2). Odd factors anticommute past later generators, so vectors pick
  up the sign ``(-1)^{sum_k t_k [i_k = 2]}`` with ``t_k`` the parity of block-2
  labels among earlier pairs; this makes all blocks carry the same matrices.

For odd N the e-basis gets a trailing ``(1 +- c_N)`` factor whose sign labels
the block, so there are two blocks of dimension ``2^{N-1}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import CliffordElement, check_modes, generator, identity, mul
from .gns import GnsRep, GnsVector

MAX_BASIS_MODES = 12
MAX_COMMUTANT_MODES = 6
ORTHO_TOL = 1e-12
INVARIANCE_TOL = 1e-10
EQUALITY_TOL = 1e-12
TYPE_TOL = 1e-10
SVD_REL_TOL = 1e-8

FAMILIES = ("e", "f", "g", "custom")


@dataclass(frozen=True, eq=False)
class IrrepBasis:
    """
    Orthonormal basis of the GNS space grouped into candidate blocks.

    ``invariant`` records whether every block span is invariant under the
    generators; it is measured at construction, not assumed.
    """

    n_modes: int
    family: str
    vectors: np.ndarray  # (n_blocks, d, 2^N)
    block_labels: tuple[tuple[int, ...], ...]
    inner_labels: tuple[tuple[int, ...], ...]
    invariant: bool = field(default=False)

    @property
    def n_blocks(self) -> int:
        return self.vectors.shape[0]

    @property
    def block_dims(self) -> tuple[int, ...]:
        return (self.vectors.shape[1],) * self.n_blocks

    def vector(self, r: int, i: int) -> GnsVector:
        return GnsVector.from_dense(self.n_modes, self.vectors[r, i])

    def flat(self) -> np.ndarray:
        """All vectors as rows, block-major."""
        return self.vectors.reshape(-1, self.vectors.shape[-1])

    def gram(self) -> np.ndarray:
        f = self.flat()
        return f.conj() @ f.T

    def orthonormality_residual(self) -> float:
        g = self.gram()
        return float(np.max(np.abs(g - np.eye(g.shape[0]))))

    def check_complete(self, tol: float = ORTHO_TOL) -> None:
        count = self.vectors.shape[0] * self.vectors.shape[1]
        if count != 2**self.n_modes:
            raise ValueError(f"basis has {count} vectors, GNS space has dim {2**self.n_modes}")
        res = self.orthonormality_residual()
        if res > tol:
            raise ValueError(f"basis is not orthonormal (residual {res:.3g})")


def _flat_index(labels: tuple[int, ...]) -> int:
    """Flatten 1-based labels with the first entry varying fastest."""
    return sum((x - 1) << k for k, x in enumerate(labels))


def _multi_indices(n: int) -> list[tuple[int, ...]]:
    """All length-n label tuples in flat order (first entry fastest)."""
    return [tuple(reversed(t)) for t in itertools.product((1, 2), repeat=n)]


def _sign(label: int) -> int:
    return 1 if label == 1 else -1


def _e_pair(n_modes: int, k: int, r: int, i: int) -> CliffordElement:
    one = identity(n_modes)
    a, b = generator(n_modes, 2 * k + 1), generator(n_modes, 2 * k + 2)
    return mul(one + _sign(i) * a, one + _sign(r) * b)


def _f_pair(n_modes: int, k: int, r: int, i: int) -> CliffordElement:
    one = identity(n_modes)
    a, b = generator(n_modes, 2 * k + 1), generator(n_modes, 2 * k + 2)
    ab = mul(a, b)
    table = {
        (1, 1): a + 1j * b,
        (1, 2): one + 1j * ab,
        (2, 1): one - 1j * ab,
        (2, 2): a - 1j * b,
    }
    return table[(r, i)]


def _to_dense(a: CliffordElement) -> np.ndarray:
    out = np.zeros(2**a.n_modes, dtype=complex)
    for m, c in a.terms.items():
        out[m] = c
    return out


def _product(n_modes: int, factors: list[CliffordElement]) -> CliffordElement:
    out = identity(n_modes)
    for f in factors:
        out = mul(out, f)
    return out


def _check_basis_modes(n_modes: int) -> None:
    check_modes(n_modes, MAX_BASIS_MODES)


def e_basis(n_modes: int) -> IrrepBasis:
    """Separable basis built from products of ``(1 +- c)`` factors."""
    _check_basis_modes(n_modes)
    n = n_modes // 2
    norm = 2.0 ** (-n_modes / 2)
    pair_labels = _multi_indices(n)
    if n_modes % 2 == 0:
        vecs = np.zeros((2**n, 2**n, 2**n_modes), dtype=complex)
        for r in pair_labels:
            for i in pair_labels:
                sgn = (-1) ** sum(ri == 2 and ii == 2 for ri, ii in zip(r, i))
                el = _product(n_modes, [_e_pair(n_modes, k, r[k], i[k]) for k in range(n)])
                vecs[_flat_index(r), _flat_index(i)] = sgn * norm * _to_dense(el)
        blocks, inner = tuple(pair_labels), tuple(pair_labels)
    else:
        # inner index (r, i) of the even part, r-part on the left (slower)
        inner = [(r, i) for r in pair_labels for i in pair_labels]
        vecs = np.zeros((2, len(inner), 2**n_modes), dtype=complex)
        one, cn = identity(n_modes), generator(n_modes, n_modes)
        for s in (1, 2):
            for pos, (r, i) in enumerate(inner):
                sgn = (-1) ** sum(ri == 2 and ii == 2 for ri, ii in zip(r, i))
                if s == 2 and n and r[-1] == 2:
                    sgn = -sgn
                factors = [_e_pair(n_modes, k, r[k], i[k]) for k in range(n)]
                factors.append(one + _sign(s) * cn)
                vecs[s - 1, pos] = sgn * norm * _to_dense(_product(n_modes, factors))
        blocks = ((1,), (2,))
        inner = tuple(r + i for r, i in inner)
    return _finish(n_modes, "e", vecs, blocks, inner)


def f_basis(n_modes: int) -> IrrepBasis:
    """Block-adapted basis for even N whose blocks carry identical matrices."""
    _check_basis_modes(n_modes)
    if n_modes % 2:
        raise ValueError(f"the f-basis needs an even mode count, got {n_modes}")
    n = n_modes // 2
    norm = 2.0 ** (-n / 2)
    labels = _multi_indices(n)
    vecs = np.zeros((2**n, 2**n, 2**n_modes), dtype=complex)
    for r in labels:
        # parity of block-2 labels on earlier pairs
        t = [sum(x == 2 for x in r[:k]) & 1 for k in range(n)]
        for i in labels:
            sgn = (-1) ** sum(t[k] for k in range(n) if i[k] == 2)
            el = _product(n_modes, [_f_pair(n_modes, k, r[k], i[k]) for k in range(n)])
            vecs[_flat_index(r), _flat_index(i)] = sgn * norm * _to_dense(el)
    return _finish(n_modes, "f", vecs, tuple(labels), tuple(labels))


def hadamard_like(n_blocks: int) -> np.ndarray:
    """``((sigma_1 + sigma_3)/sqrt 2)`` tensored up to ``n_blocks`` (a power of 2)."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    out = np.ones((1, 1), dtype=complex)
    while out.shape[0] < n_blocks:
        out = np.kron(h, out)
    if out.shape[0] != n_blocks:
        raise ValueError(f"block count {n_blocks} is not a power of 2")
    return out


def g_basis(n_modes: int) -> IrrepBasis:
    """e-basis with blocks mixed by a real Hadamard-type unitary."""
    e = e_basis(n_modes)
    g = recombine(e, hadamard_like(e.n_blocks), np.eye(e.vectors.shape[1]))
    return _finish(n_modes, "g", g.vectors, e.block_labels, e.inner_labels)


def _check_unitary(m: np.ndarray, name: str, dim: int) -> None:
    if m.shape != (dim, dim):
        raise ValueError(f"{name} has shape {m.shape}, expected ({dim}, {dim})")
    res = float(np.max(np.abs(m @ m.conj().T - np.eye(dim))))
    if res > ORTHO_TOL:
        raise ValueError(f"{name} is not unitary (residual {res:.3g})")


def recombine(basis: IrrepBasis, u: np.ndarray, v: np.ndarray) -> IrrepBasis:
    """``|f_i^r> = sum_{s,j} U_rs V_ij |e_j^s>``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    _check_unitary(u, "U", basis.n_blocks)
    _check_unitary(v, "V", basis.vectors.shape[1])
    vecs = np.einsum("rs,ij,sjx->rix", u, v, basis.vectors)
    return _finish(basis.n_modes, "custom", vecs, basis.block_labels, basis.inner_labels)


def _finish(n_modes, family, vecs, blocks, inner) -> IrrepBasis:
    vecs = np.ascontiguousarray(vecs)
    vecs.setflags(write=False)
    provisional = IrrepBasis(n_modes, family, vecs, tuple(blocks), tuple(inner))
    inv = invariance_residual(provisional) <= INVARIANCE_TOL
    return IrrepBasis(n_modes, family, vecs, tuple(blocks), tuple(inner), inv)


def _generator_dense(n_modes: int) -> list[np.ndarray]:
    """``pi(c_k)`` on the monomial basis as dense signed permutations."""
    from .gns import build_gns

    return list(build_gns(n_modes).generator_matrices)


def invariance_residual(basis: IrrepBasis) -> float:
    """Largest norm of the part of ``pi(c_k)|b>`` that leaves the block of ``|b>``."""
    worst = 0.0
    for m in _generator_dense(basis.n_modes):
        for block in basis.vectors:
            img = block @ m.T  # rows: pi(c_k) applied to each block vector
            proj = (img @ block.conj().T) @ block
            worst = max(worst, float(np.max(np.linalg.norm(img - proj, axis=1))))
    return worst


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """Per-block generator matrices ``[pi^r(c_k)]_{jl} = <b_j^r|pi(c_k)|b_l^r>``."""

    basis: IrrepBasis
    generator_blocks: tuple[tuple[np.ndarray, ...], ...]
    invariance_residual: float
    equality_residual: float

    def block_image(self, r: int, a: CliffordElement) -> np.ndarray:
        """Image of an arbitrary element in block ``r``, built from the generator blocks."""
        gens = self.generator_blocks[r]
        d = gens[0].shape[0]
        out = np.zeros((d, d), dtype=complex)
        for mask, coef in a.terms.items():
            m = np.eye(d, dtype=complex)
            for k in range(a.n_modes):
                if mask >> k & 1:
                    m = m @ gens[k]
            out += coef * m
        return out

    def reassemble(self, k: int) -> np.ndarray:
        """``pi(c_k)`` on the monomial basis rebuilt from the blocks (0-based ``k``)."""
        dim = 2**self.basis.n_modes
        out = np.zeros((dim, dim), dtype=complex)
        for r, gens in enumerate(self.generator_blocks):
            b = self.basis.vectors[r]
            out += b.T @ gens[k] @ b.conj()
        return out


def block_matrices(rep: GnsRep, basis: IrrepBasis) -> BlockDecomposition:
    if rep.n_modes != basis.n_modes:
        raise ValueError(f"mode count mismatch: rep {rep.n_modes}, basis {basis.n_modes}")
    res = invariance_residual(basis)
    if res > INVARIANCE_TOL:
        raise ValueError(f"basis blocks are not invariant (residual {res:.3g})")
    blocks = []
    for b in basis.vectors:
        blocks.append(tuple(b.conj() @ m @ b.T for m in rep.generator_matrices))
    eq = 0.0
    for gens in blocks[1:]:
        eq = max(eq, max(float(np.max(np.abs(x - y))) for x, y in zip(gens, blocks[0])))
    return BlockDecomposition(basis, tuple(blocks), res, eq)


def type_classes(decomp: BlockDecomposition, tol: float = TYPE_TOL) -> list[list[int]]:
    """Group block indices whose generator matrices agree to ``tol``."""
    classes: list[list[int]] = []
    for r, gens in enumerate(decomp.generator_blocks):
        for cls in classes:
            ref = decomp.generator_blocks[cls[0]]
            if all(np.max(np.abs(x - y)) <= tol for x, y in zip(gens, ref)):
                cls.append(r)
                break
        else:
            classes.append([r])
    return classes


@dataclass(frozen=True)
class CommutantResult:
    dimension: int
    threshold: float
    largest_zero: float
    smallest_nonzero: float

    @property
    def gap_orders(self) -> float:
        """log10 of the separation between retained and discarded singular values."""
        if self.smallest_nonzero == math.inf:
            return math.inf
        floor = max(self.largest_zero, np.finfo(float).tiny)
        return math.log10(self.smallest_nonzero / floor)


def commutant(rep: GnsRep) -> CommutantResult:
    """
    Commutant of ``pi`` by SVD of the stacked commutator map ``X -> [pi(c_k), X]``.

    For signed permutations ``[pi(c_k), .]`` sends entries with ``S xor T = d``
    to entries with ``S xor T = d xor e_k``. Columns from different sectors
    ``d`` therefore never share a row, and the stacked operator splits into
    ``2^N`` small dense SVDs.
    """
    check_modes(rep.n_modes, MAX_COMMUTANT_MODES)
    n, dim = rep.n_modes, rep.dim
    idx = np.arange(dim)
    svals = []
    for d in range(dim):
        rows = []
        for k in range(n):
            e = 1 << k
            s = rep.signs[k].astype(float)
            # x_S = X[S, S^d]; row S' holds [pi(c_k), X][S', S'^d^e]
            block = np.zeros((dim, dim))
            block[idx, idx ^ e] += s[idx ^ e]
            block[idx, idx] -= s[idx ^ d ^ e]
            rows.append(block)
        svals.append(np.linalg.svd(np.vstack(rows), compute_uv=False))
    return _nullity(np.concatenate(svals), count=dim * dim)


def commutant_dense(matrices: list[np.ndarray]) -> CommutantResult:
    """Reference commutant via SVD of the full stacked map on ``vec(X)``."""
    dim = matrices[0].shape[0]
    eye = np.eye(dim)
    # row-major vec: vec(M X) = (M (x) I) vec X, vec(X M) = (I (x) M^T) vec X
    stacked = np.vstack([np.kron(m, eye) - np.kron(eye, m.T) for m in matrices])
    return _nullity(np.linalg.svd(stacked, compute_uv=False), count=dim * dim)


def _nullity(svals: np.ndarray, count: int) -> CommutantResult:
    full = np.zeros(count)
    full[: len(svals)] = np.sort(svals)[::-1][:count]
    smax = float(full.max()) if count else 0.0
    thr = SVD_REL_TOL * smax
    zero = full[full <= thr]
    keep = full[full > thr]
    return CommutantResult(
        dimension=int(zero.size),
        threshold=thr,
        largest_zero=float(zero.max()) if zero.size else 0.0,
        smallest_nonzero=float(keep.min()) if keep.size else math.inf,
    )


def commutant_dimension(rep: GnsRep) -> int:
    return commutant(rep).dimension


def decomposition_report(rep: GnsRep, family: str, with_commutant: bool = True) -> dict:
    """Summary of a basis decomposition for the CLI."""
    builders = {"e": e_basis, "f": f_basis, "g": g_basis}
    if family not in builders:
        raise ValueError(f"unknown basis family {family!r}; expected one of e, f, g")
    basis = builders[family](rep.n_modes)
    report: dict = {
        "modes": rep.n_modes,
        "family": family,
        "blocks": basis.n_blocks,
        "block_dims": list(basis.block_dims),
        "orthonormality_residual": basis.orthonormality_residual(),
        "invariance_residual": invariance_residual(basis),
        "invariant": basis.invariant,
    }
    if basis.invariant:
        dec = block_matrices(rep, basis)
        report["equality_residual"] = dec.equality_residual
        report["types"] = len(type_classes(dec))
    else:
        report["equality_residual"] = None
        report["types"] = None
    if with_commutant and rep.n_modes <= MAX_COMMUTANT_MODES:
        c = commutant(rep)
        report["commutant_dimension"] = c.dimension
        report["commutant_gap_orders"] = c.gap_orders
    return report
