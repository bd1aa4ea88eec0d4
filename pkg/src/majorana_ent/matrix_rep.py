"""
Pauli-string matrix representations of C_N.

For ``N = 2n`` each pair of generators gets its own tensor slot. Slots are
numbered from the right, so the first pair acts on the rightmost factor:

    c_{2k+1} -> sigma_2^{(x) k} (x) sigma_3 on slot k
    c_{2k+2} -> sigma_2^{(x) k} (x) sigma_1 on slot k

with identities on the slots of later pairs. This is the usual ladder of
anticommuting Pauli strings under the relabelling sigma_1 -> sigma_3,
sigma_2 -> sigma_1, sigma_3 -> sigma_2, chosen so that C_2 lands on
``c1 -> sigma_3, c2 -> sigma_1``. For ``N = 2n + 1`` the irreducible images of
the first 2n generators are doubled into a direct sum and the last generator
maps to ``chi (+) -chi``, where ``chi`` is the product of the even-case images
normalised to square to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import CliffordElement, check_modes, modes_from_mask

MAX_DIM = 2**12
ANTICOMM_TOL = 1e-12
RANK_TOL = 1e-10

_PAULI = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli(index: int) -> np.ndarray:
    """sigma_0 (identity), sigma_1, sigma_2 or sigma_3 as a fresh 2x2 array."""
    if index not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be 0..3, got {index}")
    return _PAULI[index].copy()


def kron(a: np.ndarray, b: np.ndarray, max_dim: int = MAX_DIM) -> np.ndarray:
    dim = a.shape[0] * b.shape[0]
    if dim > max_dim:
        raise ValueError(f"Kronecker product dimension {dim} exceeds cap {max_dim}")
    return np.kron(a, b)


def pauli_string(indices: list[int]) -> np.ndarray:
    """Kronecker product of Paulis, leftmost index first."""
    out = np.ones((1, 1), dtype=complex)
    for k in indices:
        out = kron(out, _PAULI[k])
    return out


def conjugate_transpose(m: np.ndarray) -> np.ndarray:
    return m.conj().T


@dataclass(frozen=True)
class MatrixRepresentation:
    n_modes: int
    dim: int
    generator_images: tuple[np.ndarray, ...]


def _even_images(n_pairs: int) -> list[np.ndarray]:
    images = []
    for k in range(n_pairs):
        # slot k counted from the right: pairs above k get identities
        left = [0] * (n_pairs - k - 1)
        tail = [2] * k
        images.append(pauli_string(left + [3] + tail))
        images.append(pauli_string(left + [1] + tail))
    return images


def build_irrep(n_modes: int) -> MatrixRepresentation:
    """Faithful Pauli-string representation: irreducible for even N."""
    check_modes(n_modes)
    n = n_modes // 2
    dim = 2**n if n_modes % 2 == 0 else 2 ** (n + 1)
    if dim > MAX_DIM:
        raise ValueError(f"representation of {n_modes} modes needs dim {dim} > cap {MAX_DIM}")
    images = _even_images(n)
    if n_modes % 2:
        # chirality: product of all even-case images, rescaled to square to +1
        chi = np.eye(2**n, dtype=complex)
        for m in images:
            chi = chi @ m
        chi *= (-1j) ** n
        zero = np.zeros((2**n, 2**n), dtype=complex)
        doubled = [np.block([[m, zero], [zero, m]]) for m in images]
        doubled.append(np.block([[chi, zero], [zero, -chi]]))
        images = doubled
    return MatrixRepresentation(n_modes, dim, tuple(images))


def represent(a: CliffordElement, rep: MatrixRepresentation) -> np.ndarray:
    if a.n_modes != rep.n_modes:
        raise ValueError(f"mode count mismatch: element {a.n_modes}, rep {rep.n_modes}")
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    for mask, coef in a.terms.items():
        out += coef * monomial_image(mask, rep)
    return out


def monomial_image(mask: int, rep: MatrixRepresentation) -> np.ndarray:
    m = np.eye(rep.dim, dtype=complex)
    for k in modes_from_mask(mask):
        m = m @ rep.generator_images[k - 1]
    return m


def verify_clifford(rep: MatrixRepresentation, tol: float = ANTICOMM_TOL) -> tuple[bool, float]:
    """Check ``{m_i, m_j} = 2 delta_ij``; returns ``(ok, max residual)``."""
    eye = np.eye(rep.dim)
    residual = 0.0
    imgs = rep.generator_images
    for i in range(len(imgs)):
        for j in range(i, len(imgs)):
            r = imgs[i] @ imgs[j] + imgs[j] @ imgs[i] - (2 * eye if i == j else 0)
            residual = max(residual, float(np.max(np.abs(r))))
    return residual <= tol, residual


def row_rank(rows: np.ndarray, tol: float = RANK_TOL) -> int:
    """Rank by Gaussian elimination with partial pivoting."""
    a = np.array(rows, dtype=complex)
    n_rows, n_cols = a.shape
    rank = 0
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[pivot, col]) <= tol:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank] /= a[rank, col]
        below = a[rank + 1 :, col].copy()
        a[rank + 1 :] -= np.outer(below, a[rank])
        rank += 1
    return rank


def algebra_dimension(rep: MatrixRepresentation) -> int:
    """Dimension of the span of all represented monomials."""
    rows = np.array(
        [monomial_image(mask, rep).ravel() for mask in range(2**rep.n_modes)]
    )
    return row_rank(rows)


def trace_state(a: CliffordElement, rep: MatrixRepresentation) -> complex:
    """Normalised matrix trace of the image of ``a``."""
    return complex(np.trace(represent(a, rep)) / rep.dim)


def format_matrix(m: np.ndarray) -> str:
    dim = m.shape[0]
    lines = [str(dim)]
    for z in m.ravel():
        lines.append(f"{z.real:.12g} {z.imag:.12g}")
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    dim = int(lines[0])
    if len(lines) != 1 + dim * dim:
        raise ValueError(f"expected {dim * dim} entries, got {len(lines) - 1}")
    vals = [complex(float(re_), float(im)) for re_, im in (ln.split() for ln in lines[1:])]
    return np.array(vals, dtype=complex).reshape(dim, dim)
