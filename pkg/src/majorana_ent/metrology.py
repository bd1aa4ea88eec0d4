"""
Phase estimation with quadratic Majorana generators.

Two interferometer generators on ``N = 2n`` modes:

    J       = i sum_k w_k c_k c_{n+k}          (pairs straddle the balanced cut)
    J_local = i sum_k w_k c_{2k-1} c_{2k}      (contiguous pairs)

Reports carry both the variance and ``4 * variance``: the latter is the
quantum Fisher information of a pure probe, while the closed forms for the
two reference probes are stated for the variance itself.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .clifford import (
    MAX_MODES,
    CliffordElement,
    check_modes,
    generator,
    identity,
    mul,
    popcount,
    star,
)
from .gns import GnsRep, GnsVector, RestrictedState, build_gns

MAX_MATRIX_MODES = 10
MAX_SWEEP_MODES = 2**16
MEAN_IMAG_TOL = 1e-10
SELF_ADJOINT_TOL = 1e-12
SLD_EPS = 1e-12
R2_MIN = 0.999
THREADS_ENV = "MAJORANA_ENT_THREADS"


@dataclass(frozen=True)
class SpectralFunction:
    """``w_k = k**exponent`` or an explicit list, ``k`` 1-based."""

    exponent: int = 1
    values: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.values is None:
            if isinstance(self.exponent, bool) or not isinstance(self.exponent, int) or self.exponent < 0:
                raise ValueError(f"power-law exponent must be a non-negative int, got {self.exponent!r}")
        elif not all(math.isfinite(x) for x in self.values):
            raise ValueError("spectral values must be finite")

    @classmethod
    def explicit(cls, values: Sequence[float]) -> SpectralFunction:
        return cls(0, tuple(float(x) for x in values))

    def evaluate(self, n: int) -> np.ndarray:
        if self.values is not None:
            if len(self.values) != n:
                raise ValueError(f"spectral list has {len(self.values)} entries, generator needs {n}")
            return np.array(self.values, dtype=float)
        return np.arange(1, n + 1, dtype=float) ** self.exponent

    def describe(self) -> str:
        if self.values is not None:
            return "list:" + ",".join(f"{x:.12g}" for x in self.values)
        return f"power:{self.exponent}"


def _pairs(n_modes: int, cap: int = MAX_MODES) -> int:
    check_modes(n_modes, cap)
    if n_modes % 2:
        raise ValueError(f"generator needs an even mode count, got {n_modes}")
    return n_modes // 2


def _quadratic(n_modes: int, pairs: list[tuple[int, int]], w: np.ndarray) -> CliffordElement:
    out = CliffordElement(n_modes)
    for (a, b), wk in zip(pairs, w):
        out = out + mul(generator(n_modes, a), generator(n_modes, b)) * (1j * float(wk))
    return out


def generator_balanced(n_modes: int, w: SpectralFunction) -> CliffordElement:
    n = _pairs(n_modes)
    return _quadratic(n_modes, [(k, n + k) for k in range(1, n + 1)], w.evaluate(n))


def generator_local(n_modes: int, w: SpectralFunction) -> CliffordElement:
    n = _pairs(n_modes)
    return _quadratic(n_modes, [(2 * k - 1, 2 * k) for k in range(1, n + 1)], w.evaluate(n))


def local_pair_terms(n_modes: int, w: SpectralFunction) -> list[CliffordElement]:
    """The commuting summands ``i w_k c_{2k-1} c_{2k}`` of the local generator."""
    n = _pairs(n_modes)
    w_vals = w.evaluate(n)
    return [_quadratic(n_modes, [(2 * k - 1, 2 * k)], w_vals[k - 1 : k]) for k in range(1, n + 1)]


def probe_psi(n_modes: int) -> GnsVector:
    """Separable stabilizer probe: ``(1 + i c c)`` on the first half, ``(1 - i c c)`` on the second."""
    n = _pairs(n_modes)
    if n % 2:
        raise ValueError(f"probe_psi needs n = N/2 even, got n = {n}")
    one = identity(n_modes)
    x = one
    for k in range(1, n, 2):
        x = mul(x, one + 1j * mul(generator(n_modes, k), generator(n_modes, k + 1)))
    for k in range(n + 1, 2 * n, 2):
        x = mul(x, one - 1j * mul(generator(n_modes, k), generator(n_modes, k + 1)))
    return GnsVector.from_element(x).normalized()


def probe_phi(n_modes: int, gamma_first: int, gamma_second: int) -> GnsVector:
    """``(1 + i gamma)|Omega>/sqrt 2`` with ``gamma = c_{first} c_{second}``, both of odd size p."""
    n = _pairs(n_modes)
    low = (1 << n) - 1
    p = popcount(gamma_first)
    if p != popcount(gamma_second):
        raise ValueError("gamma masks must have the same size")
    if p % 2 == 0:
        raise ValueError(f"gamma masks must have odd size, got {p}")
    if gamma_first & ~low or gamma_second & low or gamma_second >> n_modes:
        raise ValueError("gamma_first must lie in the first half and gamma_second in the second")
    gamma = mul(CliffordElement(n_modes, {gamma_first: 1.0}), CliffordElement(n_modes, {gamma_second: 1.0}))
    if mul(gamma, gamma) != -identity(n_modes):
        raise ValueError("gamma does not square to -1")
    return GnsVector.from_element((identity(n_modes) + 1j * gamma) / math.sqrt(2))


def _check_self_adjoint(j: CliffordElement) -> None:
    if not star(j).isclose(j, SELF_ADJOINT_TOL):
        raise ValueError("generator is not self-adjoint")


def _matrix_rep(n_modes: int) -> GnsRep:
    check_modes(n_modes, MAX_MATRIX_MODES)
    return build_gns(n_modes)


def evolve(rep: GnsRep, state: GnsVector, j: CliffordElement, theta: float) -> GnsVector:
    """``exp(i theta pi(J)) |state>`` via eigendecomposition of the dense generator."""
    _check_self_adjoint(j)
    if rep.n_modes > MAX_MATRIX_MODES:
        raise ValueError(f"dense evolution capped at {MAX_MATRIX_MODES} modes")
    m = rep.matrix(j)
    evals, evecs = np.linalg.eigh((m + m.conj().T) / 2)
    psi = state.to_dense()
    out = evecs @ (np.exp(1j * theta * evals) * (evecs.conj().T @ psi))
    return GnsVector.from_dense(rep.n_modes, out)


def unitary(rep: GnsRep, j: CliffordElement, theta: float) -> np.ndarray:
    _check_self_adjoint(j)
    m = rep.matrix(j)
    evals, evecs = np.linalg.eigh((m + m.conj().T) / 2)
    return (evecs * np.exp(1j * theta * evals)) @ evecs.conj().T


@dataclass(frozen=True)
class QfiReport:
    n_modes: int
    generator_id: str
    state_id: str
    mean: float
    variance: float
    qfi_4var: float
    closed_form: Optional[float] = None
    shot_noise_ref: int = field(init=False)
    heisenberg_ref: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "shot_noise_ref", self.n_modes)
        object.__setattr__(self, "heisenberg_ref", self.n_modes**2)

    def to_dict(self) -> dict:
        return {
            "modes": self.n_modes,
            "generator": self.generator_id,
            "state": self.state_id,
            "mean": self.mean,
            "variance": self.variance,
            "qfi_4var": self.qfi_4var,
            "closed_form": self.closed_form,
            "shot_noise": self.shot_noise_ref,
            "heisenberg": self.heisenberg_ref,
        }


def mean_and_variance(rep: GnsRep, state: GnsVector, j: CliffordElement) -> tuple[float, float]:
    if not state.is_normalized():
        raise ValueError(f"state is not normalised (norm^2 = {state.norm_sq()})")
    _check_self_adjoint(j)
    m = rep.sparse_matrix(j)
    psi = state.to_dense()
    jpsi = m @ psi
    mean = complex(np.vdot(psi, jpsi))
    if abs(mean.imag) > MEAN_IMAG_TOL:
        raise ValueError(f"mean of J has imaginary part {mean.imag:.3g}")
    second = float(np.vdot(jpsi, jpsi).real)
    return mean.real, second - mean.real**2


def qfi_pure(
    rep: GnsRep,
    state: GnsVector,
    j: CliffordElement,
    generator_id: str = "",
    state_id: str = "",
    closed_form: Optional[float] = None,
) -> QfiReport:
    mean, var = mean_and_variance(rep, state, j)
    return QfiReport(rep.n_modes, generator_id, state_id, mean, var, 4 * var, closed_form)


def sld_qfi(rho: np.ndarray, j: np.ndarray) -> float:
    """``2 sum (p_a - p_b)^2 / (p_a + p_b) |<a|J|b>|^2`` over the eigenbasis of ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    evals, evecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    if evals.min(initial=0) < -1e-10:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3g}")
    jm = evecs.conj().T @ j @ evecs
    pa, pb = evals[:, None], evals[None, :]
    tot = pa + pb
    mask = tot > SLD_EPS
    terms = np.zeros_like(tot)
    terms[mask] = (pa - pb)[mask] ** 2 / tot[mask]
    return float(2 * np.sum(terms * np.abs(jm) ** 2))


def qfi_mixed(s: RestrictedState, j_blocks: Union[np.ndarray, Sequence[np.ndarray]]) -> float:
    """Weighted sum of the per-type SLD Fisher information."""
    if isinstance(j_blocks, np.ndarray):
        j_blocks = [j_blocks] * len(s.types)
    if len(j_blocks) != len(s.types):
        raise ValueError(f"got {len(j_blocks)} generator blocks for {len(s.types)} state types")
    return float(sum(t.weight * sld_qfi(t.density, jb) for t, jb in zip(s.types, j_blocks)))


def qfi_restricted(rep: GnsRep, s: RestrictedState, j: CliffordElement) -> float:
    """QFI of a restricted state, with the generator blocks taken from its basis."""
    from .rep_decomp import block_matrices

    dec = block_matrices(rep, s.basis)
    return qfi_mixed(s, [dec.block_image(t.blocks[0], j) for t in s.types])


# --- closed forms and sweeps -------------------------------------------------


def closed_form_balanced_psi(n_modes: int, w: SpectralFunction) -> float:
    """``sum_{k=1}^{N/4} (w_{2k-1} + w_{2k})^2``."""
    n = _pairs(n_modes, MAX_SWEEP_MODES)
    if n % 2:
        raise ValueError(f"closed form needs n = N/2 even, got n = {n}")
    v = w.evaluate(n)
    return float(np.sum((v[0::2] + v[1::2]) ** 2))


def closed_form_local_phi(n_modes: int, w: SpectralFunction) -> float:
    """``sum_k w_k^2``."""
    v = w.evaluate(_pairs(n_modes, MAX_SWEEP_MODES))
    return float(np.sum(v**2))


PROBES = ("psi", "phi")
GENERATORS = ("balanced", "local")


def default_phi(n_modes: int) -> GnsVector:
    n = _pairs(n_modes)
    return probe_phi(n_modes, 1, 1 << n)


def _closed_form(kind: str, probe: str, n_modes: int, w: SpectralFunction) -> Optional[float]:
    if kind == "balanced" and probe == "psi":
        return closed_form_balanced_psi(n_modes, w)
    if kind == "local" and probe == "phi":
        return closed_form_local_phi(n_modes, w)
    return None


def _probe(probe: str, n_modes: int) -> GnsVector:
    return probe_psi(n_modes) if probe == "psi" else default_phi(n_modes)


def _generator(kind: str, n_modes: int, w: SpectralFunction) -> CliffordElement:
    return generator_balanced(n_modes, w) if kind == "balanced" else generator_local(n_modes, w)


def matrix_report(kind: str, probe: str, n_modes: int, w: SpectralFunction) -> QfiReport:
    if kind not in GENERATORS:
        raise ValueError(f"unknown generator {kind!r}")
    if probe not in PROBES:
        raise ValueError(f"unknown probe {probe!r}")
    rep = _matrix_rep(n_modes)
    return qfi_pure(
        rep,
        _probe(probe, n_modes),
        _generator(kind, n_modes, w),
        generator_id=f"{kind}:{w.describe()}",
        state_id=probe,
        closed_form=_closed_form(kind, probe, n_modes, w),
    )


@dataclass(frozen=True)
class SweepRow:
    n_modes: int
    variance: float
    qfi4: float
    closed_form: Optional[float]
    matrix_checked: bool

    @property
    def shot_noise(self) -> int:
        return self.n_modes

    @property
    def heisenberg(self) -> int:
        return self.n_modes**2


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    exponent: float
    r2: float

    @property
    def fit_ok(self) -> bool:
        return self.r2 >= R2_MIN

    def to_csv(self) -> str:
        lines = ["N,variance,qfi4,closed_form,shot_noise,heisenberg"]
        for r in self.rows:
            cf = "" if r.closed_form is None else f"{r.closed_form:.12g}"
            lines.append(f"{r.n_modes},{r.variance:.12g},{r.qfi4:.12g},{cf},{r.shot_noise},{r.heisenberg}")
        lines.append(f"# exponent={self.exponent:.12g} r2={self.r2:.12g}")
        return "\n".join(lines) + "\n"


def fit_exponent(ns: Sequence[int], values: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of ``log(values)`` against ``log(ns)`` and its R^2."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if x.size < 2 or np.ptp(x) == 0:
        raise ValueError("need at least two distinct N to fit an exponent")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n


def _sweep_row(kind: str, probe: str, n_modes: int, w: SpectralFunction) -> SweepRow:
    cf = _closed_form(kind, probe, n_modes, w)
    checked = False
    if n_modes <= MAX_MATRIX_MODES:
        rep = matrix_report(kind, probe, n_modes, w)
        if cf is not None and abs(rep.variance - cf) > 1e-8 * max(1.0, cf):
            raise ArithmeticError(f"N={n_modes}: matrix variance {rep.variance} disagrees with closed form {cf}")
        var = rep.variance if cf is None else cf
        checked = True
    elif cf is None:
        raise ValueError(f"no closed form for {kind}+{probe}; N={n_modes} exceeds the matrix cap {MAX_MATRIX_MODES}")
    else:
        var = cf
    return SweepRow(n_modes, var, 4 * var, cf, checked)


def sweep(
    n_list: Sequence[int],
    kind: str = "balanced",
    p: int = 1,
    probe: str = "psi",
    threads: Optional[int] = None,
) -> SweepResult:
    """Variance and QFI over a list of mode counts, with a log-log exponent fit of ``4 * variance``."""
    if kind not in GENERATORS:
        raise ValueError(f"unknown generator {kind!r}; expected one of {GENERATORS}")
    if probe not in PROBES:
        raise ValueError(f"unknown probe {probe!r}; expected one of {PROBES}")
    ns = sorted(set(int(x) for x in n_list))
    if not ns:
        raise ValueError("empty N list")
    for n in ns:
        if n < 2 or n % 2 or n > MAX_SWEEP_MODES:
            raise ValueError(f"sweep N must be even in 2..{MAX_SWEEP_MODES}, got {n}")
        if probe == "psi" and n % 4:
            raise ValueError(f"probe psi needs N divisible by 4, got {n}")
    w = SpectralFunction(p)
    workers = threads or thread_count()
    with ThreadPoolExecutor(max_workers=workers) as ex:
        rows = tuple(ex.map(lambda n: _sweep_row(kind, probe, n, w), ns))
    exponent, r2 = fit_exponent([r.n_modes for r in rows], [r.qfi4 for r in rows])
    return SweepResult(rows, exponent, r2)
