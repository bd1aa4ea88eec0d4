"""
Command-line front end.

Exit codes: 0 when a report or verdict was produced (Unknown included),
1 when a computation failed, 2 for invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from typing import Optional

import numpy as np

from . import gns, matrix_rep, metrology, rep_decomp, separability
from .clifford import check_modes, mask_from_modes, parse_element

CAPS = {
    "rep": 12,
    "gns": 14,
    "commutant": 6,
    "decompose": 12,
    "check": 10,
    "qfi": 10,
}

STATE_HELP = """\
state language (N = --modes):
  e-basis:<k>       k-th e-basis vector, flat 0-based index
  f-basis:<r>,<i>   f-basis vector in block r, position i (0-based; even N)
  e<i><r>, f<i><r>  N = 2 labels with 1-based inner index i and block r, e.g. f11
  psi               separable stabilizer probe (N divisible by 4)
  phi:<m1>,<m2>     (1 + i c_m1 c_m2)|Omega>/sqrt 2, e.g. phi:c1,c3
  <expression>      element applied to |Omega> and normalised, e.g. "1 + (0,1) c1c2"
"""


class ConfigError(ValueError):
    pass


# --- formatting ---------------------------------------------------------------


def _clean(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return float(f"{x:.12g}") + 0.0
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(x.real), _clean(x.imag)]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


# --- parsing ----------------------------------------------------------------------


def _modes(args, cap_key: str) -> int:
    try:
        return check_modes(args.modes, CAPS[cap_key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def parse_split(n_modes: int, text: str) -> separability.Bipartition:
    """An integer ``p`` (first p modes) or a comma list of 1-based modes."""
    try:
        if "," in text:
            return separability.Bipartition.from_modes(n_modes, [int(x) for x in text.split(",") if x.strip()])
        return separability.Bipartition.prefix(n_modes, int(text))
    except ValueError as exc:
        raise ConfigError(f"bad --split {text!r}: {exc}") from None


def _gamma_mask(text: str) -> int:
    labels = re.findall(r"c(\d+)", text)
    if not labels or re.sub(r"c\d+", "", text.strip()):
        raise ConfigError(f"bad monomial {text!r} in phi state")
    return mask_from_modes(int(x) for x in labels)


def parse_state(n_modes: int, text: str) -> gns.GnsVector:
    text = text.strip()
    try:
        m = re.fullmatch(r"e-basis:(\d+)", text)
        if m:
            flat = rep_decomp.e_basis(n_modes).flat()
            k = int(m.group(1))
            if k >= len(flat):
                raise ConfigError(f"e-basis index {k} out of range 0..{len(flat) - 1}")
            return gns.GnsVector.from_dense(n_modes, flat[k])
        m = re.fullmatch(r"f-basis:(\d+),(\d+)", text)
        if m:
            b = rep_decomp.f_basis(n_modes)
            r, i = int(m.group(1)), int(m.group(2))
            if r >= b.n_blocks or i >= b.vectors.shape[1]:
                raise ConfigError(f"f-basis index ({r},{i}) out of range")
            return b.vector(r, i)
        m = re.fullmatch(r"([ef])([12])([12])", text)
        if m:
            if n_modes != 2:
                raise ConfigError(f"label {text!r} is only defined for 2 modes")
            b = rep_decomp.e_basis(2) if m.group(1) == "e" else rep_decomp.f_basis(2)
            return b.vector(int(m.group(3)) - 1, int(m.group(2)) - 1)
        if text == "psi":
            return metrology.probe_psi(n_modes)
        m = re.fullmatch(r"phi:([^,]+),([^,]+)", text)
        if m:
            return metrology.probe_phi(n_modes, _gamma_mask(m.group(1)), _gamma_mask(m.group(2)))
        el = parse_element(n_modes, text)
        if el.is_zero():
            raise ConfigError("state expression is zero")
        return gns.GnsVector.from_element(el).normalized()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad --state {text!r}: {exc}") from None


def parse_spectral(text: str) -> metrology.SpectralFunction:
    try:
        if "," in text or "." in text:
            return metrology.SpectralFunction.explicit([float(x) for x in text.split(",") if x.strip()])
        return metrology.SpectralFunction(int(text))
    except ValueError as exc:
        raise ConfigError(f"bad --spectral {text!r}: {exc}") from None


def parse_n_list(text: str) -> list[int]:
    """``8,16,32`` or ``start:stop:step`` (inclusive stop)."""
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError("expected start:stop:step with positive step")
            out = list(range(parts[0], parts[1] + 1, parts[2]))
        else:
            out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --n-list {text!r}: {exc}") from None
    if not out:
        raise ConfigError("empty N list")
    return out


# --- commands -----------------------------------------------------------------


def cmd_rep(args) -> tuple[str, int]:
    n = _modes(args, "rep")
    rep = matrix_rep.build_irrep(n)
    ok, res = matrix_rep.verify_clifford(rep)
    report = {
        "modes": n,
        "dim": rep.dim,
        "residual": res,
        "algebra_dim": matrix_rep.algebra_dimension(rep),
        "ok": ok,
    }
    return dumps(report), 0 if ok else 1


def cmd_gns(args) -> tuple[str, int]:
    n = _modes(args, "gns")
    state = parse_state(n, args.state) if args.state else None
    rep = gns.build_gns(n)
    idx = np.arange(rep.dim)
    involutive = all(
        np.array_equal(t[t], idx) and np.all(s * s[t] == 1) for t, s in zip(rep.targets, rep.signs)
    )
    report: dict = {"modes": n, "dim": rep.dim, "involutive": bool(involutive)}
    if n <= 8:
        report["cyclic_rank"] = gns.cyclic_rank(rep)
    if state is not None:
        report["norm_sq"] = state.norm_sq()
        report["pure"] = gns.is_pure_on_algebra(state)
        report["vector"] = gns.format_vector(state).splitlines()
    return dumps(report), 0 if involutive else 1


def cmd_decompose(args) -> tuple[str, int]:
    n = _modes(args, "decompose")
    if args.basis == "f" and n % 2:
        raise ConfigError("the f-basis needs an even mode count")
    with_comm = not args.no_commutant
    if with_comm and n > CAPS["commutant"]:
        raise ConfigError(f"commutant capped at {CAPS['commutant']} modes; pass --no-commutant")
    rep = gns.build_gns(n)
    report = rep_decomp.decomposition_report(rep, args.basis, with_commutant=with_comm)
    return dumps(report), 0


def cmd_check(args) -> tuple[str, int]:
    n = _modes(args, "check")
    bp = parse_split(n, args.split)
    psi = parse_state(n, args.state)
    rep = gns.build_gns(n)
    v = separability.check_pipeline(rep, psi, bp, args.tol)
    out = {"modes": n, "split": bp.describe(), "state": args.state}
    out.update(v.to_dict())
    return dumps(out), 0


def cmd_qfi(args) -> tuple[str, int]:
    n = _modes(args, "qfi")
    w = parse_spectral(args.spectral)
    if n % 2:
        raise ConfigError("generators need an even mode count")
    if args.probe in metrology.PROBES:
        try:
            report = metrology.matrix_report(args.generator, args.probe, n, w)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        psi = parse_state(n, args.probe)
        rep = gns.build_gns(n)
        j = (metrology.generator_balanced if args.generator == "balanced" else metrology.generator_local)(n, w)
        report = metrology.qfi_pure(rep, psi, j, f"{args.generator}:{w.describe()}", args.probe)
    return dumps(report.to_dict()), 0


def cmd_sweep(args) -> tuple[str, int]:
    ns = parse_n_list(args.n_list)
    try:
        res = metrology.sweep(ns, args.generator, args.p, args.probe)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return res.to_csv(), 0 if res.fit_ok else 1


COMMANDS = {
    "rep": cmd_rep,
    "gns": cmd_gns,
    "decompose": cmd_decompose,
    "check": cmd_check,
    "qfi": cmd_qfi,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="majorana-ent",
        description="Clifford algebra, GNS blocks, separability and metrology for Majorana modes.",
        epilog=STATE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--out", help="write the report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rep", help="build the Pauli-string representation")
    p.add_argument("--modes", type=int, required=True)

    p = sub.add_parser("gns", help="build the GNS representation, optionally show a state")
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--state")

    p = sub.add_parser("decompose", help="block decomposition report")
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--basis", choices=("e", "f", "g"), default="f")
    p.add_argument("--no-commutant", action="store_true")

    p = sub.add_parser(
        "check", help="separability verdict for a state", epilog=STATE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--split", required=True, help="prefix size p, or comma list of first-half modes")
    p.add_argument("--state", required=True)
    p.add_argument("--tol", type=float, default=separability.DEFAULT_TOL)

    p = sub.add_parser("qfi", help="variance and QFI of a probe under a generator")
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--generator", choices=metrology.GENERATORS, default="balanced")
    p.add_argument("--spectral", default="1", help="power-law exponent p or comma list of weights")
    p.add_argument("--probe", default="psi", help="psi, phi, or any state expression")

    p = sub.add_parser("sweep", help="closed-form N sweep with exponent fit (CSV)")
    p.add_argument("--n-list", required=True, help="comma list or start:stop:step")
    p.add_argument("--generator", choices=metrology.GENERATORS, default="balanced")
    p.add_argument("--p", type=int, default=1, help="power-law exponent of the spectral function")
    p.add_argument("--probe", choices=metrology.PROBES, default="psi")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, code = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # computation failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
