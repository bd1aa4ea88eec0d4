import numpy as np
from hypothesis import settings, strategies as st

from majorana_ent.clifford import CliffordElement

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

coeff = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False).map(
    lambda z: complex(round(z.real, 6), round(z.imag, 6))
)


@st.composite
def elements(draw, n_modes=None, max_terms=6, max_modes=6):
    n = n_modes if n_modes is not None else draw(st.integers(1, max_modes))
    masks = draw(st.lists(st.integers(0, 2**n - 1), max_size=max_terms))
    return CliffordElement(n, {m: draw(coeff) for m in masks})


@st.composite
def element_pairs(draw, max_modes=6, count=2):
    n = draw(st.integers(1, max_modes))
    return tuple(draw(elements(n_modes=n)) for _ in range(count))


def rng(seed=0):
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance PASS/FAIL lines, which plain ``pytest -v`` would otherwise capture."""
    import sys

    lines = []
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and hasattr(mod, "RESULTS"):
            lines = [mod.format_line(*r) for r in sorted(mod.RESULTS.items())]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
