import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from bifree.bifree_conv import (
    GaussianParams,
    compound_poisson_quintuple,
    gaussian_quintuple,
    product_quintuple,
)
from bifree.measure import Measure1D, Measure2D
from bifree.rtransform1d import FreeLKPair

settings.register_profile(
    "bifree", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("bifree")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(label: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok

    return record


coord = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False).map(lambda v: round(v, 3))
weight = st.floats(min_value=0.05, max_value=1.0, allow_nan=False)


@st.composite
def prob_measures_2d(draw, min_atoms=1, max_atoms=5):
    k = draw(st.integers(min_atoms, max_atoms))
    s = [draw(coord) for _ in range(k)]
    t = [draw(coord) for _ in range(k)]
    w = np.array([draw(weight) for _ in range(k)])
    return Measure2D(s, t, w / w.sum())


@st.composite
def off_axis_points(draw, lo=0.2, hi=2.0):
    def one():
        x = draw(st.floats(-hi, hi))
        y = draw(st.floats(lo, hi)) * draw(st.sampled_from([-1, 1]))
        return complex(x, y)

    return one(), one()


@st.composite
def small_points(draw, scale=0.08):
    """Points ``(z, w)`` near the origin inside a cone of half-angle 45 degrees."""

    def one():
        y = draw(st.floats(0.2, 1.0)) * scale
        x = draw(st.floats(-0.9, 0.9)) * y
        return complex(x, y * draw(st.sampled_from([-1, 1])))

    return one(), one()


nonzero_coord = st.sampled_from([-1.5, -1.0, -0.5, 0.5, 1.0, 2.0])


@st.composite
def valid_quintuples(draw):
    """Sums of Gaussian, product and compound Poisson quintuples with at most 6 atoms."""
    a = draw(st.floats(0.0, 2.0))
    b = draw(st.floats(0.0, 2.0))
    rho = draw(st.floats(-1.0, 1.0)) * np.sqrt(a * b)
    q = gaussian_quintuple(GaussianParams(draw(st.floats(-1, 1)), draw(st.floats(-1, 1)), a, b, rho))
    n_axis = draw(st.integers(0, 2))
    if n_axis:
        x1 = [draw(nonzero_coord) for _ in range(n_axis)]
        x2 = [draw(nonzero_coord) for _ in range(n_axis)]
        p1 = FreeLKPair(0.0, Measure1D(x1, [draw(weight) for _ in x1]))
        p2 = FreeLKPair(0.0, Measure1D(x2, [draw(weight) for _ in x2]))
        q = q + product_quintuple(p1, p2)
    n_off = draw(st.integers(0, 2))
    if n_off:
        s = [draw(nonzero_coord) for _ in range(n_off)]
        t = [draw(nonzero_coord) for _ in range(n_off)]
        w = np.array([draw(weight) for _ in range(n_off)])
        q = q + compound_poisson_quintuple(draw(st.floats(0.1, 2.0)), Measure2D(s, t, w / w.sum()))
    return q


def random_valid_quintuple(rng: np.random.Generator):
    """Numpy-seeded counterpart of :func:`valid_quintuples` for fixed-size batches."""
    a, b = rng.uniform(0, 2, 2)
    q = gaussian_quintuple(GaussianParams(*rng.uniform(-1, 1, 2), a, b, rng.uniform(-1, 1) * np.sqrt(a * b)))
    grid = np.array([-1.5, -1.0, -0.5, 0.5, 1.0, 2.0])
    n_axis = int(rng.integers(0, 3))
    if n_axis:
        pairs = [FreeLKPair(float(rng.normal()), Measure1D(rng.choice(grid, n_axis), rng.uniform(0.05, 1, n_axis)))
                 for _ in range(2)]
        q = q + product_quintuple(*pairs)
    n_off = int(rng.integers(0, 3))
    if n_off:
        w = rng.uniform(0.05, 1, n_off)
        jump = Measure2D(rng.choice(grid, n_off), rng.choice(grid, n_off), w / w.sum())
        q = q + compound_poisson_quintuple(float(rng.uniform(0.1, 2)), jump)
    return q
