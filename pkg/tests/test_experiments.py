import numpy as np
import pytest

from willmore_ilp.experiments import LADDER, Rung, run_rung
from willmore_ilp.instances import direction_offsets, square_loop
from willmore_ilp.solver import Status

FAST = [r for r in LADDER if r.label != "n2-mixed"]


@pytest.mark.parametrize("rung", FAST, ids=[r.label for r in FAST])
def test_fast_rungs_are_integral(rung):
    r = run_rung(rung, always_ilp=True)
    assert r.lp_status is Status.OPTIMAL and r.n_fractional == 0
    assert r.ilp_status is Status.OPTIMAL and r.ilp_nodes == 0
    assert r.ilp_objective == pytest.approx(r.lp_objective, abs=1e-9)
    assert r.sandwich_ok
    if "flat" in rung.label:
        assert r.lp_objective == 0.0
    else:
        assert r.lp_objective > 0


def test_cup_costs_more_than_flat():
    flat, cup = run_rung(LADDER[0]), run_rung(LADDER[1])
    assert cup.lp_objective > flat.lp_objective


def test_line_format():
    line = run_rung(LADDER[0]).line()
    assert line.startswith("n1-flat") and "fractional=0" in line and "ilp=-" in line


def test_direction_offsets():
    loop = square_loop(1)
    assert direction_offsets(loop, ["up"]) == [(0, 0, 1)] * 4
    inward = direction_offsets(loop, ["in"])
    outward = direction_offsets(loop, ["out"])
    assert all(np.array_equal(-np.array(a), b) for a, b in zip(inward, outward))
    with pytest.raises(ValueError):
        direction_offsets(loop, ["in", "up"])
    with pytest.raises(ValueError):
        direction_offsets(loop, ["sideways"])


def test_rung_build_validates():
    bad = Rung("bad", 1, (1, 1, 1), 1, 0, ("in", "in"))
    with pytest.raises(ValueError):
        bad.build()
