import math
import pathlib

import numpy as np
import pytest

import selfsim

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def test_lyapunov_and_entropy_of_half_bernoulli():
    ifs = selfsim.Ifs.load(str(DATA / "bernoulli_half.ifs"))
    assert (ifs.dim, ifs.size, ifs.exact) == (1, 2, True)
    chi = ifs.lyapunov()
    assert chi["lo"] <= -math.log(2) <= chi["hi"]
    assert chi["kind"] == "contracting"
    h = ifs.entropy(level=6)
    assert h["upper"] == pytest.approx(math.log(2))
    dim = ifs.dimension(level=6)
    assert dim["upper"] == pytest.approx(1.0)


def test_golden_collisions_lower_the_entropy():
    ifs = selfsim.Ifs.load(str(DATA / "golden_bernoulli.ifs"))
    h = ifs.entropy(level=3)
    assert h["collisions"] > 0
    assert h["upper"] < math.log(2)


def test_serialize_round_trip():
    ifs = selfsim.Ifs.load(str(DATA / "rotation_2d.ifs"))
    again = selfsim.Ifs.parse(ifs.serialize())
    assert again.serialize() == ifs.serialize()
    assert again.dim == 2


def test_sampling_is_reproducible_and_supported_on_the_attractor():
    ifs = selfsim.Ifs.load(str(DATA / "bernoulli_half.ifs"))
    a = ifs.sample(500, seed=7)
    b = ifs.sample(500, seed=7)
    assert a.shape == (500, 1)
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) <= 2 + 1e-9)


def test_detail_of_a_point_mass_is_one():
    for d in (1, 2):
        v = selfsim.detail(np.zeros((1, d)), r=0.1)
        assert v["raw"] == pytest.approx(1.0, abs=1e-8)
        assert v["error"] < 1e-6


def test_detail_decreases_under_spreading():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(200, 1))
    spread = selfsim.detail(pts, r=0.05)["value"]
    point = selfsim.detail(np.zeros((1, 1)), r=0.05)["value"]
    assert spread < point


def test_bernoulli_criterion_branch_minimum():
    report = selfsim.bernoulli_criterion("999/1000")
    assert report["branch_min"] == pytest.approx(0.2677, abs=1e-3)


def test_parse_errors_raise_value_error():
    with pytest.raises(ValueError):
        selfsim.Ifs.parse("atom: p=9/20; rho=1/2; b=[1]\natom: p=9/20; rho=1/2; b=[0]\n")
