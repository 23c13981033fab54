import json

import numpy as np
import pytest

from indexlab import verify
from indexlab.verify import Comparison, Scenario, Settings


def test_settings_doubled():
    s = Settings()
    d = s.doubled()
    assert (d.N, d.L, d.K, d.K_big, d.Q, d.chain_N) == (2048, 80.0, 96, 256, 64, 4096)
    assert d.T_schedule == tuple(2 * t for t in s.T_schedule)
    assert d.grid().h == s.grid().h


def test_comparison_ok():
    assert Comparison("a", -1.02, -1, 0.05).ok
    assert not Comparison("a", -1.2, -1, 0.05).ok
    assert Comparison("pair", (-1, -1), (-1, -1), 0).ok
    assert not Comparison("pair", (-1, 0), (-1, -1), 0).ok


def test_levinson_report():
    r = verify.check_levinson(0.5, -1.0)
    assert r.pass_ and r.guard_ok
    assert r.lhs == 1
    assert r.diagnostics["gap_ok"] is True
    d = r.to_dict()
    assert d["scenario"] == "levinson" and d["schema"] == verify.SCHEMA and d["pass"] is True


def test_json_is_deterministic():
    a = verify.check_levinson(0.2, 2.0).to_json()
    b = verify.check_levinson(0.2, 2.0).to_json()
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k != "elapsed"}
    assert strip(a) == strip(b)
    assert a == b
    d = json.loads(a)
    assert list(d) == sorted(d)


def test_number_formatting():
    assert verify._num(1 / 3) == 0.333333333333
    assert verify._num(2 + 0j) == 2.0
    assert verify._num(1 - 2j) == {"re": 1.0, "im": -2.0}
    assert verify._num(np.int64(3)) == 3
    assert verify._num(float("nan")) == "nan"


@pytest.mark.parametrize("n,kappa", [(0.5, 1), (2.0, -1)])
def test_periodic_report(n, kappa):
    r = verify.check_periodic(n, kappa)
    assert r.pass_, r.to_json()
    assert r.lhs == -1


def test_asymptotic_report():
    r = verify.check_asymptotic(1.0, 1, 0.5, -1.0)
    assert r.pass_, r.to_json()
    assert tuple(r.lhs) == (-1, -1)


def test_relative_report():
    r = verify.check_relative(1.0, 1, 0.5, -1.0)
    assert r.pass_, r.to_json()
    assert r.lhs == -1


def test_almost_periodic_report():
    r = verify.check_almost_periodic(1.0, 1, 0.5, 1)
    assert r.pass_, r.to_json()


def test_density_report():
    r = verify.check_density(1.0, 1, 0.5, 1, (10.0, 100.0))
    assert r.pass_, r.to_json()


def test_identities_report():
    r = verify.check_identities()
    assert r.pass_, r.to_json()
    assert r.scenario is Scenario.IDENTITIES
    for k, v in r.lhs.items():
        assert v <= verify.IDENTITY_TOLERANCES[k]


def test_failing_report_is_reported_not_raised():
    s = Settings(K=2, K_big=4, Q=16)
    r = verify.check_periodic(0.3, 1, s)
    assert not r.pass_ and r.guard_ok


def test_guard_trips_on_tiny_grid():
    r = verify.check_levinson(0.2, -3.0, Settings(N=128, L=8.0))
    assert not r.guard_ok and not r.pass_
