import math

import numpy as np
import pytest

import qpur


def test_version():
    assert qpur.__version__.count(".") == 2


def test_qcore_matrices():
    jz = qpur.jz_operator(3)
    assert np.allclose(np.diag(jz).real, [1, 0, -1])
    f = qpur.qft_matrix(2)
    assert np.allclose(f, np.array([[1, 1], [1, -1]]) / math.sqrt(2))
    assert qpur.impurity(qpur.maximally_mixed(4)) == pytest.approx(0.75)


def test_analytic():
    assert qpur.mean_impurity(2.0, 2) == pytest.approx(0.03429870439536942, rel=1e-9)
    assert qpur.trajectory_bound("upper", 10.0, 5) == pytest.approx(0.5, abs=1e-6)
    d = qpur.log_impurity_distribution(2.0, 5)
    assert d["mean"] == pytest.approx(-2.41, abs=0.02)
    assert len(d["ell"]) == len(d["density"])


def test_feedback():
    b = qpur.speedup_bounds(3)
    assert b["lower"] == pytest.approx(8 / 3)
    assert b["upper_qft"] == pytest.approx(8 / 3)
    x = qpur.effective_observable(qpur.mub_basis_d4(1), qpur.jz_operator(4))
    assert qpur.dL_complementary(np.array([0.5, 0.0, 0.5, 0.0]), x) == pytest.approx(0.0, abs=1e-15)
    assert qpur.speedup_from_max_element(qpur.mub_basis_d4(1), qpur.jz_operator(4)) == pytest.approx(8.0)


def test_simulate_is_deterministic():
    a = qpur.simulate(dim=3, protocol="qft", t_final=0.2, dt=1e-3, ensemble=4, seed=7)
    b = qpur.simulate(dim=3, protocol="qft", t_final=0.2, dt=1e-3, ensemble=4, seed=7, threads=1)
    assert a["final_L"] == b["final_L"]
    assert a["times"][0] == 0.0


def test_search_and_wigner():
    r = qpur.search(4, restarts=0)
    assert r["S"] == pytest.approx(8.0)
    g = qpur.wigner_grid(qpur.maximally_mixed(3), 32)
    assert np.allclose(g["W"], 1 / (4 * math.pi))
    assert qpur.clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == pytest.approx(1 / math.sqrt(2))


def test_errors_are_translated():
    with pytest.raises(qpur.QpurError, match="invalid-dimension"):
        qpur.jz_operator(1)
    with pytest.raises(qpur.QpurError, match="invalid-argument"):
        qpur.trajectory_bound("lower", 1.0, 3)


def test_git_blob_hash():
    assert qpur.git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"


def test_acceptance_entry_point():
    assert qpur.acceptance_ids()[0] == "C1"
    r = qpur.run_check("C2")
    assert r["passed"]
    assert r["line"].startswith("PASS C2")
