import numpy as np
import pytest

from specmeas import harness, measure, serialize
from specmeas.errors import CapExceeded


def test_caps_enforced():
    with pytest.raises(CapExceeded):
        harness.Caps(h_dim=5)
    with pytest.raises(CapExceeded):
        harness.Caps(k_dim=17)
    with pytest.raises(CapExceeded):
        harness.Caps(space=9)
    with pytest.raises(CapExceeded):
        harness.Caps(horizon=65)


def test_gen_scenario_deterministic():
    for kind in ("A", "B", "Cprime", "D"):
        s1 = harness.gen_scenario(kind, 42)
        s2 = harness.gen_scenario(kind, 42)
        assert s1.dims == s2.dims
        assert s1.scenario_id == s2.scenario_id


def test_kind_a_single_point_is_character():
    # |X| = 1 forces every generator image to be a scalar multiple of id
    for seed in range(40):
        sc = harness.gen_scenario("A", seed)
        if len(sc.space.points()) == 1:
            img = next(iter(sc.payload["images"].values()))
            val = sc.payload["values"][0][0]
            assert np.allclose(img, val * np.eye(img.shape[0]), atol=1e-10)
            rep = harness.verify_theorem_a(sc)
            assert rep.passed
            return
    pytest.fail("no single-point scenario in the sweep")


def test_verify_a_diagonal_hand_case():
    # rho(x) = diag(1,2): E has atoms at 1 and 2; rho(x^2) = diag(1,4)
    space = measure.DiscreteSpace(labels=(0, 1))
    sc = harness.Scenario(
        kind="A", seed=0, dims=(2,), space=space,
        payload={"images": {"b0": np.diag([1.0, 2.0]).astype(complex)},
                 "values": [(1.0,), (2.0,)]},
    )
    rep = harness.verify_theorem_a(sc)
    assert rep.passed
    assert any(c.name.startswith("represent") for c in rep.checks)


def test_verify_a_unitary_generator():
    # unitary diag(1, i): atom values on the unit circle
    space = measure.DiscreteSpace(labels=(0, 1))
    sc = harness.Scenario(
        kind="A", seed=1, dims=(2,), space=space,
        payload={"images": {"b0": np.diag([1.0, 1.0j]).astype(complex)},
                 "values": [(1.0,), (1.0j,)]},
    )
    rep = harness.verify_theorem_a(sc)
    assert rep.passed


def test_verify_b_oracle_round_trip():
    sc = harness.gen_scenario("B", 7)
    rep = harness.verify_theorem_b(sc)
    assert rep.passed, [c.name for c in rep.checks if not c.passed]
    recon = [c for c in rep.checks if c.name.startswith("reconstruction")]
    assert recon and all(c.residual <= 1e-7 for c in recon)


def test_verify_b_scalar_algebra_reduces_to_a():
    # find a kind-B scenario with W1 = scalars
    for seed in range(50):
        sc = harness.gen_scenario("B", seed)
        if sc.dims[0] == 1:
            rep = harness.verify_theorem_b(sc)
            assert rep.passed
            return
    pytest.fail("no scalar-algebra scenario in the sweep")


def test_verify_c_number_operator():
    sc = harness.number_operator_scenario()
    rep = harness.verify_theorem_c(sc)
    assert rep.passed, [c.name for c in rep.checks if not c.passed]


def test_verify_c_bounded_generator():
    sc = harness.Scenario(
        kind="Cprime", seed=5, dims=(1,) * 16,
        space=measure.DiscreteSpace(horizon=16),
        payload={"model": serialize.block_model_from_doc({
            "horizon": 16,
            "block_dims": {"prefix": [1], "repeat": 1},
            "generators": [
                {"name": "g0", "kind": "exp-index", "rate": -0.7}],
            "w": None,
        })},
    )
    rep = harness.verify_theorem_c(sc)
    assert rep.passed


def test_verify_d_scalar_matches_c():
    sc = harness.gen_scenario("Cprime", 9)
    rep_c = harness.verify_theorem_c(sc)
    rep_d = harness.verify_theorem_d(sc)
    assert [c.name for c in rep_c.checks] == [c.name for c in rep_d.checks]
    assert [c.residual for c in rep_c.checks] == [c.residual for c in rep_d.checks]


def test_verify_d_matrix_model():
    sc = harness.gen_scenario("D", 7)
    rep = harness.verify_theorem_d(sc)
    assert rep.passed, [c.name for c in rep.checks if not c.passed]


@pytest.mark.parametrize("fault", harness.FAULT_CLASSES)
def test_fault_detection(fault):
    for seed in range(3):
        rep = harness.fault_report(fault, seed)
        assert rep.passed, f"{fault} undetected at seed {seed}"


def test_fault_residual_scales_with_injection():
    # non-idempotent bump of 1e-3 shows up within 10x of the magnitude
    sc = harness.gen_scenario("B", 4)
    bad = harness.inject_fault(sc, "non-idempotent-projection", magnitude=1e-3)
    rep = harness.verify_theorem_b(bad)
    assert not rep.passed
    worst = max(c.residual for c in rep.checks if not c.passed)
    assert 1e-4 <= worst <= 1e-1


def test_characterization_reports_pass():
    sc = harness.gen_scenario("B", 11)
    (rep,) = harness.characterization_reports(sc, tuples=3)
    assert rep.passed
    k_entries = [c for c in rep.checks if c.name.startswith("condition2")]
    assert k_entries and all(c.residual <= 1.0 + 1e-9 for c in k_entries)


def test_run_suite_sorted_and_parallel_equal():
    serial = harness.run_suite("A", 0, 6, jobs=1)
    parallel = harness.run_suite("A", 0, 6, jobs=3)
    assert [r.scenario for r in serial] == sorted(r.scenario for r in serial)
    assert [r.to_doc() | {"wall_ms": 0} for r in serial] == [
        r.to_doc() | {"wall_ms": 0} for r in parallel
    ]


def test_report_doc_schema():
    rep = harness.run_scenario("A", 1)
    doc = rep.to_doc()
    assert doc["schema"] == 1
    assert set(doc) == {"schema", "scenario", "checks", "pass", "wall_ms"}
    for c in doc["checks"]:
        assert set(c) == {"name", "residual", "tol", "pass", "flags"}


def test_check_measure_file(tmp_path):
    space = measure.DiscreteSpace(labels=(0, 1))
    e = measure.SpectralMeasure(
        space=space,
        atoms={0: np.diag([1.0, 0.0]).astype(complex),
               1: np.diag([0.0, 1.0]).astype(complex)},
    )
    good = tmp_path / "good.json"
    serialize.dump(serialize.measure_to_doc(e), good)
    assert harness.check_measure_file(good).passed
    bad_doc = serialize.measure_to_doc(e)
    bad_doc["atoms"][0][1]["data"][0] = [0.5, 0.0]  # no longer idempotent
    bad = tmp_path / "bad.json"
    serialize.dump(bad_doc, bad)
    assert not harness.check_measure_file(bad).passed
