import json
import math
import os
import subprocess

import pytest

import omcspin


def test_cooperativity_and_reflectance():
    assert omcspin.optical_cooperativity(3.6, 15.0, 0.11) == pytest.approx(31.418181818181818, rel=1e-14)
    x, r = omcspin.reflectance_spectrum([406.7], 406.7, 15.0, 4.0, 406.7, 0.11, 0.0)
    assert r[0] == pytest.approx(0.21777777777777778, rel=1e-14)


def test_reflectance_fit_round_trip():
    grid = [406.66 + 0.08 * i / 400 for i in range(401)]
    _, r = omcspin.reflectance_spectrum(grid, 406.7, 15.0, 4.0, 406.7005, 0.11, 3.6)
    fit = omcspin.fit_reflectance(grid, r, 406.7002, 14.0, 4.4, 406.7008, 0.12, 3.3)
    assert fit["g_so"] == pytest.approx(3.6, rel=1e-6)
    assert fit["kappa_e"] == pytest.approx(4.0, rel=1e-6)
    assert fit["report"]["converged"]


def test_spin_phonon():
    g = omcspin.infer_g_sm(10.0, 1.0, 35.0)
    assert g == pytest.approx(0.2806243040080456, rel=1e-14)
    assert omcspin.purcell_rate(g, 12.06, 12060.0 / 35.0, 12.06, 1.0) == pytest.approx(10.0, rel=1e-12)
    c_t1, c_t2 = omcspin.cooperativities(0.3, 35.0, 1.0, 1.0)
    assert 9.0 <= c_t1 <= 11.0 and 0.009 <= c_t2 <= 0.012
    _, gamma = omcspin.decay_spectrum([(12.06, 12060.0 / 35.0, 0.3)], [12.06])
    assert gamma[0] == pytest.approx(4 * 0.09 / 35.0 * 1000, rel=1e-12)


def test_thermometry():
    assert omcspin.bose_occupancy(12.06, 0.150) == pytest.approx(0.02155240219749561, rel=1e-12)
    p_up, p_down = omcspin.spin_populations(8.3, 0.150)
    assert p_up + p_down == pytest.approx(1.0)
    assert omcspin.temperature_from_saturation(p_up, 8.3) == pytest.approx(0.150, rel=1e-12)


def test_errors_are_typed():
    with pytest.raises(omcspin.DomainError):
        omcspin.infer_g_sm(1.0, 1.0, 35.0)
    with pytest.raises(omcspin.OmcspinError):
        omcspin.transverse_strain_from_splitting(40.0, 46.0)
    with pytest.raises(omcspin.FitFailureError):
        omcspin.fit_lorentzian([float(i) for i in range(20)], [1.0] * 20)


def test_decay_pipeline_is_seeded():
    taus = [2.0, 20.0, 50.0, 100.0, 200.0, 300.0, 500.0]
    a = omcspin.simulate_decay_curve(taus, 10.0, repetitions=500000, seed=4)
    b = omcspin.simulate_decay_curve(taus, 10.0, repetitions=500000, seed=4)
    assert a == b
    exact = omcspin.simulate_decay_curve(taus, 10.0, analytic=True)
    fit = omcspin.fit_exponential_decay(*exact)
    assert fit["params"]["gamma_khz"] == pytest.approx(10.0, rel=1e-8)


def test_run_command_and_acceptance():
    code, out, _ = omcspin.run_command(["thermometry", "--omega-ghz", "12.06", "--temp-k", "0.150"])
    assert code == 0
    assert math.isclose(json.loads(out)["n_th"], 0.0216, rel_tol=0.01)
    results = omcspin.run_acceptance()
    assert len(results) == 13
    assert all(passed for _, _, passed, _ in results)


@pytest.mark.skipif("OMCSPIN_CLI" not in os.environ, reason="CLI binary not provided")
def test_cli_binary_exit_codes():
    cli = os.environ["OMCSPIN_CLI"]
    assert subprocess.run([cli, "bogus"], capture_output=True).returncode == 2
    assert subprocess.run([cli, "t1-fit", "--decay", "/nonexistent.csv"], capture_output=True).returncode == 3
