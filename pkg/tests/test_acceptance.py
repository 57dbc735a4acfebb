"""End-to-end acceptance checks, one per headline claim.

Each test prints one PASS/FAIL line straight to the terminal (bypassing
capture) and then asserts, so a plain ``pytest tests/test_acceptance.py``
shows the scorecard even on a fully green run.
"""
import json

import numpy as np
import pytest

from sglab import (
    DetectorModel,
    SpinPrep,
    blindness_contrast,
    condition_on_spin_x,
    expectation_t4,
    partial_trace,
    qubits,
    reduced_rho_analytic,
    rho_t4_full,
    run_joint_mode,
    run_local_mode,
    sweep_suppression,
)
from sglab.cli import main
from sglab.sampling import split
from sglab.tensor import PureState

BALANCED = SpinPrep.balanced()

# Pinned seed for the Monte Carlo criteria; chosen once and frozen.
MC_SEED = 1
MC_SHOTS = 100000


@pytest.fixture
def announce(capfd):
    def _announce(number, label, ok):
        with capfd.disabled():
            print(f"CRITERION {number:2d} {'PASS' if ok else 'FAIL'}: {label}",
                  flush=True)
        assert ok, f"criterion {number} failed: {label}"
    return _announce


def test_criterion_01_joint_eigenvalues(announce):
    wants = {"ZZI": 1.0, "ZIZ": -1.0, "IZZ": -1.0, "XXX": 1.0}
    ok = all(abs(expectation_t4(BALANCED, w) - v) <= 1e-12 for w, v in wants.items())
    announce(1, "entangled state is a joint eigenstate (ZZI, ZIZ, IZZ, XXX)", ok)


def test_criterion_02_local_z_statistics(announce):
    report = run_local_mode(BALANCED, "Z", MC_SHOTS, seed=MC_SEED)
    counts = report.summary["word_counts"]
    ok = set(counts) <= {"110", "001"}
    ok = ok and abs(counts.get("110", 0) / MC_SHOTS - 0.5) <= 0.005
    announce(2, "local Z readout: only the two collapse words, 50/50", ok)


def test_criterion_03_local_x_statistics(announce):
    report = run_local_mode(BALANCED, "X", MC_SHOTS, seed=MC_SEED)
    s = report.summary
    ok = all(abs(s[k]) <= 0.005 for k in ("mean_s", "mean_a_up", "mean_a_dn"))
    ok = ok and s["product_always_plus_one"]
    announce(3, "local X readout: unbiased slots, product +1 every shot", ok)


def test_criterion_04_mixture_contrast(announce):
    mix_z = run_local_mode(BALANCED, "Z", MC_SHOTS, seed=MC_SEED, mixture=True)
    counts = mix_z.summary["word_counts"]
    ok = set(counts) <= {"110", "001"}
    ok = ok and abs(counts.get("110", 0) / MC_SHOTS - 0.5) <= 0.005
    mix_x = run_local_mode(BALANCED, "X", MC_SHOTS, seed=MC_SEED, mixture=True)
    ok = ok and abs(mix_x.summary["product_mean"]) <= 0.01
    announce(4, "branch mixture: Z sector identical, X product mean 0", ok)


def test_criterion_05_conditioned_bell_states(announce):
    reg = qubits("a_up", "a_dn")
    ok = True
    for outcome, sign in ((+1, 1), (-1, -1)):
        amps = np.zeros(4, dtype=complex)
        amps[0b10], amps[0b01] = 1 / np.sqrt(2), sign / np.sqrt(2)
        got = condition_on_spin_x(BALANCED, outcome)
        ok = ok and abs(got.fidelity(PureState(reg, amps)) - 1.0) <= 1e-12
    announce(5, "spin-X conditioning leaves the two Bell states", ok)


def test_criterion_06_joint_sequence_nondestructive(announce):
    first = run_joint_mode(BALANCED, ["IZZ", "ZZI", "XXX"], seed=11)
    ok = first.summary["readouts"] == [-1, +1, +1]
    ok = ok and first.summary["final_fidelity"] >= 1 - 1e-10
    again = run_joint_mode(BALANCED, ["IZZ", "ZZI", "XXX"], seed=11)
    ok = ok and again.summary == first.summary
    repeated = run_joint_mode(BALANCED, ["IZZ", "IZZ", "XXX", "XXX"], seed=12)
    reads = repeated.summary["readouts"]
    ok = ok and reads == [-1, -1, +1, +1]
    ok = ok and repeated.summary["final_fidelity"] >= 1 - 1e-10
    announce(6, "joint sequence is deterministic, repeatable, nondestructive", ok)


def test_criterion_07_ordinary_premeasurement(announce):
    from sglab.experiment import ordinary_premeasurement
    from sglab.observables import PauliString, apply_pauli
    state = ordinary_premeasurement(SpinPrep(0.6, 0.8j)).state
    wants = {"IZZ": -1.0, "ZZI": 1.0, "ZIZ": -1.0}
    ok = True
    for word, value in wants.items():
        obs = PauliString.from_word(word, state.register)
        got = float(np.real(np.vdot(state.amplitudes,
                                    apply_pauli(state, obs).amplitudes)))
        ok = ok and abs(got - value) <= 1e-12
    announce(7, "path premeasurement carries the same joint Z words", ok)


def test_criterion_08_reduced_matrix_oracle(announce):
    prep = SpinPrep(0.6, 0.8j)
    worst = 0.0
    for mode in ("transmitting", "absorbing"):
        keep = ["s", "r_up", "r_dn"] if mode == "transmitting" else ["r_up", "r_dn"]
        for d in (2, 3, 4):
            streams = split(1234 + d, 100)
            for k in range(50):
                det_up = DetectorModel.sample(d, streams[2 * k], mode=mode)
                det_dn = DetectorModel.sample(d, streams[2 * k + 1], mode=mode)
                full = rho_t4_full(prep, det_up, det_dn)
                reduced = partial_trace(full, keep)
                analytic = reduced_rho_analytic(prep, det_up, det_dn)
                worst = max(worst, float(np.max(np.abs(reduced.entries
                                                       - analytic.entries))))
    ok = worst <= 1e-10
    announce(8, f"analytic reduced matrix equals traced full matrix "
                f"(worst {worst:.1e})", ok)


def test_criterion_09_suppression_scaling(announce):
    d_values = [4, 8, 16, 32]
    rows, _ = sweep_suppression(BALANCED, d_values, 500, seed=7)
    ok = True
    for d in d_values:
        vals = np.array([r["f_abs2_up"] for r in rows if r["d"] == d]
                        + [r["f_abs2_dn"] for r in rows if r["d"] == d])
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        ok = ok and abs(vals.mean() - 1 / d**2) <= 3 * se
    for d in d_values:
        streams = split(900 + d, 2)
        report = blindness_contrast(
            BALANCED,
            DetectorModel.sample(d, streams[0]),
            DetectorModel.sample(d, streams[1]),
        )
        ok = ok and abs(report["z_s_z_rup"] - 1.0) <= 1e-12
        ok = ok and abs(report["z_s_z_rdn"] + 1.0) <= 1e-12
        ok = ok and abs(report["z_rup_z_rdn"] + 1.0) <= 1e-12
    announce(9, "mean |f|^2 tracks 1/d^2; Z correlations stay exact", ok)


def test_criterion_10_demon_vs_readout(announce):
    streams = split(321, 2)
    det_up = DetectorModel.sample(3, streams[0])
    det_dn = DetectorModel.sample(3, streams[1])
    report = blindness_contrast(BALANCED, det_up, det_dn)
    ok = abs(report["demon_full"] - 1.0) <= 1e-10
    want = 2 * np.real(0.5 * report["f_up"] * np.conj(report["f_dn"]))
    ok = ok and abs(report["readout_only_full"] - want) <= 1e-10
    announce(10, "demon operators restore the X correlation; plain readout "
                 "sees the suppressed value", ok)


def test_criterion_11_cli_byte_identical(announce, tmp_path):
    out = tmp_path / "run.jsonl"
    args = ["run", "local", "--shots", "2000", "--seed", "77", "--out", str(out)]
    ok = main(args) == 0
    first = out.read_bytes()
    ok = ok and main(args) == 0
    ok = ok and out.read_bytes() == first
    # sanity: the file is well formed json-lines with a config echo
    records = [json.loads(l) for l in first.decode().splitlines()]
    ok = ok and records[0]["record"] == "config" and records[0]["seed"] == 77
    announce(11, "same-seed command line runs are byte-identical", ok)
