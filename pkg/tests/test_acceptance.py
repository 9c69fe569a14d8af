"""Acceptance suite: eight release criteria, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
"""
import time
from contextlib import contextmanager

import numpy as np
import pytest

from deepkey import (dsp, evaluation, gatekeeper, identifier, nn, pipeline,
                     synthgen)
from deepkey.config import Config
from deepkey.dsp import Modality, Recording
from deepkey.pipeline import (AuthRequest, Reason, Verdict, authenticate,
                              compose_frr)

from test_identifier import brute_force_knn
from test_nn import naive_matmul, scalar_lstm_step


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {number} FAIL: {description}")
        raise
    print(f"\nACCEPTANCE {number} PASS: {description}")


def test_criterion_1_gradient_correctness():
    with criterion(1, "analytic BPTT matches finite differences (<1e-4, 10 seeds)"):
        start = time.perf_counter()
        h = 1e-5
        worst = 0.0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            params = nn.init_params(3, 8, 3, rng)
            X = rng.standard_normal((2, 5, 3))
            Y = np.eye(3)[rng.integers(0, 3, 2)]
            _, state = nn.forward(params, X)
            grads = nn.backward(params, state, Y, 0.001)
            for name, arr in params.named().items():
                flat = arr.ravel()
                for idx in range(flat.size):
                    orig = flat[idx]
                    flat[idx] = orig + h
                    lp = nn.loss(nn.forward(params, X)[0], Y, 0.001, params)
                    flat[idx] = orig - h
                    lm = nn.loss(nn.forward(params, X)[0], Y, 0.001, params)
                    flat[idx] = orig
                    gn = (lp - lm) / (2 * h)
                    ga = grads[name].ravel()[idx]
                    worst = max(worst, abs(ga - gn) / max(abs(ga) + abs(gn), 1e-4))
        elapsed = time.perf_counter() - start
        assert worst < 1e-4, f"max relative gradient error {worst:.3e}"
        assert elapsed < 30.0, f"gradient check took {elapsed:.1f}s"


def test_criterion_2_filter_correctness():
    with criterion(2, "3rd-order 0.5-3.5 Hz band-pass magnitudes and impulse FFT"):
        c = dsp.design_bandpass(3, 0.5, 3.5, 128.0)
        assert c.magnitude(10.0)[0] <= 0.05
        assert c.magnitude(0.0)[0] < 1e-6
        peak = c.magnitude(np.linspace(0.5, 3.5, 301)).max()
        for edge in (0.5, 3.5):
            gain = c.magnitude(edge)[0]
            assert abs(gain - peak / np.sqrt(2)) <= 0.02 * peak / np.sqrt(2)
        n = 4096
        data = np.zeros((n, 1))
        data[0, 0] = 1.0
        rec = Recording(data, 128.0, Modality.EEG)
        impulse = dsp.apply_filter(c, rec).data[:, 0]
        fft_mag = np.abs(np.fft.rfft(impulse))
        analytic = c.magnitude(np.fft.rfftfreq(n, 1 / 128.0))
        assert np.max(np.abs(fft_mag - analytic)) < 1e-9


def test_criterion_3_nu_property():
    with criterion(3, "nu=0.15 OC-SVM outlier fraction in [0.10, 0.20], SV fraction >= 0.13"):
        start = time.perf_counter()
        for seed in range(5):
            rng = np.random.default_rng(seed)
            X = rng.standard_normal((800, 10))
            m = gatekeeper.train_gate(X, nu=0.15)
            vals = gatekeeper.decision_values(m, X)
            outlier = float(np.mean(vals < 0))
            sv = m.support_vectors.shape[0] / X.shape[0]
            assert 0.10 <= outlier <= 0.20, f"seed {seed}: outlier fraction {outlier}"
            assert sv >= 0.13, f"seed {seed}: SV fraction {sv}"
        assert time.perf_counter() - start < 60.0


def test_criterion_4_oracle_equivalence():
    with criterion(4, "KNN / OC-SVM / dense / LSTM match independent oracles"):
        rng = np.random.default_rng(0)
        codes = rng.standard_normal((200, 64))
        labels = rng.integers(0, 6, 200)
        bank = identifier.CodeBank(codes=codes, labels=labels)
        for k in (1, 3):
            for q in rng.standard_normal((40, 64)):
                assert identifier.knn_predict(bank, q, k) == \
                    brute_force_knn(codes, labels, q, k)
        X = rng.standard_normal((150, 6)) + 0.5
        m = gatekeeper.train_gate(X, nu=0.15)
        for x in rng.standard_normal((20, 6)) * 2:
            xs = m.standardize(x)
            ref = sum(a * np.exp(-m.gamma * np.sum((xs - sv) ** 2))
                      for a, sv in zip(m.alphas, m.support_vectors)) - m.rho
            assert abs(gatekeeper.decision_value(m, x) - ref) < 1e-10
        x = rng.standard_normal((4, 5))
        dense = nn.DenseParams(W=rng.standard_normal((5, 3)), b=rng.standard_normal(3))
        assert np.max(np.abs(nn.dense_forward(x, dense)
                             - naive_matmul(x, dense.W, dense.b))) < 1e-12
        lstm = nn.LstmParams(
            w_x={g: rng.standard_normal((3, 4)) for g in nn.GATES},
            w_h={g: rng.standard_normal((4, 4)) for g in nn.GATES},
            b={g: rng.standard_normal(4) for g in nn.GATES})
        xin, h0, c0 = (rng.standard_normal(3), rng.standard_normal(4),
                       rng.standard_normal(4))
        h, c = nn.lstm_step(xin, h0, c0, lstm)
        h_ref, c_ref = scalar_lstm_step(xin, h0, c0, lstm)
        assert np.max(np.abs(h - h_ref)) < 1e-12
        assert np.max(np.abs(c - c_ref)) < 1e-12


class _Stub:
    def __init__(self, gate_ok, e_id, g_id):
        self.config = Config(gate_block=20)
        self._gate_ok, self._e, self._g = gate_ok, e_id, g_id

    def gate_check(self, eeg):
        return self._gate_ok

    def identify_eeg(self, eeg):
        return self._e

    def identify_gait(self, gait):
        return self._g


def test_criterion_5_fusion_rule():
    with criterion(5, "Algorithm-1 truth table and composed FRR 0.01027 +/- 1e-5"):
        rng = np.random.default_rng(0)
        req = AuthRequest(
            eeg=Recording(rng.standard_normal((20, 14)), 128, Modality.EEG),
            gait=Recording(rng.standard_normal((10, 27)), 80, Modality.GAIT))
        for gate_ok in (True, False):
            for e_id, g_id in ((1, 1), (1, 2), (2, 1), (0, 0)):
                d = authenticate(req, _Stub(gate_ok, e_id, g_id))
                if not gate_ok:
                    assert d.verdict is Verdict.DENY
                    assert d.reason is Reason.IMPOSTOR_FILTERED
                elif e_id == g_id:
                    assert d.verdict is Verdict.APPROVE
                    assert d.reason is Reason.APPROVED
                else:
                    assert d.verdict is Verdict.DENY
                    assert d.reason is Reason.ID_MISMATCH
        assert abs(compose_frr(0.006, 0.9961, 0.9996) - 0.01027) <= 1e-5


def test_criterion_6_end_to_end_synthetic():
    with criterion(6, "end-to-end analogue: gate FAR 0, fused FRR <= 5%, "
                      "accuracy >= 95%, session ordering, < 15 min"):
        start = time.perf_counter()
        cfg = Config()
        profiles = synthgen.make_profiles(7, cfg.seed)
        enrolled, impostor = profiles[:6], profiles[6]
        sessions = [synthgen.SessionConfig.for_index(i) for i in range(3)]

        train_recs = []
        for p in enrolled:
            for s in sessions:
                train_recs.append(synthgen.generate_eeg(p, s, 20.0))
                train_recs.append(synthgen.generate_gait(p, s, 20.0))
        system, report = pipeline.train_system(train_recs, cfg)

        # per-modality identification accuracy on the training holdout
        assert report.eeg_holdout_accuracy >= 0.95, report
        assert report.gait_holdout_accuracy >= 0.95, report

        # gate FAR over >= 200 impostor blocks of 200 raw EEG instances
        impostor_blocks = 0
        impostor_passes = 0
        for s in sessions:
            rec = synthgen.generate_eeg(impostor, s, 110.0)
            for block in dsp.segment_block(rec, cfg.gate_block):
                impostor_blocks += 1
                verdict, _ = gatekeeper.filter_block(system.gate, block)
                if verdict == "genuine":
                    impostor_passes += 1
        assert impostor_blocks >= 200, impostor_blocks
        assert impostor_passes == 0, f"gate FAR {impostor_passes}/{impostor_blocks}"

        # fused FRR over genuine requests drawn from longer fresh recordings
        genuine = 0
        rejected = 0
        for p in enrolled:
            for s in sessions:
                eeg = synthgen.generate_eeg(p, s, 25.0)
                gait = synthgen.generate_gait(p, s, 10.0)
                for req in evaluation.build_requests(eeg, gait):
                    d = authenticate(req, system)
                    genuine += 1
                    if not (d.verdict is Verdict.APPROVE and d.e_id == p.subject_id):
                        rejected += 1
        frr = rejected / genuine
        assert frr <= 0.05, f"fused FRR {frr:.4f} over {genuine} requests"

        # single-session training is no harder than multi-session training
        single_recs = []
        for p in enrolled:
            single_recs.append(synthgen.generate_eeg(p, sessions[0], 60.0))
            single_recs.append(synthgen.generate_gait(p, sessions[0], 60.0))
        _, single_report = pipeline.train_system(single_recs, cfg)
        assert single_report.eeg_holdout_accuracy >= report.eeg_holdout_accuracy
        assert single_report.gait_holdout_accuracy >= report.gait_holdout_accuracy

        elapsed = time.perf_counter() - start
        assert elapsed < 15 * 60, f"end-to-end run took {elapsed:.0f}s"


def test_criterion_7_datasize_sweep():
    with criterion(7, "EEG accuracy at 100% training fraction >= accuracy at 20%"):
        cfg = Config(hidden=32, n_iter_eeg=200, n_iter_gait=200, seed=42)
        profiles = synthgen.make_profiles(4, 11)
        recs = []
        for p in profiles:
            for i in range(2):
                s = synthgen.SessionConfig.for_index(i)
                recs.append(synthgen.generate_eeg(p, s, 10.0))
        rows = dict(evaluation.datasize_sweep(recs, cfg, [0.2, 1.0]))
        assert rows[1.0] >= rows[0.2], rows


def test_criterion_8_determinism(tmp_path):
    with criterion(8, "identical seeds give byte-identical bundles and reports"):
        cfg = Config(hidden=16, n_iter_eeg=40, n_iter_gait=40, gate_block=100,
                     gate_max_train=500, seed=9)
        profiles = synthgen.make_profiles(3, 9)
        recs = []
        for p in profiles:
            s = synthgen.SessionConfig.for_index(0)
            recs.append(synthgen.generate_eeg(p, s, 5.0))
            recs.append(synthgen.generate_gait(p, s, 5.0))
        bundles = []
        report_dirs = []
        for run in ("a", "b"):
            system, _ = pipeline.train_system(recs, cfg)
            bundle = tmp_path / f"{run}.dkey"
            pipeline.save_system(system, bundle)
            bundles.append(bundle)
            result = evaluation.evaluate_system(system, recs, [],
                                                eeg_len=200, gait_len=20)
            for modality in (Modality.EEG, Modality.GAIT):
                rep, scores, true = evaluation.holdout_report(system, recs, modality)
                if modality is Modality.EEG:
                    result.eeg_report, result.eeg_scores, result.eeg_true = \
                        rep, scores, true
                else:
                    result.gait_report, result.gait_scores, result.gait_true = \
                        rep, scores, true
            out = tmp_path / f"reports_{run}"
            evaluation.write_reports(result, out)
            report_dirs.append(out)
        assert bundles[0].read_bytes() == bundles[1].read_bytes()
        files_a = sorted(report_dirs[0].iterdir())
        assert [f.name for f in files_a] == \
            [f.name for f in sorted(report_dirs[1].iterdir())]
        for f in files_a:
            assert f.read_bytes() == (report_dirs[1] / f.name).read_bytes()
