"""Acceptance suite: one test per release criterion.

Each test prints a single PASS line once its criterion holds (visible with
`pytest tests/test_acceptance.py -s`). Tolerances are pinned here and
nowhere else.
"""

import math
import time

import numpy as np
import pytest

from regosense.campaign import create_session, replay
from regosense.config import load_field
from regosense.errors import DomainError
from regosense.intrusion import (
    FROZEN_MIX_TIP,
    LAB_CYLINDER,
    IntruderSpec,
    IntrusionProtocol,
    RegimeLabel,
    classify_regime,
    detect_ruptures,
    fit_K,
    strength_summary,
    synthesize,
)
from regosense.leg import (
    DEFAULT_LEG,
    GaitProtocol,
    LegState,
    estimate_tip_force,
    forward_kinematics,
    gait_from_name,
    jacobian,
    simulate_measurement,
)
from regosense.sampler import (
    DecisionRecord,
    Feedback,
    Hypothesis,
    HypothesisShape,
    Measurement,
    Outcome,
    explore_rewards,
    objective_weight,
    suggest,
    update_belief,
    verify_rewards,
)
from regosense.terrain import (
    QUARTZ_SAND,
    EnvironmentConfig,
    K_of_phi,
    MaterialClass,
    MaterialColumn,
)

ENV = EnvironmentConfig(rng_seed=0)
PROTO = IntrusionProtocol()
GRID = np.linspace(0.0, 1.0, 101)
INC = Hypothesis(HypothesisShape.MONOTONE_INCREASING)


def _sand(phi, K, friction_angle=0.5, rho_p=2650.0):
    return MaterialColumn(MaterialClass.COHESIONLESS, phi, rho_p, 3e-4,
                          friction_angle, K)


def _icy(phi_i):
    return MaterialColumn(MaterialClass.ICE_CEMENTED, 0.59, 2650.0, 3e-4, 0.5,
                          10.0, ice_fraction=phi_i)


def _mk(loc, strength=10.0):
    return Measurement(location=loc, strength=strength, curve_id=f"c{loc}",
                       gait="crawl")


def test_archimedes_round_trip():
    """Noiseless K recovery to 1e-6 relative; 2% noise to 5% for >= 95/100;
    the whole sweep in under 10 s."""
    rng = np.random.default_rng(1234)
    t0 = time.monotonic()
    worst = 0.0
    noisy_ok = 0
    for i in range(100):
        K = rng.uniform(2.0, 30.0)
        col = _sand(phi=rng.uniform(0.50, 0.70), K=K,
                    friction_angle=rng.uniform(0.2, 0.9),
                    rho_p=rng.uniform(1000.0, 3000.0))
        intr = IntruderSpec(radius=rng.uniform(0.005, 0.03))
        clean = synthesize(col, intr, PROTO, ENV, noise_sigma=0.0)
        worst = max(worst, abs(fit_K(clean, intr, col, ENV) - K) / K)
        noisy = synthesize(col, intr, PROTO, ENV,
                           rng=np.random.default_rng(50_000 + i),
                           noise_sigma=0.02)
        noisy_ok += abs(fit_K(noisy, intr, col, ENV) - K) / K <= 0.05
    elapsed = time.monotonic() - t0
    assert worst <= 1e-6
    assert noisy_ok >= 95
    assert elapsed < 10.0
    print(f"\nACCEPTANCE archimedes-round-trip: PASS "
          f"(worst {worst:.2e}, noisy {noisy_ok}/100, {elapsed:.2f}s)")


def test_k_phi_ordering():
    """K(phi) anchors give strictly increasing fitted K and pointwise-ordered
    post-transient forces, exactly, noiseless."""
    phis = (QUARTZ_SAND.phi_min,
            0.5 * (QUARTZ_SAND.phi_min + QUARTZ_SAND.phi_max),
            QUARTZ_SAND.phi_max)
    cols = [_sand(phi=p, K=K_of_phi(p, QUARTZ_SAND)) for p in phis]
    curves = [synthesize(c, LAB_CYLINDER, PROTO, ENV, noise_sigma=0.0)
              for c in cols]
    fitted = [fit_K(cv, LAB_CYLINDER, c, ENV) for cv, c in zip(curves, cols)]
    assert fitted[0] < fitted[1] < fitted[2]
    h_cone = LAB_CYLINDER.radius * math.tan(0.5)
    post = curves[0].depths > h_cone
    assert np.all(curves[0].forces[post] < curves[1].forces[post])
    assert np.all(curves[1].forces[post] < curves[2].forces[post])
    print(f"\nACCEPTANCE k-phi-ordering: PASS "
          f"(K = {fitted[0]:.2f} < {fitted[1]:.2f} < {fitted[2]:.2f})")


ICE_LEVELS = (0.01, 0.02, 0.05, 0.10, 0.15)


def test_ice_sweep():
    """Terminal force strictly increasing and rupture count non-decreasing
    over the ice sweep, noiseless and in >= 95% of noisy seed batches."""
    terms, counts = [], []
    for phi_i in ICE_LEVELS:
        c = synthesize(_icy(phi_i), FROZEN_MIX_TIP, PROTO, ENV, noise_sigma=0.0)
        terms.append(float(np.mean(c.forces[-5:])))
        counts.append(len(detect_ruptures(c, min_drop=0.005)))
    assert all(a < b for a, b in zip(terms, terms[1:]))
    assert all(a <= b for a, b in zip(counts, counts[1:]))

    batches = 40
    good = 0
    for batch in range(batches):
        t, n = [], []
        for j, phi_i in enumerate(ICE_LEVELS):
            rng = np.random.default_rng(10_000 + batch * 10 + j)
            c = synthesize(_icy(phi_i), FROZEN_MIX_TIP, PROTO, ENV, rng=rng,
                           noise_sigma=0.02)
            t.append(float(np.mean(c.forces[-5:])))
            n.append(len(detect_ruptures(c, min_drop=0.05)))
        good += (all(a < b for a, b in zip(t, t[1:]))
                 and all(a <= b for a, b in zip(n, n[1:])))
    assert good >= 0.95 * batches
    print(f"\nACCEPTANCE ice-sweep: PASS "
          f"(noiseless counts {counts}, noisy batches {good}/{batches})")


def test_white_sands_fixture():
    """Fixture-calibrated reproduction of the reference transect profile:
    these assert that the shipped preset reproduces the published readings
    it was calibrated against (+/-20%), not an independent prediction."""
    field = load_field("white_sands_transect")
    rng = np.random.default_rng(7)

    # loose lee sand: never above 5 N down to 4 cm
    lee = synthesize(field.column_at(0.0), LAB_CYLINDER, PROTO, ENV,
                     rng=rng, noise_sigma=0.02)
    mask = lee.depths <= 0.04
    assert lee.forces[mask].max() < 5.0

    # light crust: reaches ~15 N near 2 cm (+/-20% both axes)
    light = synthesize(field.column_at(5.0), LAB_CYLINDER, PROTO, ENV,
                       rng=rng, noise_sigma=0.02)
    peak = float(light.forces.max())
    cross15 = float(light.depths[np.nonzero(light.forces >= 15.0)[0][0]])
    assert 15.0 * 0.8 <= peak <= 15.0 * 1.2
    assert 0.02 * 0.8 <= cross15 <= 0.02 * 1.2

    # strong interdune crust: reaches 30 N near 1 cm (+/-20%)
    strong = synthesize(field.column_at(33.0), LAB_CYLINDER, PROTO, ENV,
                        rng=rng, noise_sigma=0.02)
    s = strength_summary(strong)
    assert s.depth_at_30N is not None
    assert 0.01 * 0.8 <= s.depth_at_30N <= 0.01 * 1.2
    print(f"\nACCEPTANCE white-sands-fixture: PASS "
          f"(lee max {lee.forces[mask].max():.2f} N, light {peak:.1f} N @ "
          f"{cross15 * 100:.2f} cm, strong 30 N @ {s.depth_at_30N * 100:.2f} cm)")


def test_regime_classifier_confusion():
    """>= 95% diagonal over 4 classes x 50 seeds at 2% noise, scored against
    the generator's class."""
    labels = ("linear", "plateau", "brittle", "crust_then_linear")
    matrix = {t: {p: 0 for p in labels} for t in labels}
    seeds_per_class = 50
    for seed in range(seeds_per_class):
        rng = np.random.default_rng(777 + seed)
        base = dict(phi=rng.uniform(0.56, 0.64), rho_p=rng.uniform(2000, 3000),
                    grain_d=3e-4, friction_angle=rng.uniform(0.4, 0.7),
                    K=rng.uniform(6, 20))
        linear = MaterialColumn(MaterialClass.COHESIONLESS, **base)
        ramp_max = synthesize(linear, LAB_CYLINDER, PROTO, ENV,
                              noise_sigma=0.0).forces.max()
        cases = {
            "linear": linear,
            "plateau": MaterialColumn(
                MaterialClass.COHESIVE_POWDER,
                yield_force=rng.uniform(0.3, 0.55) * ramp_max, **base),
            "brittle": MaterialColumn(
                MaterialClass.ICE_CEMENTED,
                ice_fraction=rng.uniform(0.08, 0.15), **base),
            "crust_then_linear": MaterialColumn(
                MaterialClass.SALT_CRUSTED,
                crust_thickness=rng.uniform(0.012, 0.03),
                crust_strength=rng.uniform(8, 25),
                substrate=MaterialColumn(MaterialClass.COHESIONLESS, **base),
                **base),
        }
        for truth, col in cases.items():
            c = synthesize(col, LAB_CYLINDER, PROTO, ENV,
                           rng=np.random.default_rng(31_000 + seed),
                           noise_sigma=0.02)
            predicted, _ = classify_regime(c)
            matrix[truth][predicted.value] += 1
    total = 4 * seeds_per_class
    diagonal = sum(matrix[t][t] for t in labels)
    rate = diagonal / total
    assert rate >= 0.95, f"diagonal {rate:.3f}\n{matrix}"
    print(f"\nACCEPTANCE regime-classifier: PASS (diagonal {diagonal}/{total})")
    for t in labels:
        print(f"  {t:>18}: " + " ".join(f"{matrix[t][p]:3d}" for p in labels))


def test_force_estimation_chain():
    """Jacobian vs finite differences < 1e-6; transpose round trip < 1e-9;
    crawl beats trot in RMS error in >= 95% of 100-seed batches."""
    rng = np.random.default_rng(5)
    eps = 1e-6
    worst_fd = 0.0
    for _ in range(100):
        q1 = rng.uniform(-math.pi, math.pi)
        q2 = rng.uniform(-math.pi, math.pi)
        j = jacobian(DEFAULT_LEG, q1, q2)
        fd = np.empty((2, 2))
        for col, (d1, d2) in enumerate(((eps, 0.0), (0.0, eps))):
            p = forward_kinematics(DEFAULT_LEG, q1 + d1, q2 + d2)
            m = forward_kinematics(DEFAULT_LEG, q1 - d1, q2 - d2)
            fd[:, col] = [(p[0] - m[0]) / (2 * eps), (p[1] - m[1]) / (2 * eps)]
        worst_fd = max(worst_fd, float(np.abs(j - fd).max()))
    assert worst_fd < 1e-6

    worst_rt = 0.0
    for _ in range(100):
        q1, q2 = rng.uniform(-1, 1), rng.uniform(0.5, 2.5)
        f = rng.uniform(-30, 30, size=2)
        tau = jacobian(DEFAULT_LEG, q1, q2).T @ f
        est = estimate_tip_force(DEFAULT_LEG, LegState(q1, q2, tau[0], tau[1]))
        worst_rt = max(worst_rt, float(np.abs(np.array(est) - f).max()))
    assert worst_rt < 1e-9

    field = load_field("white_sands_transect")
    fproto = IntrusionProtocol(sample_rate=100.0)
    truth = synthesize(field.column_at(10.0), LAB_CYLINDER, fproto, ENV,
                       noise_sigma=0.0)
    batches, batch_wins = 20, 0
    for b in range(batches):
        rms = {"crawl": [], "trot": []}
        for s in range(100):
            for name in ("crawl", "trot"):
                g = np.random.default_rng(b * 1000 + s)
                _, est = simulate_measurement(field, 10.0, gait_from_name(name),
                                              0.05, LAB_CYLINDER, fproto, ENV,
                                              g, material_noise=0.0)
                rms[name].append(
                    float(np.sqrt(np.mean((est.forces - truth.forces) ** 2))))
        batch_wins += np.mean(rms["crawl"]) < np.mean(rms["trot"])
    assert batch_wins >= 0.95 * batches
    print(f"\nACCEPTANCE force-estimation-chain: PASS "
          f"(fd {worst_fd:.2e}, round-trip {worst_rt:.2e}, "
          f"ordering {batch_wins}/{batches} batches)")


def test_equal_interval_emergence():
    """Seven pure-exploration picks from endpoint measurements reproduce the
    brute-force bisection oracle on the 101-point grid."""
    measured = [0.0, 1.0]
    ms = [_mk(x) for x in measured]
    picks, oracle = [], []
    for _ in range(7):
        dist = np.min(np.abs(GRID[:, None] - np.array(measured)[None, :]), axis=1)
        open_mask = dist > 1e-12
        oracle.append(float(GRID[open_mask][np.argmax(dist[open_mask])]))
        top = suggest(ms, None, GRID, k=1, weight=1.0)[0]
        picks.append(top.location)
        measured.append(top.location)
        ms.append(_mk(top.location))
    assert picks == oracle
    assert picks[:3] == [0.5, 0.25, 0.75]
    print(f"\nACCEPTANCE equal-interval-emergence: PASS ({picks})")


def test_suggestion_oracle_1000_sessions():
    """Top-1 equals the exhaustive argmax of the combined reward in 1000
    randomized sessions, zero mismatches."""
    rng = np.random.default_rng(99)
    mismatches = 0
    for _ in range(1000):
        n_c = int(rng.integers(21, 202))
        cands = np.linspace(0.0, 1.0, n_c)
        n_m = int(rng.integers(2, 14))
        xs = np.sort(rng.choice(cands, size=n_m, replace=False))
        shape = rng.choice(list(HypothesisShape))
        if shape is HypothesisShape.UNIMODAL:
            hyp = Hypothesis(shape, peak=float(rng.uniform(0.1, 0.9)))
        elif shape is HypothesisShape.PIECEWISE_LINEAR:
            hyp = Hypothesis(shape, knots=((0.0, 0.2), (0.5, 0.9), (1.0, 0.1)))
        else:
            hyp = Hypothesis(shape)
        ms = [_mk(float(x), float(rng.uniform(0, 80))) for x in xs]
        top = suggest(ms, hyp, cands, k=1)[0]

        w = objective_weight(ms)
        r_e = explore_rewards(cands, ms)
        belief = update_belief(ms, cands)
        r_v = verify_rewards(belief, hyp, ms)
        combined = w * r_e + (1 - w) * r_v
        measured = {m.location for m in ms}
        best, best_x = -1.0, None
        for i, c in enumerate(cands):
            if any(abs(c - mx) < 1e-9 for mx in measured):
                continue
            if combined[i] > best:
                best, best_x = combined[i], float(c)
        mismatches += (top.location != best_x)
    assert mismatches == 0
    print("\nACCEPTANCE suggestion-oracle: PASS (1000 sessions, 0 mismatches)")


def test_verify_reward_affine_invariance():
    """Argmax of the verification reward is invariant to positive scaling
    and offsets of measured strengths, 200 random fixtures."""
    rng = np.random.default_rng(17)
    for _ in range(200):
        n_m = int(rng.integers(3, 10))
        xs = np.sort(rng.choice(GRID, size=n_m, replace=False))
        ys = rng.uniform(1.0, 50.0, size=n_m)
        scale = float(rng.uniform(0.1, 20.0))
        offset = float(rng.uniform(0.0, 100.0))
        ms_a = [_mk(float(x), float(y)) for x, y in zip(xs, ys)]
        ms_b = [_mk(float(x), float(scale * y + offset))
                for x, y in zip(xs, ys)]
        ra = verify_rewards(update_belief(ms_a, GRID), INC, ms_a)
        rb = verify_rewards(update_belief(ms_b, GRID), INC, ms_b)
        assert int(np.argmax(ra)) == int(np.argmax(rb))
    print("\nACCEPTANCE verify-affine-invariance: PASS (200 fixtures)")


def _random_full_session(seed: int):
    rng = np.random.default_rng(seed)
    session = create_session("white_sands_transect", INC, seed=seed,
                             candidate_count=101)
    n_plan = int(rng.integers(3, 6))
    locs = np.sort(rng.choice(np.linspace(0, 55, 45), size=n_plan,
                              replace=False))
    session.run_initial_plan([float(x) for x in locs], gait="crawl")
    for _ in range(5):
        rnd = session.issue_suggestions(k=3)
        pick = rnd.suggestions[int(rng.integers(0, len(rnd.suggestions)))]
        roll = rng.uniform()
        if roll < 0.5:
            outcome, kw = Outcome.ACCEPTED, {}
        elif roll < 0.75:
            taken = {m.location for m in session.sampler.measurements}
            open_c = [c for c in session.sampler.candidates
                      if not any(abs(c - t) < 1e-9 for t in taken)]
            alt = float(open_c[int(rng.integers(0, len(open_c)))])
            outcome, kw = Outcome.REJECTED_WITH_ALTERNATIVE, {"alternative": alt}
        else:
            outcome, kw = Outcome.REJECTED_NO_ALTERNATIVE, {}
        feedback, stated = Feedback.NONE, None
        froll = rng.uniform()
        if froll < 0.2:
            feedback = Feedback.OBJECTIVE_MISMATCH
            stated = "explore" if rng.uniform() < 0.5 else "verify"
        elif froll < 0.3:
            feedback = Feedback.LOCATION_MISMATCH
        session.decide(DecisionRecord(rnd.number, pick, outcome,
                                      feedback=feedback,
                                      stated_objective=stated, **kw))
    return session


def test_replay_determinism_100_sessions():
    """100 randomized full sessions replay byte-identically and every log
    prefix replays to a valid state."""
    for seed in range(100):
        session = _random_full_session(seed)
        rebuilt = replay(session.events)
        assert rebuilt.canonical_json() == session.canonical_json(), \
            f"replay mismatch at seed {seed}"
        for cut in range(1, len(session.events) + 1):
            prefix = replay(session.events[:cut])
            assert len(prefix.events) == cut
    print("\nACCEPTANCE replay-determinism: PASS "
          "(100 sessions byte-identical, all prefixes valid)")
