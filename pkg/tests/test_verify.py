import numpy as np
import pytest

from gaussbell.bellman import BellmanPoint, DomainError, QContext, aux_raw
from gaussbell.report import VerificationReport
from gaussbell.verify import (
    SuiteConfig,
    fd_hessian,
    fd_hessian_batch,
    hessian_directions,
    in_domain_batch,
    mollify_eval,
    run_suite,
    sample_columns,
    sample_domain,
    sign_forward_diff_batch,
    verify_aux,
    verify_point,
    _rng,
)

Q1 = QContext(1.0)
Q2 = QContext(2.0)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_sample_domain_membership_and_count():
    pts = sample_domain(Q2, 1000, seed=5)
    assert len(pts) == 1000
    for p in pts:
        p.validate(Q2)              # raises on violation


def test_sample_domain_q1_pins_rs_exactly():
    # membership is exact, so the degenerate slab must be hit to the ulp
    for p in sample_domain(Q1, 500, seed=1):
        assert p.r * p.s == 1.0
        p.validate(Q1)


def test_sample_domain_deterministic():
    a = sample_domain(Q2, 64, seed=99)
    b = sample_domain(Q2, 64, seed=99)
    assert all(pa.as_array().tolist() == pb.as_array().tolist()
               for pa, pb in zip(a, b))
    c = sample_domain(Q2, 64, seed=100)
    assert any(pa.as_array().tolist() != pc.as_array().tolist()
               for pa, pc in zip(a, c))


def test_sample_domain_rejects_bad_count():
    with pytest.raises(DomainError):
        sample_domain(Q2, 0, seed=1)


def test_in_domain_batch_is_exact():
    x = np.array([[1.0, 1.0, 1.0, 1.0, 1.0, 1.0],       # boundary: in
                  [1.0, 1.0, 1.0 + 1e-12, 1.0, 1.0, 1.0]])  # just out
    ok = in_domain_batch(x, 2.0)
    assert ok.tolist() == [True, False]


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def test_fd_hessian_matches_analytic_b1():
    """Quadratic form of the first component in the pure-zeta direction.

    -d^2 B1 = (2 zeta^2 / r)|dzeta/zeta - dr/r|^2 + eta block, so the form
    in direction dzeta = 1 equals 2/r = 2 at this point.
    """
    from gaussbell.bellman import components_batch

    def b1_only(cols):
        return components_batch(cols, 2.0)[:, 0]

    p = np.array([1.0, 1.0, 1.0, 0.0, 1.0, 1.0])
    h = 1e-5
    ee = np.zeros(6)
    ee[2] = 2 * h
    form = -(b1_only((p + ee)[None, :]) - 2 * b1_only(p[None, :])
             + b1_only((p - ee)[None, :]))[0] / (4 * h * h)
    assert form == pytest.approx(2.0, abs=1e-6)


def test_fd_hessian_pure_z_direction_vanishes():
    # B_Q is affine in Z, so the (Z, Z) entry is zero up to noise
    p = BellmanPoint(2.0, 3.0, 0.5, (0.7,), 1.1, 1.4)
    hess = fd_hessian(p, Q2, 1e-4)
    assert abs(hess[0, 0]) <= 1e-6
    assert abs(hess[1, 1]) <= 1e-6


def test_fd_hessian_richardson_consistency():
    p = BellmanPoint(2.0, 3.0, 0.5, (0.7,), 1.1, 1.4)
    h1 = fd_hessian(p, Q2, 1e-3)
    h2 = fd_hessian(p, Q2, 5e-4)
    # second-order method: quarter the step error at half the step
    assert np.max(np.abs(h1 - h2)) <= 4 * np.max(np.abs(h2)) * 1e-5 + 1e-8


def test_fd_hessian_unfittable_on_degenerate_slab():
    # Q = 1 forces rs = 1 exactly; any r or s step leaves the domain
    p = BellmanPoint(1.0, 1.0, 0.1, (0.1,), 1.0, 1.0)
    with pytest.raises(DomainError):
        fd_hessian(p, Q1, 1e-4)


def test_fd_hessian_batch_symmetry():
    x = sample_columns(2.0, 1, 32, _rng(2))
    hess, used_h, fitted = fd_hessian_batch(x, 2.0, 1e-4)
    assert fitted.any()
    sym_gap = np.abs(hess[fitted] - np.transpose(hess[fitted], (0, 2, 1)))
    assert np.max(sym_gap) == 0.0
    assert np.all(used_h[fitted] <= 1e-4)


def test_hessian_directions_shape_and_norm():
    d = hessian_directions(6, 64, _rng(0))
    assert d.shape == (2 * 6 + 64, 6)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0, atol=1e-12)


def test_more_directions_never_help():
    """The direction minimum is monotone: a superset of directions can
    only lower the concavity margin (fails never turn into passes)."""
    from gaussbell.verify import hessian_margins
    x = sample_columns(2.0, 1, 128, _rng(9))
    hess, _, fitted = fd_hessian_batch(x, 2.0, 1e-4)
    d64 = hessian_directions(6, 64, _rng(123))
    d128 = hessian_directions(6, 128, _rng(123))   # same first 64 rows
    assert np.array_equal(d128[: d64.shape[0]], d64)
    m64, _ = hessian_margins(hess[fitted], d64, 2.0, 1)
    m128, _ = hessian_margins(hess[fitted], d128, 2.0, 1)
    assert np.all(m128 <= m64 + 1e-15)


def test_sign_forward_diff_skips_when_step_exits():
    # eta^2 = H s exactly: any forward step in nu leaves the domain
    x = np.array([[1.0, 1.0, 0.0, 1.0, 1.0, 1.0]])
    fd, fits = sign_forward_diff_batch(x, 2.0, 1e-4)
    assert not fits[0]


# ---------------------------------------------------------------------------
# point verdicts
# ---------------------------------------------------------------------------

def test_verify_point_size_example():
    cfg = SuiteConfig(q_list=(1.0,), samples_per_q=1, seed=0)
    v = verify_point(BellmanPoint(1, 1, 0, (0,), 1, 1), Q1, cfg)
    assert v.size_ok                      # value ~ 136.81 <= 160
    assert v.sign_ok
    # Q = 1: stencil never fits, recorded as a skip, not a failure
    assert v.hessian_ok is None
    assert "stencil" in " ".join(v.skip_reasons)


def test_verify_point_zero_point():
    cfg = SuiteConfig(q_list=(2.0,), samples_per_q=1, seed=0)
    v = verify_point(BellmanPoint(0, 0, 0, (0,), 1.2, 1.2), Q2, cfg)
    assert v.size_ok


def test_verify_point_excludes_near_pi():
    r, s, q = 1.2, 1.0, 2.0
    k = float(aux_raw("K", r, s, q))
    zeta = 1.0
    eta = zeta * s * q / k                  # exactly on Pi
    p = BellmanPoint(10.0, 10.0, zeta, (eta,), r, s)
    cfg = SuiteConfig(q_list=(q,), samples_per_q=1, seed=0)
    v = verify_point(p, QContext(q), cfg)
    assert v.excluded_near_pi
    assert v.hessian_ok is None


def test_verify_point_passes_generic_sample():
    cfg = SuiteConfig(q_list=(2.0,), samples_per_q=1, seed=0)
    for p in sample_domain(Q2, 25, seed=8):
        v = verify_point(p, Q2, cfg)
        assert v.size_ok
        assert v.sign_ok in (True, None)
        assert v.hessian_ok in (True, None)


# ---------------------------------------------------------------------------
# auxiliary certificates
# ---------------------------------------------------------------------------

def test_verify_aux_size_examples():
    v = verify_aux(1.0, 2.0, Q2, 1e-4)
    assert v["M"]["value"] == pytest.approx(14.0)          # <= 5 Q^2 s = 40
    assert v["M"]["size_ok"]
    v = verify_aux(1.0, 1.0, Q1, 1e-4)
    assert v["K"]["value"] == pytest.approx(0.75)          # <= Q = 1
    assert v["K"]["size_ok"]
    assert all(rec["hessian_ok"] for rec in v.values())


def test_verify_aux_hessian_matches_analytic_m():
    # d^2 M / ds^2 = -2r exactly, so the pure-ds form is 2r >= r
    r, s, q, h = 1.0, 1.0, 1.0, 1e-5
    hss = (aux_raw("M", r, s + 2 * h, q) - 2 * aux_raw("M", r, s, q)
           + aux_raw("M", r, s - 2 * h, q)) / (4 * h * h)
    assert -hss == pytest.approx(2.0, abs=1e-6)
    assert -hss >= r


def test_verify_aux_rejects_outside_slab():
    with pytest.raises(DomainError):
        verify_aux(3.0, 3.0, Q2, 1e-4)


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------

def test_mollify_small_eps_matches_pointwise():
    from gaussbell.bellman import eval_bq
    p = BellmanPoint(2.0, 2.0, 0.3, (0.4,), 1.2, 1.25)
    val = mollify_eval(p, Q2, eps=1e-8, mc=4000, seed=3)
    assert val == pytest.approx(eval_bq(p, Q2), abs=1e-5)


def test_mollify_deterministic_and_bounded():
    p = BellmanPoint(5.0, 5.0, 0.5, (0.5,), 1.2, 1.25)
    a = mollify_eval(p, Q2, eps=0.05, mc=20000, seed=11)
    b = mollify_eval(p, Q2, eps=0.05, mc=20000, seed=11)
    assert a == b
    assert 0.0 <= a <= 80.0 * 1.05 * (p.z + p.h)


def test_mollify_constant_region_matches_value():
    """Affine dependence on Z, H averages out under the symmetric bump."""
    from gaussbell.bellman import eval_bq
    p = BellmanPoint(50.0, 50.0, 0.0, (0.0,), 1.2, 1.25)
    val = mollify_eval(p, Q2, eps=0.05, mc=200000, seed=4)
    assert val == pytest.approx(eval_bq(p, Q2), rel=2e-3)


def test_mollify_converges_linearly():
    """|mollified - pointwise| shrinks at least linearly in eps on a
    smooth interior point (empirically quadratically: symmetric bump)."""
    from gaussbell.bellman import eval_bq
    p = BellmanPoint(3.0, 4.0, 0.5, (0.6,), 1.2, 1.25)
    b = eval_bq(p, Q2)
    gaps = [abs(mollify_eval(p, Q2, eps, 400000, seed=1) - b)
            for eps in (0.2, 0.1, 0.05)]
    assert gaps[0] > gaps[1] > gaps[2]
    for eps, gap in zip((0.2, 0.1, 0.05), gaps):
        assert gap <= 0.05 * eps * (1 + abs(b))
    # better than linear: quartering the step at least quarters the gap
    assert gaps[2] <= gaps[0] / 4.0


def test_mollify_rejects_ball_outside_domain():
    # rs = 1 exactly: any r, s wiggle exits the slab
    p = BellmanPoint(2.0, 2.0, 0.0, (0.0,), 1.0, 1.0)
    with pytest.raises(DomainError):
        mollify_eval(p, Q2, eps=0.01, mc=100, seed=0)
    # Z smaller than eps: ball leaves Z >= 0
    p2 = BellmanPoint(1e-4, 2.0, 0.0, (0.0,), 1.2, 1.25)
    with pytest.raises(DomainError):
        mollify_eval(p2, Q2, eps=0.01, mc=1000, seed=0)


# ---------------------------------------------------------------------------
# the suite
# ---------------------------------------------------------------------------

def test_suite_config_validation():
    with pytest.raises(DomainError):
        SuiteConfig(samples_per_q=0)
    with pytest.raises(DomainError):
        SuiteConfig(fd_step=0.0)
    with pytest.raises(DomainError):
        SuiteConfig(pi_exclusion=-1.0)
    with pytest.raises(DomainError):
        SuiteConfig(q_list=(0.5,))


def test_run_suite_counts_and_determinism():
    cfg = SuiteConfig(q_list=(1.0, 2.0), samples_per_q=200, seed=31,
                      aux_grid_n=10, mollify_eps=0.05, mc_samples=2000)
    rep1 = run_suite(cfg, "t")
    rep2 = run_suite(cfg, "t")
    d1 = rep1.to_dict()
    d2 = rep2.to_dict()
    d1.pop("timestamp")
    d2.pop("timestamp")
    assert d1 == d2
    by_name = {c.name: c for c in rep1.checks}
    assert by_name["size[Q=1]"].count == 200
    assert by_name["size[Q=2]"].count == 200
    assert rep1.total_failures == 0
    # report round-trips through JSON losslessly
    assert VerificationReport.loads(rep1.dumps()).to_dict() == rep1.to_dict()


def test_run_suite_hessian_skips_recorded_for_q1():
    cfg = SuiteConfig(q_list=(1.0,), samples_per_q=50, seed=2, aux_grid_n=5)
    rep = run_suite(cfg, "t")
    hess = next(c for c in rep.checks if c.name.startswith("hessian"))
    assert hess.skipped == 50
    assert hess.failures == 0
    reasons = next(m for m in rep.measurements
                   if m.name.startswith("hessian_skip_reasons"))
    assert reasons.location["stencil_unfit"] == 50


def test_run_suite_higher_eta_dimension():
    """The whole pipeline works with a 3-dimensional eta slot."""
    cfg = SuiteConfig(q_list=(2.0,), samples_per_q=300, seed=6, eta_dim=3,
                      aux_grid_n=8)
    rep = run_suite(cfg, "t")
    assert rep.total_failures == 0
    hess = next(c for c in rep.checks if c.name.startswith("hessian"))
    assert hess.count == 300
