import math

import numpy as np
import pytest

from gaussbell.estimates import (
    CSV_HEADER,
    EstimateError,
    bilinear_lhs,
    representation_check,
    rows_to_csv,
    sweep_problems,
    sweep_report,
    weighted_riesz_norm,
)
from gaussbell.gauss import (
    FlowGrid,
    HermiteFunction,
    OneForm,
    WeightSpec,
    gh_rule,
)

COARSE_GRID = FlowGrid(
    x_nodes=tuple(np.arange(-4.0, 4.0 + 1e-9, 0.5)),
    t_nodes=tuple(np.logspace(-2, math.log10(8.0), 10)),
    quad_order=256,
)


# ---------------------------------------------------------------------------
# bilinear embedding
# ---------------------------------------------------------------------------

def test_bilinear_unweighted_example():
    """f = hhat_1, g = hhat_0 dx: closed forms give
    |grad P_t f| = e^{-t} sqrt(1+x^2), |grad P_t g| = e^{-t}, so
    lhs = (1/4) E[sqrt(1+X^2)]."""
    res = bilinear_lhs(HermiteFunction.basis(1), OneForm.basis(0),
                       WeightSpec.constant(1.0), COARSE_GRID)
    xs, ws = gh_rule(200)
    oracle = 0.25 * float(ws @ np.sqrt(1 + xs**2))
    assert res.lhs == pytest.approx(oracle, abs=1e-8)
    assert 0.25 < res.lhs < 0.3536
    assert res.ratio < 1.0 / 50.0
    assert res.tail_estimate < 1e-8
    assert res.lhs <= res.bound + 1e-6


def test_bilinear_zero_function():
    res = bilinear_lhs(HermiteFunction((0.0, 0.0)), OneForm.basis(0),
                       WeightSpec.constant(1.0), COARSE_GRID)
    assert res.lhs == 0.0


def test_bilinear_rejects_constant_part():
    with pytest.raises(EstimateError):
        bilinear_lhs(HermiteFunction((1.0, 1.0)), OneForm.basis(0),
                     WeightSpec.constant(1.0), COARSE_GRID)


def test_bilinear_weighted_within_bound():
    res = bilinear_lhs(HermiteFunction.basis(2), OneForm.basis(1),
                       WeightSpec.exp_linear(0.5), COARSE_GRID)
    assert res.ratio <= 1.0


def test_bilinear_scaling_invariance():
    """(f, g) -> (lam f, lam^{-1} g) leaves lhs/(|f||g|) unchanged."""
    f = HermiteFunction((0.0, 1.0, 0.0, 1.0))
    g = OneForm.basis(2)
    w = WeightSpec.exp_linear(0.5)
    base = bilinear_lhs(f, g, w, COARSE_GRID)
    lam = 3.7
    scaled = bilinear_lhs(f.scaled(lam), g.scaled(1 / lam), w, COARSE_GRID)
    assert scaled.lhs == pytest.approx(base.lhs, rel=1e-12)
    assert scaled.ratio == pytest.approx(base.ratio, rel=1e-10)


def test_bilinear_weight_inversion_symmetry():
    """lhs is weight-free and q2 is inversion symmetric; with matching
    f and g profiles the two dual norms swap under w -> w^{-1}."""
    f = HermiteFunction.basis(1)
    g = OneForm.basis(1)
    w = WeightSpec.exp_linear(1.0)
    a = bilinear_lhs(f, g, w, COARSE_GRID)
    b = bilinear_lhs(f, g, w.inverse(), COARSE_GRID)
    assert a.lhs == pytest.approx(b.lhs, rel=1e-13)
    assert a.q2_lower == pytest.approx(b.q2_lower, rel=1e-10)
    assert a.f_norm == pytest.approx(b.g_norm, rel=1e-12)
    assert a.g_norm == pytest.approx(b.f_norm, rel=1e-12)
    assert a.bound == pytest.approx(b.bound, rel=1e-10)


# ---------------------------------------------------------------------------
# weighted Riesz norm
# ---------------------------------------------------------------------------

def test_riesz_norm_constant_is_isometry():
    res = weighted_riesz_norm(WeightSpec.constant(1.0), 32, grid=COARSE_GRID)
    assert res.weighted_norm == pytest.approx(1.0, abs=1e-10)
    assert res.bound_ratio <= 1.0


def test_riesz_norm_exp_zero_degenerates_to_constant():
    a = weighted_riesz_norm(WeightSpec.constant(1.0), 16, grid=COARSE_GRID)
    b = weighted_riesz_norm(WeightSpec.exp_linear(0.0), 16, grid=COARSE_GRID)
    assert b.weighted_norm == pytest.approx(a.weighted_norm, abs=1e-12)


def test_riesz_norm_exp_within_80q2_bound():
    res = weighted_riesz_norm(WeightSpec.exp_linear(1.0), 32,
                              grid=COARSE_GRID)
    assert res.weighted_norm <= 80.0 * res.q2 + 1e-6
    assert res.bound_ratio <= 1.0


def test_riesz_norm_monotone_in_subspace():
    """Enlarging the subspace can only increase the restricted norm."""
    w = WeightSpec.exp_linear(1.0)
    small = weighted_riesz_norm(w, 8, grid=COARSE_GRID, q2_value=1.0)
    big = weighted_riesz_norm(w, 24, grid=COARSE_GRID, q2_value=1.0)
    assert big.weighted_norm >= small.weighted_norm - 1e-12


def test_riesz_norm_rejects_tiny_subspace():
    with pytest.raises(EstimateError):
        weighted_riesz_norm(WeightSpec.constant(1.0), 1, grid=COARSE_GRID)


# ---------------------------------------------------------------------------
# representation identity
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 4, 9])
def test_representation_gap(n):
    res = representation_check(n)
    assert abs(res["lhs"]) == pytest.approx(1.0, abs=1e-13)
    assert res["abs_gap"] <= 1e-8
    # the model sign convention makes the flow side negative
    assert res["rhs"] < 0


def test_representation_tail_certificate():
    res = representation_check(9, t_max=20.0)
    assert res["tail_bound"] < 1e-15


def test_representation_rejects_n_zero():
    with pytest.raises(EstimateError):
        representation_check(0)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def test_sweep_exp_family():
    params = [0.0, 0.5, 1.0, 1.5, 2.0]
    rows = sweep_report("exp", params, n_dim=8, grid=COARSE_GRID,
                        ladder=(2, 4, 8))
    assert len(rows) == 15
    assert not sweep_problems(rows)
    q2_by_param = {r["param"]: r["q2_lower"] for r in rows}
    vals = [q2_by_param[p] for p in params]
    assert vals[0] == pytest.approx(1.0, abs=1e-9)
    assert all(a < b for a, b in zip(vals, vals[1:]))   # strictly increasing
    norm_by_param = {r["param"]: r["weighted_norm"] for r in rows}
    assert norm_by_param[0.0] == pytest.approx(1.0, abs=1e-10)
    csv = rows_to_csv(rows)
    assert csv.splitlines()[0] == CSV_HEADER
    assert len(csv.splitlines()) == 16


def test_sweep_rejects_unsorted_params():
    with pytest.raises(EstimateError):
        sweep_report("exp", [1.0, 0.0], n_dim=4, grid=COARSE_GRID,
                     ladder=(2,))


def test_sweep_unknown_family():
    with pytest.raises(EstimateError):
        sweep_report("gauss", [1.0], n_dim=4, grid=COARSE_GRID, ladder=(2,))
