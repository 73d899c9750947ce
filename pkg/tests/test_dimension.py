import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import ols_normal_equations
from topodim.dimension import (
    SampleSchedule,
    correlation_dimension,
    correlation_integral,
    fit_power_law,
    mle_id,
    ph_dim,
    twonn,
)
from topodim.errors import DegenerateFitError, InvalidArgumentError, NonEstimableError
from topodim.synthetic import synth


def test_identity_law():
    fit = fit_power_law([1, 10, 100], [1, 10, 100])
    assert fit.slope == pytest.approx(1.0, abs=1e-15)
    assert fit.r_squared == 1.0


def test_exact_square_root_law():
    xs = np.array([10.0, 100.0, 1000.0])
    fit = fit_power_law(xs, 3.0 * xs ** 0.5)
    assert abs(fit.slope - 0.5) <= 1e-12
    assert fit.r_squared == pytest.approx(1.0, abs=1e-15)


def test_noisy_law_matches_normal_equations():
    rng = np.random.default_rng(0)
    xs = np.geomspace(10, 1e4, 12)
    ys = xs ** 0.7 * np.exp(0.1 * rng.standard_normal(12))
    fit = fit_power_law(xs, ys)
    slope, intercept = ols_normal_equations(np.log(xs), np.log(ys))
    assert fit.slope == pytest.approx(slope, abs=1e-10)
    assert fit.intercept == pytest.approx(intercept, abs=1e-10)
    assert 0 <= fit.r_squared <= 1


def test_fit_errors():
    with pytest.raises(InvalidArgumentError):
        fit_power_law([1, 2], [1, 0])
    with pytest.raises(DegenerateFitError):
        fit_power_law([5, 5, 5], [1, 2, 3])
    with pytest.raises(InvalidArgumentError):
        fit_power_law([1], [1])


@given(st.floats(0.05, 20), st.floats(0.01, 0.99))
def test_dimension_slope_round_trip(d, frac):
    alpha = frac * d
    beta = (d - alpha) / d
    assert alpha / (1 - beta) == pytest.approx(d, rel=1e-9)


def test_schedule_validation():
    with pytest.raises(InvalidArgumentError):
        SampleSchedule((64, 128))
    with pytest.raises(InvalidArgumentError):
        SampleSchedule((64, 64, 128))
    sched = SampleSchedule.default(10_000)
    assert sched.sizes[0] == 64 and sched.sizes[-1] == 4096 and len(sched.sizes) == 8


def test_ph_dim_stored_dimension_consistent():
    est = ph_dim(synth("square", 512, seed=1), schedule=SampleSchedule((64, 128, 256, 512), 2, 0))
    assert est.dimension == est.alpha / (1 - est.beta)
    assert 0 <= est.r_squared <= 1
    assert len(est.points) == 4


def test_ph_dim_deterministic():
    X = synth("square", 600, seed=2)
    s = SampleSchedule((64, 128, 256, 512), 3, 5)
    assert ph_dim(X, schedule=s) == ph_dim(X, schedule=s)
    assert ph_dim(X, schedule=s, workers=3) == ph_dim(X, schedule=s)


def test_ph_dim_scale_invariant():
    X = synth("square", 600, seed=3)
    s = SampleSchedule((64, 128, 256, 512), 3, 5)
    a, b = ph_dim(X, schedule=s), ph_dim(X.scaled(3.0), schedule=s)
    assert a.dimension == b.dimension and a.beta == b.beta


def test_ph_dim_h1_route_matches_manual_descriptor():
    from topodim.dimension import _subsample_e
    from topodim.descriptors import DescriptorSpec, e_alpha
    from topodim.geometry import derive_seed, pairwise_distances, subsample_indices
    from topodim.persistence import PersistenceConfig, rips_persistence

    X = synth("square", 120, seed=4)
    seed = derive_seed(0, 1, 0)
    got = _subsample_e(X.points, 60, seed, 1, 1.0, PersistenceConfig())
    idx = subsample_indices(120, 60, derive_seed(0, 1, 0))
    dg = rips_persistence(pairwise_distances(X.points[idx]), 1)
    assert got == e_alpha(dg, DescriptorSpec(i=1, alpha=1.0)).value


def test_ph_dim_h1_small_samples_not_estimable():
    # loops appear faster than linearly at these sizes
    X = synth("square", 120, seed=4)
    with pytest.raises(NonEstimableError):
        ph_dim(X, i=1, schedule=SampleSchedule((30, 60, 120), 2, 0))


def test_ph_dim_errors():
    X = synth("square", 100, seed=0)
    with pytest.raises(InvalidArgumentError):
        ph_dim(X, alpha=0)
    with pytest.raises(InvalidArgumentError):
        ph_dim(X, schedule=SampleSchedule((64, 128, 256)))


def test_ph_dim_diverging_slope():
    # vertices of a regular simplex: every MST has n-1 edges of length sqrt(2),
    # so log E grows faster than log n
    X = np.eye(200)
    with pytest.raises(NonEstimableError):
        ph_dim(X, schedule=SampleSchedule((4, 8, 16), 1, 0))


def test_ph_dim_segment_negative_slope_warns():
    X = synth("segment", 4096, seed=0)
    est = ph_dim(X, schedule=SampleSchedule((512, 1024, 2048, 4096), 2, 0))
    if est.beta <= 0:
        assert est.warnings
    assert 0.85 <= est.dimension <= 1.15


@pytest.mark.slow
def test_ph_dim_square():
    est = ph_dim(synth("square", 4096, seed=0))
    assert 1.75 <= est.dimension <= 2.25
    assert 0.42 <= est.beta <= 0.58


def test_twonn_square_and_segment():
    assert 1.8 <= twonn(synth("square", 2000, seed=0)).value <= 2.2
    assert 0.9 <= twonn(synth("segment", 2000, seed=0)).value <= 1.1


def test_mle_square_and_segment():
    assert 1.8 <= mle_id(synth("square", 2000, seed=0), k=10).value <= 2.2
    assert 0.9 <= mle_id(synth("segment", 2000, seed=0), k=10).value <= 1.1


def test_corrdim_square():
    assert 1.7 <= correlation_dimension(synth("square", 2000, seed=0)).value <= 2.2


def test_correlation_integral_three_points():
    # pair distances 1, 2, 3
    d = np.array([1.0, 3.0, 2.0])
    C = correlation_integral(d, [0.5, 1.5, 2.5, 3.5], 3)
    assert C.tolist() == [0.0, 1 / 3, 2 / 3, 1.0]


def test_corrdim_explicit_radii_and_errors():
    X = synth("square", 200, seed=1)
    est = correlation_dimension(X, radii=[0.05, 0.1, 0.2])
    assert est.value > 0
    with pytest.raises(NonEstimableError):
        correlation_dimension(X, radii=[1e-9, 2e-9, 3e-9])
    with pytest.raises(InvalidArgumentError):
        correlation_dimension(X, radii=[0.2, 0.1, 0.3])
    with pytest.raises(InvalidArgumentError):
        correlation_dimension(synth("square", 9, seed=0))


def test_duplicates_dropped_then_refused():
    X = synth("square", 100, seed=0).points
    few = np.vstack([X, X[:3]])
    est = twonn(few)
    assert est.diagnostics["dropped"] == 6
    many = np.vstack([X, X[:20]])
    with pytest.raises(InvalidArgumentError):
        twonn(many)
    with pytest.raises(InvalidArgumentError):
        mle_id(many)


def test_mle_k_range():
    with pytest.raises(InvalidArgumentError):
        mle_id(synth("square", 20, seed=0), k=1)
