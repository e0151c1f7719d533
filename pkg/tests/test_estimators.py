import math
import os
import subprocess
import sys

import numpy as np
import pytest

from ersatz.embedding import EmbeddingSpec, increment_transform, takens_embed
from ersatz.errors import DegenerateEstimateError, DomainError
from ersatz.estimators import (
    EstimatorConfig,
    InfoEstimate,
    entropy_knn,
    ersatz_ami,
    ersatz_entropy,
    ersatz_entropy_rate,
    ersatz_entropy_rate_scan_k,
    kl_entropy_scan,
    ksg_mi_scan,
    mutual_information_ksg,
    normalized_entropy_rate,
    split_windows,
)
from ersatz.synthesis import NoiseSpec, synth_motion, synth_noise

H1 = 0.5 * math.log(2 * math.pi * math.e)
N = 10**5


@pytest.fixture(scope="module")
def fbm_paths():
    return [synth_motion(NoiseSpec(length=2**16, seed=s)) for s in range(5)]


def slope(x, y):
    return np.polyfit(np.log(x), y, 1)[0]


# ----------------------------------------------------------------- calibration
def test_entropy_uniform():
    x = np.random.default_rng(1).uniform(size=N)
    assert entropy_knn(x).value == pytest.approx(0.0, abs=0.01)


def test_entropy_gaussian_1d_and_2d():
    rng = np.random.default_rng(2)
    assert entropy_knn(rng.standard_normal(N)).value == pytest.approx(1.4189, abs=0.01)
    assert entropy_knn(rng.standard_normal((N, 2))).value == pytest.approx(2.8379, abs=0.02)


def test_ksg_correlated_and_independent():
    rng = np.random.default_rng(3)
    x, z = rng.standard_normal(N), rng.standard_normal(N)
    y = 0.9 * x + math.sqrt(1 - 0.81) * z
    assert mutual_information_ksg(x, y).value == pytest.approx(-0.5 * math.log(1 - 0.81), abs=0.02)
    assert mutual_information_ksg(x, z).value == pytest.approx(0.0, abs=0.01)


def test_ksg_exact_copy_is_degenerate():
    x = np.random.default_rng(4).standard_normal(1000)
    with pytest.raises(DegenerateEstimateError):
        mutual_information_ksg(x, x.copy())


def test_entropy_scan_matches_single_k():
    x = np.random.default_rng(5).standard_normal((3000, 2))
    scan = kl_entropy_scan(x, [3, 5, 9])
    for k, v in zip((3, 5, 9), scan):
        assert entropy_knn(x, EstimatorConfig(k=k)).value == pytest.approx(v, abs=1e-12)
    y = x[:, 0] + 0.3 * x[:, 1]
    scan = ksg_mi_scan(x[:, 0], y, [4, 7])
    assert mutual_information_ksg(x[:, 0], y, EstimatorConfig(k=7)).value == pytest.approx(scan[1], abs=1e-12)


# ----------------------------------------------------------------- degeneracy
def test_constant_series_is_degenerate():
    with pytest.raises(DegenerateEstimateError):
        entropy_knn(np.zeros(100))


def test_few_duplicates_are_jittered_deterministically():
    x = np.random.default_rng(6).standard_normal(2000)
    x[:5] = x[5]
    a = entropy_knn(x).value
    assert np.isfinite(a)
    assert entropy_knn(x).value == a
    assert entropy_knn(x, EstimatorConfig(jitter_seed=1)).value == pytest.approx(a, abs=1e-3)


def test_heavy_duplicates_are_separated_by_jitter():
    x = np.repeat(np.arange(50.0), 40)
    a = entropy_knn(x).value
    assert np.isfinite(a)
    assert entropy_knn(x).value == a


def test_k_must_be_below_n():
    with pytest.raises(DomainError):
        entropy_knn(np.arange(5.0), EstimatorConfig(k=5))
    with pytest.raises(DomainError):
        EstimatorConfig(k=0)
    with pytest.raises(DomainError):
        EstimatorConfig(metric="euclidean")


def test_info_estimate_row():
    est = InfoEstimate(1.5, "entropy", 2, 0, 4, 1024, 5, 9)
    assert list(est.row()) == ["quantity", "value_nats", "m", "n", "tau", "T", "k", "seed"]
    assert est.row()["value_nats"] == 1.5


# ----------------------------------------------------------------- ersatz laws
def test_ersatz_entropy_grows_with_window():
    Ts = 2 ** np.arange(10, 17)
    for m in (1, 2):
        vals = np.mean(
            [[ersatz_entropy(synth_motion(NoiseSpec(length=int(T), seed=s)), m).value for T in Ts] for s in range(5)],
            axis=0,
        )
        assert slope(Ts, vals) == pytest.approx(0.7, abs=0.05)


def test_ersatz_entropy_m2_grows_with_scale(fbm_paths):
    taus = 2 ** np.arange(7)
    vals = np.mean([[ersatz_entropy(p, 2, int(t)).value for t in taus] for p in fbm_paths], axis=0)
    assert slope(taus, vals) == pytest.approx(0.7, abs=0.05)


def test_ersatz_ami_grows_with_window():
    Ts = 2 ** np.arange(10, 17)
    vals = np.mean(
        [[ersatz_ami(synth_motion(NoiseSpec(length=int(T), seed=s))).value for T in Ts] for s in range(5)], axis=0
    )
    assert slope(Ts, vals) == pytest.approx(0.7, abs=0.05)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_ersatz_ami_decreases_with_scale(fbm_paths, m):
    taus = 2 ** np.arange(7)
    vals = np.mean([[ersatz_ami(p, m, 1, int(t)).value for t in taus] for p in fbm_paths[:3]], axis=0)
    assert slope(taus, vals) == pytest.approx(-0.7, abs=0.05)


def test_ersatz_ami_white_noise():
    w = synth_noise(NoiseSpec(hurst=0.5, length=2**14, seed=2))
    assert ersatz_ami(w).value == pytest.approx(0.0, abs=0.02)


def test_ersatz_rate_level_and_scale(fbm_paths):
    h = [ersatz_entropy_rate(p).value for p in fbm_paths]
    assert np.mean(h) == pytest.approx(1.419, abs=0.05)
    taus = 2 ** np.arange(7)
    vals = np.mean([[ersatz_entropy_rate(p, 1, int(t)).value for t in taus] for p in fbm_paths], axis=0)
    assert slope(taus, vals) == pytest.approx(0.7, abs=0.03)


def test_ersatz_rate_stationary_in_window():
    def mean_over_seeds(T, fn):
        return np.mean([fn(synth_motion(NoiseSpec(length=T, seed=s))) for s in range(5)])

    dh = mean_over_seeds(2**16, lambda p: ersatz_entropy_rate(p).value) - mean_over_seeds(
        2**10, lambda p: ersatz_entropy_rate(p).value
    )
    dH = mean_over_seeds(2**16, lambda p: ersatz_entropy(p).value) - mean_over_seeds(
        2**10, lambda p: ersatz_entropy(p).value
    )
    assert abs(dh) < 0.1
    assert dH > 2.5


def test_normalized_rate_fbm_flat(fbm_paths):
    vals = np.mean([[normalized_entropy_rate(p, 1, 2**j).value for j in range(7)] for p in fbm_paths], axis=0)
    assert np.max(np.abs(vals - vals[0])) <= 0.1


def test_normalized_rate_rank1_drifts_up():
    paths = [synth_motion(NoiseSpec(kind="lognormal_h1", length=2**16, seed=s)) for s in range(3)]
    vals = np.mean([[normalized_entropy_rate(p, 1, 2**j).value for j in range(7)] for p in paths], axis=0)
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] - vals[0] > 0.15


@pytest.mark.xfail(strict=True, reason="even-Hermitian increments change shape with tau at the default marginal")
def test_normalized_rate_even_hermitian_flat():
    paths = [synth_motion(NoiseSpec(kind="lognormal_h2", length=2**16, seed=s)) for s in range(3)]
    vals = np.mean([[normalized_entropy_rate(p, 1, 2**j).value for j in range(7)] for p in paths], axis=0)
    assert np.max(np.abs(vals - vals[0])) <= 0.1


def test_decimation_keeps_one_point_per_scale(fbm_paths):
    p = fbm_paths[0]
    x = p.samples
    a = ersatz_entropy(p, 2, 8).value
    b = entropy_knn(takens_embed(x, EmbeddingSpec(2, 8)).points[::8]).value
    assert a == pytest.approx(b, abs=1e-12)
    dense = ersatz_entropy(p, 2, 8, EstimatorConfig(decimate=False)).value
    assert dense == pytest.approx(entropy_knn(takens_embed(x, EmbeddingSpec(2, 8))).value, abs=1e-12)
    assert ersatz_entropy(p, 1, 1).value == ersatz_entropy(p, 1, 1, EstimatorConfig(decimate=False)).value


# ----------------------------------------------------------------- invariants
@pytest.mark.parametrize("m", [2, 3])
def test_entropy_invariant_under_increment_transform(m):
    before, after = [], []
    for s in range(5):
        pts = takens_embed(synth_motion(NoiseSpec(length=2**14, seed=s)), EmbeddingSpec(m, 1))
        before.append(entropy_knn(pts).value)
        after.append(entropy_knn(increment_transform(pts)).value)
    combined = math.hypot(np.std(before, ddof=1), np.std(after, ddof=1))
    assert abs(np.mean(before) - np.mean(after)) <= 2 * combined


def test_translation_invariance(fbm_paths):
    x = fbm_paths[0].samples[: 2**13]
    for fn in (
        lambda y: ersatz_entropy(y, 2, 2).value,
        lambda y: ersatz_ami(y, 1, 1, 2).value,
        lambda y: ersatz_entropy_rate(y, 2, 1).value,
    ):
        assert fn(x + 17.25) == pytest.approx(fn(x), abs=1e-9)


def test_scaling_covariance(fbm_paths):
    x = fbm_paths[0].samples[: 2**13]
    for m in (1, 3):
        d = ersatz_entropy(3.0 * x, m).value - ersatz_entropy(x, m).value
        assert d == pytest.approx(m * math.log(3.0), abs=1e-9)
    assert ersatz_ami(3.0 * x, 2).value == pytest.approx(ersatz_ami(x, 2).value, abs=1e-9)


@pytest.mark.parametrize("kind", ["fgn", "lognormal_h1", "lognormal_h2", "mrw"])
def test_ami_non_negative(kind):
    p = synth_motion(NoiseSpec(kind=kind, length=2**14, seed=1))
    for tau in (1, 16):
        assert ersatz_ami(p, 1, 1, tau).value >= -0.02
    w = synth_noise(NoiseSpec(kind=kind, hurst=0.5, length=2**14, seed=1))
    assert ersatz_ami(w).value >= -0.02


@pytest.mark.parametrize(
    "m",
    [
        1,
        2,
        pytest.param(
            3, marks=pytest.mark.xfail(strict=True, reason="4-D Kozachenko-Leonenko bias exceeds the spread")
        ),
    ],
)
def test_assemblies_agree(m):
    mi, diff = [], []
    for s in range(5):
        p = synth_motion(NoiseSpec(length=2**14, seed=s))
        mi.append(ersatz_entropy_rate(p, m).value)
        diff.append(ersatz_entropy_rate(p, m, assembly="diff").value)
    combined = math.hypot(np.std(mi, ddof=1), np.std(diff, ddof=1))
    assert abs(np.mean(mi) - np.mean(diff)) <= combined


def test_rate_is_entropy_minus_ami(fbm_paths):
    p = fbm_paths[1]
    h = ersatz_entropy_rate(p, 2, 4).value
    assert h == pytest.approx(ersatz_entropy(p, 1, 4).value - ersatz_ami(p, 2, 1, 4).value, abs=1e-12)


def test_rate_scan_k_matches(fbm_paths):
    p = fbm_paths[2]
    scan = ersatz_entropy_rate_scan_k(p, [4, 6])
    assert scan[6].value == pytest.approx(ersatz_entropy_rate(p, cfg=EstimatorConfig(k=6)).value, abs=1e-12)
    assert scan[4].k == 4


def test_unknown_assembly(fbm_paths):
    with pytest.raises(DomainError):
        ersatz_entropy_rate(fbm_paths[0], assembly="other")


# ----------------------------------------------------------------- windows
def test_split_windows_rebases():
    x = np.arange(1.0, 11.0)
    segs = split_windows(x, 4)
    assert len(segs) == 2
    np.testing.assert_array_equal(segs[0], [1, 2, 3, 4])
    np.testing.assert_array_equal(segs[1], [1, 2, 3, 4])
    assert len(split_windows(x)) == 1
    with pytest.raises(DomainError):
        split_windows(x, 1)


def test_window_average_and_pool():
    p = synth_motion(NoiseSpec(length=2**14, seed=8))
    segs = split_windows(p, 2**12)
    per = [ersatz_entropy_rate(s).value for s in segs]
    avg = ersatz_entropy_rate(p, window=2**12)
    assert avg.value == pytest.approx(np.mean(per), abs=1e-12)
    assert avg.T == 2**12
    pooled = ersatz_entropy_rate(p, window=2**12, pool=True).value
    assert pooled == pytest.approx(np.mean(per), abs=0.1)


def test_estimate_carries_provenance():
    p = synth_motion(NoiseSpec(length=2**12, seed=11))
    est = ersatz_ami(p, 2, 1, 4)
    assert (est.quantity, est.m, est.n, est.tau, est.T, est.k, est.seed) == ("ami", 2, 1, 4, 2**12, 5, 11)


# ----------------------------------------------------------------- backends
def test_numpy_fallback_gives_same_estimates():
    code = (
        "import numpy as np; from ersatz import _accel;"
        "from ersatz.estimators import entropy_knn, mutual_information_ksg;"
        "r = np.random.default_rng(0); x = r.standard_normal((1500, 2));"
        "print(_accel.backend(), repr(entropy_knn(x).value), repr(mutual_information_ksg(x[:, 0], x[:, 1]).value))"
    )
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, ERSATZ_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs.append(res.stdout.split())
    assert outs[1][0] == "numpy"
    assert float(outs[0][1]) == pytest.approx(float(outs[1][1]), abs=1e-12)
    assert float(outs[0][2]) == pytest.approx(float(outs[1][2]), abs=1e-12)
