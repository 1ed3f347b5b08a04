import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from lieconc import stats as lstats
from lieconc.sampling import (
    CpnAngles,
    RandomStream,
    angles_to_homogeneous,
    cpn_point_from_haar,
    cpn_zeta0_sq,
    fs_metric_components,
    haar_orthogonal,
    haar_special_unitary,
    haar_symplectic,
    haar_unitary,
    phi_from_uniform,
    read_sample_dump,
    sample_cpn_angles,
    sample_cpn_xi,
    sample_orthogonal,
    sample_special_unitary,
    sample_symplectic,
    sample_unitary,
    symplectic_form,
    uniform_sphere,
    write_sample_dump,
    xi_from_uniform,
)

ALPHA = 0.01


def gen(seed, sid=0):
    return RandomStream(seed, sid).generator()


def test_so1_is_trivial():
    assert np.array_equal(sample_orthogonal(1, RandomStream(3)).matrix, [[1.0]])


@pytest.mark.parametrize("n", [2, 10, 50])
def test_residuals(n):
    O = haar_orthogonal(n, 1000, gen(1))
    U = haar_unitary(n, 1000, gen(2))
    SU = haar_special_unitary(n, 1000, gen(3))
    S = haar_symplectic(n, 1000, gen(4))
    J = symplectic_form(n)
    eye = np.eye(n)
    assert np.abs(np.swapaxes(O, 1, 2) @ O - eye).max() < 1e-10
    assert np.abs(np.linalg.det(O) - 1).max() < 1e-10
    assert np.abs(np.swapaxes(U, 1, 2).conj() @ U - eye).max() < 1e-10
    assert np.abs(np.linalg.det(SU) - 1).max() < 1e-10
    assert np.abs(np.swapaxes(S, 1, 2).conj() @ S - np.eye(2 * n)).max() < 1e-10
    assert np.abs(np.swapaxes(S, 1, 2) @ J @ S - J).max() < 1e-10


def test_single_sample_wrappers():
    rng = RandomStream(5)
    for s in (sample_orthogonal(4, rng), sample_unitary(4, rng), sample_special_unitary(4, rng)):
        assert s.unitarity_residual() < 1e-12
    assert sample_special_unitary(4, rng).determinant_residual() < 1e-12
    s = sample_symplectic(3, rng)
    assert s.matrix.shape == (6, 6)
    assert s.symplectic_residual() < 1e-12


def test_orthogonal_first_entry_beta_and_mean():
    x = haar_orthogonal(10, 20_000, gen(7))[:, 0, 0] ** 2
    assert x.mean() == pytest.approx(0.1, abs=4 * x.std() / math.sqrt(len(x)))
    assert stats.kstest(x, stats.beta(0.5, 4.5).cdf).pvalue > ALPHA
    # brute-force comparison with normalized Gaussians
    y = uniform_sphere(10, 20_000, gen(8))[:, 0] ** 2
    assert stats.ks_2samp(x, y).pvalue > ALPHA


def test_u1_uniform_phase():
    z = haar_unitary(1, 20_000, gen(9))[:, 0, 0]
    assert np.allclose(np.abs(z), 1)
    assert stats.kstest(np.mod(np.angle(z), 2 * math.pi) / (2 * math.pi), "uniform").pvalue > ALPHA


def test_u5_mean_first_entry():
    x = np.abs(haar_unitary(5, 20_000, gen(10))[:, 0, 0]) ** 2
    assert x.mean() == pytest.approx(0.2, abs=4 * x.std() / math.sqrt(len(x)))
    assert stats.kstest(x, stats.beta(1, 4).cdf).pvalue > ALPHA


def _weyl_su2_cdf(t):
    # eigenangle density (2/pi) sin^2 on [0, pi]
    return (t - np.sin(t) * np.cos(t)) / math.pi


def test_su2_and_usp2_eigenangles_follow_weyl_density():
    for M in (haar_special_unitary(2, 20_000, gen(11)), haar_symplectic(1, 20_000, gen(12))):
        t = np.arccos(np.clip(np.trace(M, axis1=1, axis2=2).real / 2, -1, 1))
        assert stats.kstest(t, _weyl_su2_cdf).pvalue > ALPHA


def test_su3_trace_moments():
    # E|Tr U|^2 = 1 on SU(n) for n >= 2
    tr = np.trace(haar_special_unitary(3, 50_000, gen(13)), axis1=1, axis2=2)
    a2 = np.abs(tr) ** 2
    assert a2.mean() == pytest.approx(1.0, abs=4 * a2.std() / math.sqrt(len(a2)))


def test_left_invariance_smoke():
    g = haar_unitary(4, 1, gen(14))[0]
    U = haar_unitary(4, 5000, gen(15))
    V = haar_unitary(4, 5000, gen(16))
    a = np.abs((g @ U)[:, 0, 0]) ** 2
    b = np.abs(V[:, 0, 0]) ** 2
    assert stats.ks_2samp(a, b).pvalue > ALPHA


def test_quaternionic_first_entry():
    S = haar_symplectic(4, 10_000, gen(17))
    assert stats.kstest(np.abs(S[:, 0, 0]) ** 2, stats.beta(1, 7).cdf).pvalue > ALPHA


def test_phi_boundary_and_ranges():
    assert phi_from_uniform(1.0, 3) == pytest.approx(math.pi / 2)
    assert xi_from_uniform(0.0, 4) == 0.0
    a = sample_cpn_angles(6, RandomStream(1))
    assert len(a.phi) == 5 and len(a.theta) == 6
    with pytest.raises(ValueError):
        CpnAngles(2, 2.0, (0.1,), (0.1, 0.2))


def test_xi_band_probability_matches_quadrature():
    n, eps = 10, 0.3
    q, _ = integrate.quad(lambda x: 2 * n * math.cos(x) * math.sin(x) ** (2 * n - 1), 0, math.pi / 2 - eps,
                          epsabs=1e-13)
    assert q == pytest.approx(0.4010, abs=5e-5)
    xi = sample_cpn_xi(n, 100_000, gen(18))
    k = int(np.count_nonzero(xi <= math.pi / 2 - eps))
    lo, hi = lstats.clopper_pearson(k, len(xi))
    assert lo <= q <= hi
    assert np.all(xi < math.pi / 2 + 1e-15)


@pytest.mark.parametrize("a", [1, 2, 5])
def test_phi_inverse_cdf(a):
    x = phi_from_uniform(gen(19).random(20_000), a)
    cdf = lambda p: 1 - np.cos(p) ** (2 * a)  # noqa: E731
    assert stats.kstest(x, cdf).pvalue > ALPHA


def test_angles_to_homogeneous():
    a0 = CpnAngles(2, 0.0, (0.3,), (0.0, 1.0))
    assert np.allclose(angles_to_homogeneous(a0, [1, 0]), [1, 0, 0])
    a = CpnAngles(2, math.pi / 4, (0.3,), (0.0, 1.0))
    assert np.allclose(angles_to_homogeneous(a, [1, 0]), np.array([1, 1, 0]) / math.sqrt(2))
    edge = CpnAngles(2, math.pi / 2, (0.3,), (0.5, 1.0))
    z = angles_to_homogeneous(edge, [0.6, 0.8])
    assert abs(z[0]) < 1e-15
    assert np.allclose(z[1:], [0.6 * np.exp(0.5j), 0.8 * np.exp(1j)])
    near = CpnAngles(2, math.pi / 2 - 1e-9, (0.3,), (0.5, 1.0))
    assert abs(angles_to_homogeneous(near, [0.6, 0.8])[0]) < 1e-8


def test_cpn_point_from_haar_n1_uniform():
    rng = RandomStream(20)
    x = np.array([cpn_point_from_haar(1, rng.substream(k)) for k in range(2000)])
    assert stats.kstest(x, "uniform").pvalue > ALPHA


@pytest.mark.parametrize("n", [1, 4, 9])
def test_zeta0_mean(n):
    x = cpn_zeta0_sq(n, 20_000, gen(21), method="haar")
    assert x.mean() == pytest.approx(1 / (n + 1), abs=4 * x.std() / math.sqrt(len(x)))


@pytest.mark.parametrize("n", [5, 20])
def test_two_routes_agree(n):
    cos2 = np.cos(sample_cpn_xi(n, 100_000, gen(22))) ** 2
    haar = cpn_zeta0_sq(n, 100_000, gen(23), method="haar")
    assert stats.ks_2samp(cos2, haar).pvalue > ALPHA
    eps = 0.2
    k = int(np.count_nonzero(haar >= math.sin(eps) ** 2))
    lo, hi = lstats.clopper_pearson(k, len(haar))
    assert lo <= math.cos(eps) ** (2 * n) <= hi


def test_fs_metric_examples():
    assert np.allclose(fs_metric_components(np.zeros(3)), np.eye(3))
    assert fs_metric_components([1.0])[0, 0] == pytest.approx(0.25)


def _kahler_hessian(z, h=1e-4):
    """d^2 log(1 + |z|^2) / dz_i dzbar_j by Wirtinger central differences."""
    K = lambda w: math.log1p(float(np.vdot(w, w).real))  # noqa: E731
    n = len(z)
    g = np.zeros((n, n), dtype=complex)
    E = np.eye(n)
    for i in range(n):
        for j in range(n):
            def d2(a, b):
                return (K(z + h * a + h * b) - K(z + h * a - h * b) - K(z - h * a + h * b) + K(z - h * a - h * b)) / (4 * h * h)
            # d/dz d/dzbar = 1/4 (dx - i dy)(dx' + i dy')
            xx = d2(E[i], E[j])
            yy = d2(1j * E[i], 1j * E[j])
            xy = d2(E[i], 1j * E[j])
            yx = d2(1j * E[i], E[j])
            g[i, j] = 0.25 * (xx + yy + 1j * (xy - yx))
    return g


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False), min_size=1, max_size=3))
def test_fs_metric_hermitian_pd_and_matches_potential(zs):
    z = np.array(zs, dtype=complex)
    g = fs_metric_components(z)
    assert np.allclose(g, g.conj().T)
    assert np.linalg.eigvalsh(g).min() > 0
    assert np.allclose(g, _kahler_hessian(z), atol=1e-6)


def test_determinism_and_independence():
    a = haar_unitary(3, 10, RandomStream(42, 1).generator())
    b = haar_unitary(3, 10, RandomStream(42, 1).generator())
    c = haar_unitary(3, 10, RandomStream(42, 2).generator())
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)
    assert RandomStream(1).substream(3) == RandomStream(1, 0, (3,))


def test_sample_dump_roundtrip(tmp_path):
    data = gen(24).random((7, 3))
    p = write_sample_dump(tmp_path / "s.bin", data)
    raw = p.read_bytes()
    assert raw[:8] == b"LCSAMPLE"
    assert int.from_bytes(raw[8:12], "little") == 3
    assert int.from_bytes(raw[12:16], "little") == 7
    assert len(raw) == 16 + 7 * 3 * 8
    assert np.array_equal(read_sample_dump(p), data)


@pytest.mark.parametrize("k,n", [(0, 10), (3, 10), (10, 10), (17, 1000), (500, 1000)])
def test_clopper_pearson_matches_scipy(k, n):
    ref = stats.binomtest(k, n).proportion_ci(0.99, method="exact")
    lo, hi = lstats.clopper_pearson(k, n)
    assert lo == pytest.approx(ref.low, abs=1e-12)
    assert hi == pytest.approx(ref.high, abs=1e-12)


def test_chunked_draws_independent_of_workers():
    draw = lambda size, g: g.random(size)  # noqa: E731
    a = lstats.chunked_draws(draw, 50_001, RandomStream(3), chunk=7000, workers=1)
    b = lstats.chunked_draws(draw, 50_001, RandomStream(3), chunk=7000, workers=4)
    assert a.shape == (50_001,)
    assert np.array_equal(a, b)
