"""Acceptance checks with pinned tolerances.

Each check takes a seed and returns a :class:`CheckResult`; the CLI ``suite``
subcommand and the test suite share this registry.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import concentration, examples, liealg, rootdata, sampling
from .sampling import RandomStream

CHI_TOL = 1e-9
KILLING_TOL = 1e-8
VOLUME_REL_TOL = 1e-10
RATIO_BAND = (0.9, 1.1)
CPN_TRIALS = 100_000
CPN_EPS = 0.2
KS_ALPHA = 0.01
ZN_NORM_TOL = 1e-8
ZN_DELTA = 0.3
ZN_MASS_MAX = 0.01
HILBERT_SIGMAS = 3.0
HILBERT_PROB_MAX = 0.02
SOBOLEV_W12_TOL = 1e-6
SOBOLEV_L2_TOL = 1e-8
HAAR_RESIDUAL_TOL = 1e-10
HAAR_SAMPLES = 1000
ORBIT_TOL = 1e-10


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    runtime_s: float = 0.0


def check_chi(seed: int = 0) -> CheckResult:
    groups = ([("su", n) for n in range(2, 9)] + [("so", n) for n in range(3, 13)]
              + [("usp", n) for n in range(2, 6)])
    builders = {"su": liealg.su_basis, "so": liealg.so_basis, "usp": liealg.usp_basis}
    worst_spread, failures, chis = 0.0, [], {}
    for kind, n in groups:
        sc = liealg.structure_constants(builders[kind](n))
        try:
            rep = liealg.chi_coefficient(sc)
        except liealg.NonSimpleError:
            failures.append(f"{kind}({n}):nonsimple")
            continue
        worst_spread = max(worst_spread, rep.killing_diagonal_spread)
        expected = liealg.chi_closed_form(kind, n)
        chis[f"{kind}({n})"] = rep.chi
        if abs(rep.chi - expected) > CHI_TOL:
            failures.append(f"{kind}({n}):chi={rep.chi:.12g}!={expected}")
    ok = not failures and worst_spread <= KILLING_TOL
    return CheckResult(1, "chi_brute_force", ok,
                       {"killing_spread_max": worst_spread, "mismatches": failures, "chi": chis})


def check_volume(seed: int = 0) -> CheckResult:
    worst = 0.0
    for s in rootdata.SeriesTag:
        for n in range(s.min_n, 31):
            spec = rootdata.GroupSpec(s, n)
            a = rootdata.macdonald_log_volume(rootdata.build_root_system(s, n)).log_value
            b = rootdata.closed_form_log_volume(spec).log_value
            worst = max(worst, abs(a - b) / max(abs(b), 1.0))
    su2 = rootdata.macdonald_log_volume(rootdata.build_root_system("A", 2)).value
    oracle = 2 * math.pi ** 2 * math.sqrt(2) ** 3
    su2_rel = abs(su2 - oracle) / oracle
    ok = worst <= VOLUME_REL_TOL and su2_rel <= VOLUME_REL_TOL
    return CheckResult(2, "volume_two_path", ok, {"max_rel_diff": worst, "su2_rel_diff": su2_rel})


def check_ratio(seed: int = 0) -> CheckResult:
    def scaled(s, n):
        return rootdata.normalized_volume_ratio(s, n) * math.sqrt(n / (2 * math.pi * math.e))

    metrics, ok = {}, True
    for s in rootdata.SeriesTag:
        v100 = scaled(s, 100)
        d50, d200 = abs(scaled(s, 50) - 1), abs(scaled(s, 200) - 1)
        in_band = RATIO_BAND[0] <= v100 <= RATIO_BAND[1]
        metrics[s.value] = {"at_100": v100, "dev_50": d50, "dev_200": d200}
        ok = ok and in_band and d200 < d50
    return CheckResult(3, "ratio_asymptotics", ok, metrics)


def check_cpn(seed: int = 0) -> CheckResult:
    rng = RandomStream(seed, stream_id=4)
    metrics, ok = {}, True
    for n in (5, 20, 100):
        samples = {}
        for k, label in enumerate(("cpn", "cpn-haar")):
            fam = concentration.builtin_family(label, n)
            rep = concentration.estimate_concentration(fam, [CPN_EPS], CPN_TRIALS, rng.substream(10 * n + k))
            e = rep.entries[0]
            # distance > eps from the hyperplane at infinity is exactly xi < pi/2 - eps
            err = abs(e.mc_mass - concentration.cpn_band_mass(n, CPN_EPS))
            metrics[f"{label}_n{n}"] = {"mc": e.mc_mass, "halfwidth": e.mc_halfwidth, "abs_err": err}
            ok = ok and err <= e.mc_halfwidth
            samples[label] = fam.draw(CPN_TRIALS, rng.substream(10 * n + k + 5).generator())
        pval = float(sps.ks_2samp(samples["cpn"], samples["cpn-haar"]).pvalue)
        metrics[f"ks_n{n}"] = pval
        ok = ok and pval >= KS_ALPHA
    return CheckResult(4, "cpn_concentration_law", ok, metrics)


def check_zn(seed: int = 0) -> CheckResult:
    norm_err = max(abs(examples.zn_normalization(n) - 1.0) for n in range(1, 201))
    masses = {n: examples.zn_mass_outside(n, ZN_DELTA) for n in range(80, 201)}
    above = [n for n, m in masses.items() if m >= ZN_MASS_MAX]
    ok = norm_err <= ZN_NORM_TOL and not above
    return CheckResult(5, "circle_family_z", ok, {
        "max_norm_err": norm_err, "mass_at_80": masses[80], "mass_at_200": masses[200],
        "n_failing": len(above), "first_n_below": min((n for n, m in masses.items() if m < ZN_MASS_MAX),
                                                       default=None)})


def check_hilbert(seed: int = 0) -> CheckResult:
    rng = RandomStream(seed, stream_id=6)
    metrics, ok = {}, True
    for N, trials in ((10, 100_000), (100, 100_000), (10_000, 20_000)):
        m = examples.hilbert_coordinate_moment(N, [1.0], trials, rng.substream(N))
        z = abs(m.estimate - m.exact) / m.stderr
        metrics[f"N{N}"] = {"mean": m.estimate, "exact": m.exact, "stderr": m.stderr, "z": z}
        ok = ok and z <= HILBERT_SIGMAS
    N = 10_000
    x = np.zeros(N)
    x[0] = 1.0
    est = examples.induced_measure(examples.ActionSpec("SO", N, "hilbert", N), x,
                                   examples.TargetSet.cylinder([1.0], 0.1, outside=True),
                                   20_000, rng.substream(0))
    metrics["tail_prob"] = est.probability
    ok = ok and est.probability <= HILBERT_PROB_MAX
    return CheckResult(6, "hilbert_pushforward", ok, metrics)


def check_sobolev(seed: int = 0) -> CheckResult:
    metrics, ok = {}, True
    for n in (1, 10, 100):
        w12, l2 = examples.sobolev_norms(n, 20 * n)
        ew, el = abs(w12 - 1.0), abs(l2 - 1.0 / math.sqrt(n * n + 1))
        metrics[f"n{n}"] = {"w12_err": ew, "l2_err": el}
        ok = ok and ew <= SOBOLEV_W12_TOL and el <= SOBOLEV_L2_TOL
    return CheckResult(7, "sobolev_norms", ok, metrics)


def _ks(x, a, b) -> float:
    return float(sps.kstest(x, sps.beta(a, b).cdf).pvalue)


def check_haar(seed: int = 0) -> CheckResult:
    rng = RandomStream(seed, stream_id=8)
    metrics, ok = {}, True
    for n in (2, 10, 50):
        g = [rng.substream(4 * n + k).generator() for k in range(4)]
        O = sampling.haar_orthogonal(n, HAAR_SAMPLES, g[0])
        U = sampling.haar_unitary(n + 1, HAAR_SAMPLES, g[1])
        SU = sampling.haar_special_unitary(n + 1, HAAR_SAMPLES, g[2])
        S = sampling.haar_symplectic(n, HAAR_SAMPLES, g[3])
        J = sampling.symplectic_form(n)
        res = {
            "orthogonal": float(np.abs(np.swapaxes(O, 1, 2) @ O - np.eye(n)).max()),
            "unitary": float(np.abs(np.swapaxes(U, 1, 2).conj() @ U - np.eye(n + 1)).max()),
            "special_unitary": max(float(np.abs(np.swapaxes(SU, 1, 2).conj() @ SU - np.eye(n + 1)).max()),
                                   float(np.abs(np.linalg.det(SU) - 1).max())),
            "symplectic": max(float(np.abs(np.swapaxes(S, 1, 2).conj() @ S - np.eye(2 * n)).max()),
                              float(np.abs(np.swapaxes(S, 1, 2) @ J @ S - J).max())),
        }
        ks = {
            "real": _ks(O[:, 0, 0] ** 2, 0.5, (n - 1) / 2),
            "complex_U": _ks(np.abs(U[:, 0, 0]) ** 2, 1.0, n),
            "complex_SU": _ks(np.abs(SU[:, 0, 0]) ** 2, 1.0, n),
            "quaternionic": _ks(np.abs(S[:, 0, 0]) ** 2, 1.0, 2 * n - 1),
        }
        metrics[f"n{n}"] = {"residuals": res, "ks_pvalues": ks}
        ok = ok and max(res.values()) < HAAR_RESIDUAL_TOL and min(ks.values()) >= KS_ALPHA
    return CheckResult(8, "haar_hygiene", ok, metrics)


def check_orbit(seed: int = 0) -> CheckResult:
    bases = ([liealg.su_basis(n) for n in range(2, 7)] + [liealg.so_basis(n) for n in range(2, 9)]
             + [liealg.usp_basis(n) for n in range(1, 5)])
    worst, count = 0.0, 0
    for b in bases:
        for lab in liealg.two_plane_labels(b):
            worst = max(worst, abs(liealg.orbit_length_check(b, lab) - 2 * math.pi))
            count += 1
    return CheckResult(9, "orbit_normalization", worst <= ORBIT_TOL,
                       {"max_abs_err": worst, "generators": count})


CHECKS = {
    1: check_chi,
    2: check_volume,
    3: check_ratio,
    4: check_cpn,
    5: check_zn,
    6: check_hilbert,
    7: check_sobolev,
    8: check_haar,
    9: check_orbit,
}


def run_check(criterion: int, seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    res = CHECKS[criterion](seed)
    res.runtime_s = time.perf_counter() - t0
    return res


def run_suite(seed: int = 0, criteria=None) -> list[CheckResult]:
    return [run_check(c, seed) for c in (criteria or sorted(CHECKS))]
