"""Cross-oracle self-check harness behind ``hafmoments verify``.

Every check pairs two independent routes to the same quantity. Output is a
deterministic text report (no timings), so runs can be diffed byte for byte.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .anticoncentration import m2_exact, m2_k1, m2_limit
from .combinatorics import double_factorial, enumerate_matchings, num_matchings
from .gbs import GbsConfig, convolution_lhs, convolution_rhs, sector_sum_deviation
from .hafnian import hafnian
from .moments_exact import (
    enumerate_second_moment,
    first_moment_closed,
    first_moment_poly,
    first_moment_product_coeffs,
    second_moment_coeffs,
    second_moment_eval,
    second_moment_graph_count,
)
from .moments_mc import estimate_moment

LEVELS = ("quick", "full")
MC_SIGMAS = 5.0
SECTOR_TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


@dataclass(frozen=True)
class Settings:
    matching_n: int
    thm1_n: int
    thm2_n: int
    mc_t1_samples: int
    mc_t1_cases: tuple[tuple[int, int], ...]
    mc_t2_samples: int
    mc_t2_cases: tuple[tuple[int, int], ...]
    sector_modes: tuple[int, ...]
    sector_trials: int
    conv_n: int
    conv_k: int


SETTINGS = {
    "quick": Settings(
        matching_n=4,
        thm1_n=3,
        thm2_n=2,
        mc_t1_samples=20_000,
        mc_t1_cases=((1, 1), (2, 1), (1, 2), (2, 2)),
        mc_t2_samples=100_000,
        mc_t2_cases=((2, 1),),
        sector_modes=(4,),
        sector_trials=3,
        conv_n=3,
        conv_k=4,
    ),
    "full": Settings(
        matching_n=6,
        thm1_n=6,
        thm2_n=3,
        mc_t1_samples=100_000,
        mc_t1_cases=tuple((k, n) for k in (1, 2, 4) for n in (1, 2, 3)),
        mc_t2_samples=1_000_000,
        mc_t2_cases=((1, 1), (2, 1), (1, 2), (2, 2)),
        sector_modes=(4, 5, 6),
        sector_trials=10,
        conv_n=6,
        conv_k=8,
    ),
}


def _check_double_factorial(s: Settings, jobs: int) -> CheckResult:
    bad = [n for n in range(1, 21) if double_factorial(2 * n) * double_factorial(2 * n - 1) != math.factorial(2 * n)]
    return CheckResult("double-factorial", not bad, f"(2n)!!(2n-1)!! = (2n)! for n=1..20; failures {bad}")


def _check_matchings(s: Settings, jobs: int) -> CheckResult:
    counts = []
    ok = True
    for n in range(1, s.matching_n + 1):
        ms = list(enumerate_matchings(n))
        counts.append(len(ms))
        ok &= len(ms) == len(set(ms)) == num_matchings(n)
    return CheckResult("matchings", ok, f"distinct matchings n=1..{s.matching_n}: {counts}")


def _check_thm1(s: Settings, jobs: int) -> CheckResult:
    bad = [n for n in range(1, s.thm1_n + 1) if first_moment_poly(n).coeffs != first_moment_product_coeffs(n)]
    return CheckResult("thm1", not bad, f"enumerated first-moment polynomial = prod(k+2j-2) for n=1..{s.thm1_n}; failures {bad}")


def _check_m1_modes(s: Settings, jobs: int) -> CheckResult:
    bad = []
    for n in range(1, s.thm1_n + 1):
        poly = first_moment_poly(n)
        for k in range(1, 11):
            if double_factorial(2 * n - 1) * poly(k) != first_moment_closed(k, n):
                bad.append((k, n))
    return CheckResult("m1-closed", not bad, f"closed form = enumeration for k=1..10, n=1..{s.thm1_n}; failures {bad}")


def _second_moment_reports(s: Settings, jobs: int):
    return {n: enumerate_second_moment(n, jobs=jobs) for n in range(1, s.thm2_n + 1)}


def _check_thm2(s: Settings, jobs: int) -> CheckResult:
    details, ok = [], True
    for n in range(1, s.thm2_n + 1):
        poly = second_moment_coeffs(n, jobs=jobs)
        total = poly.total()
        expected = 4**n * double_factorial(2 * n - 1) ** 3
        ok &= total == expected == second_moment_graph_count(n) and poly.degree == 2 * n
        details.append(f"n={n} sum c_i={total} (expect {expected})")
    return CheckResult("thm2-count", ok, "; ".join(details))


def _check_lemma1_i(s: Settings, jobs: int) -> CheckResult:
    details, ok = [], True
    for n in range(1, s.thm2_n + 1):
        poly = second_moment_coeffs(n, jobs=jobs)
        lhs = second_moment_eval(1, n, poly)
        rhs = double_factorial(2 * n - 1) ** 4 * 4**n
        ok &= lhs == rhs
        details.append(f"n={n} M2(1,n)={lhs} (expect {rhs})")
    return CheckResult("lemma1-i", ok, "; ".join(details))


def _check_lemma1_ii(s: Settings, jobs: int) -> CheckResult:
    details, ok = [], True
    for n in range(1, s.thm2_n + 1):
        lead = second_moment_coeffs(n, jobs=jobs).coefficient(2 * n)
        f2 = first_moment_poly(n)(2)
        ok &= lead == double_factorial(2 * n) == f2
        details.append(f"n={n} c_2n={lead} (2n)!!={double_factorial(2 * n)} f(2,n)={f2}")
    return CheckResult("lemma1-ii", ok, "; ".join(details))


def _check_parity(s: Settings, jobs: int) -> CheckResult:
    odd = {n: rep.odd_components for n, rep in _second_moment_reports(s, jobs).items()}
    return CheckResult("parity", not any(odd.values()), f"odd-sized components per n: {odd}")


def _check_m2_endpoints(s: Settings, jobs: int) -> CheckResult:
    details, ok = [], True
    for n in range(1, s.thm2_n + 1):
        at1 = m2_exact(1, n, jobs=jobs)
        gap = abs(m2_exact(10**6, n, jobs=jobs) - m2_limit(n))
        ok &= at1 == m2_k1(n) and gap < Fraction(1, 10**4)
        details.append(f"n={n} m2(1,n)={at1} |m2(1e6,n)-limit|={float(gap):.3e}")
    rel = float(m2_limit(50)) * math.sqrt(math.pi * 50)
    ok &= abs(rel - 1) < 0.01
    details.append(f"limit(50)*sqrt(50 pi)={rel:.6f}")
    return CheckResult("m2-endpoints", ok, "; ".join(details))


def _mc_check(name, t, samples, cases, jobs, exact: Callable[[int, int], int]) -> CheckResult:
    details, ok = [], True
    for k, n in cases:
        est = estimate_moment(t, k, n, samples, seed=1000 * t + 10 * k + n, jobs=jobs)
        target = exact(k, n)
        z = (est.mean - target) / est.stderr
        ok &= abs(z) <= MC_SIGMAS
        details.append(f"(k={k},n={n}) {est.mean!r}+-{est.stderr!r} vs {target} z={z:+.3f}")
    return CheckResult(name, ok, "; ".join(details))


def _check_mc_first(s: Settings, jobs: int) -> CheckResult:
    return _mc_check("mc-first-moment", 1, s.mc_t1_samples, s.mc_t1_cases, jobs, first_moment_closed)


def _check_mc_second(s: Settings, jobs: int) -> CheckResult:
    def exact(k, n):
        return second_moment_eval(k, n, second_moment_coeffs(n, jobs=jobs))

    return _mc_check("mc-second-moment", 2, s.mc_t2_samples, s.mc_t2_cases, jobs, exact)


def _check_sector_sum(s: Settings, jobs: int) -> CheckResult:
    worst = 0.0
    cells = 0
    for m in s.sector_modes:
        for k in range(1, m + 1):
            for n in (1, 2):
                dev = sector_sum_deviation(GbsConfig(m, k, 0.4), n, s.sector_trials, seed=97 * m + k)
                worst = max(worst, max(dev))
                cells += 1
    return CheckResult("sector-sum", worst < SECTOR_TOL, f"max |sum P_U - P(2n)| = {worst:.3e} over {cells} (m,k,n) cells")


def _check_convolution(s: Settings, jobs: int) -> CheckResult:
    bad = [
        (n, k)
        for n in range(0, s.conv_n + 1)
        for k in range(1, s.conv_k + 1)
        if convolution_lhs(n, k) != convolution_rhs(n, k)
    ]
    return CheckResult("convolution", not bad, f"brute force = 4^n binom(n-1+k/2,n) for n<={s.conv_n}, k<={s.conv_k}; failures {bad}")


def _check_hafnian(s: Settings, jobs: int) -> CheckResult:
    rng = np.random.default_rng(2024)
    worst = 0.0
    for dim in (2, 4, 6, 8):
        B = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        A = B + B.T
        perm = rng.permutation(dim)
        ref = hafnian(A)
        worst = max(worst, abs(hafnian(A[np.ix_(perm, perm)]) - ref) / abs(ref))
        worst = max(worst, abs(hafnian(1.5 * A) - 1.5 ** (dim // 2) * ref) / abs(ref))
    return CheckResult("hafnian", worst < 1e-10, f"max relative deviation under permutation/scaling {worst:.2e}")


CHECKS: tuple[Callable[[Settings, int], CheckResult], ...] = (
    _check_double_factorial,
    _check_matchings,
    _check_hafnian,
    _check_thm1,
    _check_m1_modes,
    _check_thm2,
    _check_lemma1_i,
    _check_lemma1_ii,
    _check_parity,
    _check_m2_endpoints,
    _check_convolution,
    _check_sector_sum,
    _check_mc_first,
    _check_mc_second,
)


def run_checks(level: str = "quick", jobs: int = 1) -> list[CheckResult]:
    if level not in SETTINGS:
        raise ValueError(f"level must be one of {LEVELS}")
    s = SETTINGS[level]
    results = []
    for check in CHECKS:
        try:
            results.append(check(s, jobs))
        except Exception as exc:  # a crashing check is a failed check
            name = check.__name__.removeprefix("_check_").replace("_", "-")
            results.append(CheckResult(name, False, f"raised {type(exc).__name__}: {exc}"))
    return results


def render(results: list[CheckResult], level: str) -> str:
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"verify --level {level}: {passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
