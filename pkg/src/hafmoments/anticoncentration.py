"""m2(k, n) = M1^2 / M2 and the reference curves around it.

At k = 1 the ratio is 4^-n; as k grows it tends to C(2n, n)/4^n, which in
turn behaves like 1/sqrt(pi n). Reports carry metrics only, no regime
verdicts.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .moments_exact import first_moment_closed, second_moment_coeffs, second_moment_eval, second_moment_k1
from .moments_mc import DEFAULT_BATCHES, batch_moment_means

MODES = ("exact", "monte-carlo")
CSV_HEADER = ("k", "n", "m2", "m2_stderr", "m2_k1", "m2_limit", "m2_asymptote", "mode")


def m2_k1(n: int) -> Fraction:
    return Fraction(1, 4**n)


def m2_limit(n: int) -> Fraction:
    """Large-k limit C(2n, n)/4^n = (2n-1)!!/(2n)!!."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return Fraction(math.comb(2 * n, n), 4**n)


def m2_asymptote(n: int) -> float:
    return 1.0 / math.sqrt(math.pi * n)


@dataclass(frozen=True)
class M2Report:
    k: int
    n: int
    mode: str
    m2: Fraction | float
    m2_stderr: float | None
    m2_k1: Fraction
    m2_limit: Fraction
    m2_asymptote: float

    def row(self) -> dict:
        """Flat record; exact quantities become exact decimal/rational strings."""
        return {
            "k": self.k,
            "n": self.n,
            "m2": format_exact(self.m2) if isinstance(self.m2, Fraction) else repr(float(self.m2)),
            "m2_stderr": None if self.m2_stderr is None else repr(float(self.m2_stderr)),
            "m2_k1": format_exact(self.m2_k1),
            "m2_limit": format_exact(self.m2_limit),
            "m2_asymptote": repr(self.m2_asymptote),
            "mode": self.mode,
        }


def format_exact(q: Fraction) -> str:
    """Terminating decimal when the denominator allows it, else "p/q".

    Both forms parse back losslessly with ``Fraction(text)``.
    """
    q = Fraction(q)
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    scaled = q * 10**places
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def m2_exact(k: int, n: int, *, jobs: int = 1, allow_long: bool = False) -> Fraction:
    m1 = first_moment_closed(k, n)
    m2nd = second_moment_eval(k, n, second_moment_coeffs(n, jobs=jobs, allow_long=allow_long))
    return Fraction(m1 * m1, m2nd)


def m2_k1_closed(n: int) -> Fraction:
    """m2(1, n) from the closed forms M1(1,n) = ((2n-1)!!)^2 and M2(1,n)."""
    m1 = first_moment_closed(1, n)
    return Fraction(m1 * m1, second_moment_k1(n))


def ratio_with_error(means: np.ndarray) -> tuple[float, float]:
    """m2 = a^2/b from per-batch (a, b) means, with a first-order delta-method error."""
    b_count = means.shape[0]
    a, b = means.mean(axis=0)
    cov = np.cov(means, rowvar=False, ddof=1) / b_count
    grad = np.array([2 * a / b, -(a * a) / (b * b)])
    var = float(grad @ cov @ grad)
    return float(a * a / b), math.sqrt(max(var, 0.0))


def m2(
    k: int,
    n: int,
    mode: str = "exact",
    *,
    samples: int = 100_000,
    batches: int = DEFAULT_BATCHES,
    seed: int = 0,
    jobs: int = 1,
    allow_long: bool = False,
) -> M2Report:
    if mode == "exact":
        value: Fraction | float = m2_exact(k, n, jobs=jobs, allow_long=allow_long)
        stderr = None
    elif mode == "monte-carlo":
        means = batch_moment_means(k, n, samples, batches, seed, jobs=jobs)
        value, stderr = ratio_with_error(means)
    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return M2Report(k, n, mode, value, stderr, m2_k1(n), m2_limit(n), m2_asymptote(n))


def paley_zygmund_bound(alpha: float, p2: float) -> float:
    """Lower bound (1 - alpha)^2 p2 on Pr[P >= alpha/|Omega|], clamped to [0, 1]."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not p2 > 0:
        raise ValueError(f"p2 must be positive, got {p2}")
    return min(1.0, max(0.0, (1 - alpha) ** 2 * p2))


def translation_bound(m2_ratio_approx: float, delta: float) -> float:
    """Bound on the exact normalized second moment E[P^2]/E[P]^2 given the
    approximate distribution's ratio and a per-probability relative error delta."""
    if not 0 <= delta < 1:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    if m2_ratio_approx < 1:
        raise ValueError(f"a normalized second moment is at least 1, got {m2_ratio_approx}")
    return m2_ratio_approx / (1 - delta) ** 2 + 1


def transition_scan(
    n_values: Iterable[int], k_values: Iterable[int], mode: str = "exact", **kwargs
) -> list[M2Report]:
    """One report per (n, k), n-major, in the order given."""
    k_values = list(k_values)
    return [m2(k, n, mode, **kwargs) for n in n_values for k in k_values]


def scan_to_csv(reports: Sequence[M2Report]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        row = rep.row()
        row["m2_stderr"] = row["m2_stderr"] or ""
        writer.writerow(row)
    return buf.getvalue()


def scan_to_json(reports: Sequence[M2Report], **kwargs) -> str:
    return json.dumps([rep.row() for rep in reports], **kwargs)


def csv_rows_as_json_records(text: str) -> list[dict]:
    """Parse scan CSV into the same records that :func:`scan_to_json` emits."""
    records = []
    for row in csv.DictReader(io.StringIO(text)):
        records.append(
            {
                "k": int(row["k"]),
                "n": int(row["n"]),
                "m2": row["m2"],
                "m2_stderr": row["m2_stderr"] or None,
                "m2_k1": row["m2_k1"],
                "m2_limit": row["m2_limit"],
                "m2_asymptote": row["m2_asymptote"],
                "mode": row["mode"],
            }
        )
    return records
