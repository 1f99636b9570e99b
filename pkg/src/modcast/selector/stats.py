"""Welch t-test and the property-conditioned module effectiveness scan."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import betainc

from ..exceptions import InvalidInputError
from ..profiler import PROFILE_FIELDS, DataProfile
from ..ranking import RankTable

SETTINGS = ("multivariate", "univariate")
DEFAULT_ALPHA = 0.05

# module field -> candidate values, in the order claims are scanned
CHOICES = (
    ("IN", (True, False)),
    ("SD", (True, False)),
    ("fusion", ("temporal", "feature")),
    ("embed", ("none", "token", "patch", "invert", "freq")),
    ("arch", ("mlp", "rnn", "transformer")),
)


def welch_t_test(a, b) -> tuple[float, float]:
    """Two-sided Welch test; returns ``(t, p)`` with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if len(a) < 2 or len(b) < 2:
        raise InvalidInputError("each sample needs at least two values")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0 or vb == 0:
        raise InvalidInputError("samples must have nonzero variance")
    qa, qb = va / len(a), vb / len(b)
    se2 = qa + qb
    t = (a.mean() - b.mean()) / np.sqrt(se2)
    df = se2**2 / (qa**2 / (len(a) - 1) + qb**2 / (len(b) - 1))
    p = betainc(0.5 * df, 0.5, df / (df + t * t))
    return float(t), float(min(1.0, p))


def holm_adjust(pvalues: Sequence[float]) -> np.ndarray:
    """Holm step-down adjusted p-values, in input order."""
    p = np.asarray(pvalues, dtype=np.float64)
    m = len(p)
    if m == 0:
        return p
    order = np.argsort(p, kind="stable")
    scaled = (m - np.arange(m)) * p[order]
    adjusted = np.minimum(1.0, np.maximum.accumulate(scaled))
    out = np.empty(m)
    out[order] = adjusted
    return out


def parse_config_id(config_id: str) -> dict:
    """``in1-sd0-temporal-patch-mlp`` -> ``{"IN": True, "SD": False, ...}``."""
    parts = config_id.split("-")
    if len(parts) != 5 or not parts[0].startswith("in") or not parts[1].startswith("sd"):
        raise InvalidInputError(f"unrecognized config id {config_id!r}")
    return {
        "IN": parts[0] == "in1",
        "SD": parts[1] == "sd1",
        "fusion": parts[2],
        "embed": parts[3],
        "arch": parts[4],
    }


@dataclass(frozen=True)
class EffectClaim:
    setting: str
    property: str
    direction: str  # "high" or "low": the side of the median where the choice helps
    choice: tuple  # (module field, value)
    p_value: float  # multiplicity-adjusted
    raw_p_value: float
    t_statistic: float

    def describe(self) -> str:
        name, value = self.choice
        return f"{self.setting},{self.property},{self.direction},{name}={value},{self.p_value:.3g}"


@dataclass
class ScanResult:
    claims: list[EffectClaim]
    notes: list[str] = field(default_factory=list)
    tests: int = 0

    def __iter__(self):
        return iter(self.claims)

    def __len__(self) -> int:
        return len(self.claims)


def _setting_of(profile: DataProfile) -> str:
    return "univariate" if profile.n_feature == 1 else "multivariate"


def _split(values: dict) -> tuple[list, list]:
    """Scenarios above the median vs at/below it; two-valued properties split by value."""
    distinct = sorted(set(values.values()))
    if len(distinct) == 2:
        hi = distinct[1]
        return [k for k, v in values.items() if v == hi], [k for k, v in values.items() if v != hi]
    med = float(np.median(list(values.values())))
    return [k for k, v in values.items() if v > med], [k for k, v in values.items() if v <= med]


def effectiveness_scan(
    results: Mapping[str, RankTable],
    profiles: Mapping[str, DataProfile],
    settings: Mapping[str, str] | None = None,
    alpha: float = DEFAULT_ALPHA,
    correction: str = "holm",
    properties: Sequence[str] = PROFILE_FIELDS,
) -> ScanResult:
    """Test, per setting, property and module choice, whether the choice ranks better on one side of the property median.

    On each side the rank scores of configs with the choice are compared with
    those without it (pooled over that side's scenarios) by a Welch test. A
    claim is kept when the choice has the lower mean rank and its p-value,
    adjusted over every test of the scan (``correction="holm"`` or ``"none"``),
    is at most ``alpha``.
    """
    if correction not in ("holm", "none"):
        raise InvalidInputError(f"unknown correction {correction!r}")
    missing = [s for s in results if s not in profiles]
    if missing:
        raise InvalidInputError(f"no profile for scenarios {missing}")
    settings = dict(settings or {})
    notes: list[str] = []
    candidates = []  # (setting, prop, side, choice, t, p)
    parsed = {
        s: [(parse_config_id(r.config_id), r.score) for r in table.rows] for s, table in results.items()
    }
    for setting in SETTINGS:
        scen = [s for s in results if settings.get(s, _setting_of(profiles[s])) == setting]
        if not scen:
            continue
        for prop in properties:
            values = {s: getattr(profiles[s], prop) for s in scen if getattr(profiles[s], prop) is not None}
            if len(set(values.values())) < 2:
                notes.append(f"{setting}/{prop}: property constant or absent, skipped")
                continue
            high, low = _split(values)
            if len(high) < 2 or len(low) < 2:
                notes.append(f"{setting}/{prop}: fewer than two scenarios on a side, skipped")
                continue
            for side, group in (("high", high), ("low", low)):
                for name, options in CHOICES:
                    for value in options:
                        with_c = [sc for s in group for cols, sc in parsed[s] if cols[name] == value]
                        without = [sc for s in group for cols, sc in parsed[s] if cols[name] != value]
                        try:
                            t, p = welch_t_test(with_c, without)
                        except InvalidInputError as exc:
                            notes.append(f"{setting}/{prop}/{side}/{name}={value}: {exc}")
                            continue
                        candidates.append((setting, prop, side, (name, value), t, p))
    raw = [c[5] for c in candidates]
    adjusted = holm_adjust(raw) if correction == "holm" else np.asarray(raw)
    claims = [
        EffectClaim(setting, prop, side, choice, float(adj), p, t)
        for (setting, prop, side, choice, t, p), adj in zip(candidates, adjusted)
        if t < 0 and adj <= alpha
    ]
    return ScanResult(claims, notes, len(candidates))


def claims_to_text(scan: ScanResult) -> str:
    lines = ["setting,property,direction,choice,p_value"]
    lines += [c.describe() for c in scan.claims]
    return "\n".join(lines) + "\n"
