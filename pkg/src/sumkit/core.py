"""Lazy 1-based scalar sequences, truncation schedules and evidence verdicts.

Scalars come in two modes that are never mixed inside one evaluation:
exact mode uses ``fractions.Fraction`` (arbitrary precision), float mode
uses IEEE float64.  Conversion is explicit and one-way (exact -> float).

All sequence and matrix indices start at 1; any term with an index below 1
is treated as structurally zero by the constructors that need it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from .errors import ScheduleError

Scalar = Union[Fraction, float]

DEFAULT_SIZES = (16, 32, 64, 128, 256)


def as_fraction(value) -> Fraction:
    """Convert an int, string or Fraction to an exact scalar.

    Floats are rejected on purpose: exact mode never silently absorbs
    rounding that already happened.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError(
            "refusing to build an exact scalar from a float; "
            "pass a string or Fraction instead"
        )
    raise TypeError(f"cannot build an exact scalar from {type(value).__name__}")


def scalar_to_json(value: Scalar):
    """Render a scalar losslessly for JSON: Fractions as 'p/q' strings."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        if math.isfinite(value):
            return value
        return repr(value)
    if isinstance(value, int):
        return str(value)
    raise TypeError(f"not a scalar: {value!r}")


def _to_float(value: Scalar) -> float:
    try:
        return float(value)
    except OverflowError:
        return math.inf if value > 0 else -math.inf


class LazySequence:
    """A total, pure rule ``index -> scalar`` with transparent memoization.

    ``support`` (optional) declares that every term beyond that index is
    zero; it is metadata the constructors guarantee, not a mask applied on
    top of the rule.  Memoized values are written idempotently, so reads
    are safe under concurrency.
    """

    __slots__ = ("_rule", "support", "exact", "label", "_memo")

    def __init__(self, rule: Callable[[int], Scalar], *, support: Optional[int] = None,
                 exact: bool = True, label: str = ""):
        self._rule = rule
        self.support = support
        self.exact = exact
        self.label = label
        self._memo: dict[int, Scalar] = {}

    def at(self, k: int) -> Scalar:
        if not isinstance(k, int) or k < 1:
            raise IndexError(f"sequence indices start at 1, got {k!r}")
        v = self._memo.get(k)
        if v is None:
            v = self._rule(k)
            self._memo[k] = v
        return v

    def prefix(self, n: int) -> list[Scalar]:
        return [self.at(k) for k in range(1, n + 1)]

    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    # -- constructors -------------------------------------------------

    @classmethod
    def from_function(cls, fn, *, support=None, exact=True, label="") -> "LazySequence":
        return cls(fn, support=support, exact=exact, label=label)

    @classmethod
    def from_terms(cls, terms: Iterable, *, exact: bool = True, label: str = "") -> "LazySequence":
        """Finite leading terms, zero tail; support is the term count."""
        if exact:
            vals = [as_fraction(t) for t in terms]
            zero: Scalar = Fraction(0)
        else:
            vals = [float(t) for t in terms]
            zero = 0.0
        n = len(vals)

        def rule(k: int) -> Scalar:
            return vals[k - 1] if k <= n else zero

        return cls(rule, support=n, exact=exact, label=label)

    @classmethod
    def unit(cls, k: int, *, exact: bool = True, label: str = "") -> "LazySequence":
        one: Scalar = Fraction(1) if exact else 1.0
        zero: Scalar = Fraction(0) if exact else 0.0
        return cls(lambda i: one if i == k else zero, support=k, exact=exact,
                   label=label or f"e{k}")

    # -- combinators ---------------------------------------------------

    def scaled(self, c: Scalar) -> "LazySequence":
        exact = self.exact and not isinstance(c, float)
        return LazySequence(lambda k: c * self.at(k), support=self.support, exact=exact)

    def plus(self, other: "LazySequence") -> "LazySequence":
        support = None
        if self.support is not None and other.support is not None:
            support = max(self.support, other.support)
        return LazySequence(lambda k: self.at(k) + other.at(k), support=support,
                            exact=self.exact and other.exact)

    def zeroed_prefix(self, m: int) -> "LazySequence":
        """The sequence with its first ``m`` terms replaced by zero."""
        zero = self.zero()
        return LazySequence(lambda k: zero if k <= m else self.at(k),
                            support=self.support, exact=self.exact)

    def as_float(self) -> "LazySequence":
        if not self.exact:
            return self
        return LazySequence(lambda k: float(self.at(k)), support=self.support,
                            exact=False, label=self.label)


def ones(*, exact: bool = True) -> LazySequence:
    one: Scalar = Fraction(1) if exact else 1.0
    return LazySequence(lambda k: one, exact=exact, label="ones")


def zeros(*, exact: bool = True) -> LazySequence:
    zero: Scalar = Fraction(0) if exact else 0.0
    return LazySequence(lambda k: zero, support=0, exact=exact, label="zeros")


def harmonic(*, exact: bool = True) -> LazySequence:
    if exact:
        return LazySequence(lambda k: Fraction(1, k), label="harmonic")
    return LazySequence(lambda k: 1.0 / k, exact=False, label="harmonic")


def alternating(*, exact: bool = True) -> LazySequence:
    one: Scalar = Fraction(1) if exact else 1.0
    return LazySequence(lambda k: -one if k % 2 else one, exact=exact, label="alternating")


def powers(p: int, *, exact: bool = True) -> LazySequence:
    if exact:
        return LazySequence(lambda k: Fraction(k) ** p, label=f"power:{p}")
    return LazySequence(lambda k: float(k) ** p, exact=False, label=f"power:{p}")


def geometric(r, *, exact: bool = True) -> LazySequence:
    if exact:
        ratio = as_fraction(r)
        return LazySequence(lambda k: ratio ** k, label=f"geometric:{ratio}")
    ratio = float(r)
    return LazySequence(lambda k: ratio ** k, exact=False, label=f"geometric:{ratio}")


def partial_sum(x: LazySequence, n: int) -> Scalar:
    """Sum of the first ``n`` terms (n >= 0); empty sum is the mode's zero."""
    if n < 0:
        raise ValueError("partial sums need n >= 0")
    total = x.zero()
    for k in range(1, n + 1):
        total += x.at(k)
    return total


# ---------------------------------------------------------------------------
# Space tags, schedules, verdicts
# ---------------------------------------------------------------------------


class SpaceTag(Enum):
    """Classical sequence-space tags used by evidence statistics."""

    L1 = "l1"
    LINF = "linf"
    C = "c"
    C0 = "c0"
    BS = "bs"
    CS = "cs"
    C0S = "c0s"


@dataclass(frozen=True)
class TruncationSchedule:
    """Increasing evaluation sizes plus the decision thresholds.

    ``stabilization_tol`` is relative (with an absolute floor of 1 on the
    comparison scale); ``growth_ratio`` is the cumulative factor across
    ``growth_steps`` consecutive strictly-increasing steps that counts as
    divergence evidence.
    """

    sizes: tuple[int, ...] = DEFAULT_SIZES
    stabilization_tol: float = 1e-9
    growth_ratio: float = 1.5
    growth_steps: int = 3

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) < 3:
            raise ScheduleError("a truncation schedule needs at least 3 sizes")
        if any(s < 1 for s in sizes):
            raise ScheduleError("schedule sizes must be positive")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ScheduleError("schedule sizes must be strictly increasing")
        if not (self.stabilization_tol > 0):
            raise ScheduleError("stabilization tolerance must be positive")
        if not (self.growth_ratio > 1):
            raise ScheduleError("growth ratio must exceed 1")
        if self.growth_steps < 1:
            raise ScheduleError("growth window needs at least 1 step")

    @property
    def max_size(self) -> int:
        return self.sizes[-1]

    def doubled(self) -> "TruncationSchedule":
        """The same schedule with one extra doubling appended."""
        return TruncationSchedule(self.sizes + (self.sizes[-1] * 2,),
                                  self.stabilization_tol, self.growth_ratio,
                                  self.growth_steps)

    @classmethod
    def parse(cls, text: str) -> "TruncationSchedule":
        """Parse ``"16,32,64,128,256;tol=1e-9;ratio=1.5"`` (options optional)."""
        parts = [p.strip() for p in text.strip().split(";") if p.strip()]
        if not parts:
            raise ScheduleError("empty schedule text")
        try:
            sizes = tuple(int(tok) for tok in parts[0].split(",") if tok.strip())
        except ValueError as exc:
            raise ScheduleError(f"bad schedule sizes in {parts[0]!r}") from exc
        tol, ratio, steps = 1e-9, 1.5, 3
        for opt in parts[1:]:
            if "=" not in opt:
                raise ScheduleError(f"bad schedule option {opt!r}")
            key, val = opt.split("=", 1)
            key = key.strip().lower()
            try:
                if key == "tol":
                    tol = float(val)
                elif key == "ratio":
                    ratio = float(val)
                elif key == "steps":
                    steps = int(val)
                else:
                    raise ScheduleError(f"unknown schedule option {key!r}")
            except ValueError as exc:
                raise ScheduleError(f"bad value for schedule option {key!r}") from exc
        return cls(sizes, tol, ratio, steps)

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "stabilization_tol": self.stabilization_tol,
            "growth_ratio": self.growth_ratio,
            "growth_steps": self.growth_steps,
        }


class Verdict(Enum):
    HOLDS = "HOLDS_AT_TRUNCATION"
    DIVERGENCE = "DIVERGENCE_EVIDENCE"
    INCONCLUSIVE = "INCONCLUSIVE"


_VERDICT_RANK = {Verdict.DIVERGENCE: 0, Verdict.INCONCLUSIVE: 1, Verdict.HOLDS: 2}


def combine_conjunctive(statuses: Iterable[Verdict]) -> Verdict:
    """Weakest-member conjunction: any divergence wins, then inconclusive."""
    worst = Verdict.HOLDS
    for s in statuses:
        if _VERDICT_RANK[s] < _VERDICT_RANK[worst]:
            worst = s
    return worst


@dataclass
class ConditionVerdict:
    """Outcome of evaluating one statistic over a truncation schedule."""

    status: Verdict
    trace: list[tuple[int, Scalar]]
    witness: Optional[dict] = None
    limit_estimates: Optional[dict] = None
    aux: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "status": self.status.value,
            "trace": [{"size": n, "statistic": scalar_to_json(v)} for n, v in self.trace],
        }
        if self.witness is not None:
            doc["witness"] = _jsonify(self.witness)
        if self.limit_estimates is not None:
            doc["limit_estimates"] = {str(k): scalar_to_json(v)
                                      for k, v in sorted(self.limit_estimates.items())}
        if self.aux:
            doc["aux"] = _jsonify(self.aux)
        return doc


def _jsonify(obj):
    if isinstance(obj, (Fraction,)):
        return scalar_to_json(obj)
    if isinstance(obj, float):
        return scalar_to_json(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    return obj


class StatKind(Enum):
    """How a statistic relates to the property it witnesses.

    SUP statistics approximate a supremum that must stay finite; their
    trace should stabilize (or at least stop growing).  DEFECT statistics
    measure a failure amount that must tend to zero.
    """

    SUP = "sup"
    DEFECT = "defect"


def _growth_window(vals: list[float], ratio: float, steps: int) -> Optional[int]:
    """First index of a run of ``steps`` strictly increasing steps whose
    cumulative growth reaches ``ratio``; None if there is no such run."""
    for i in range(len(vals) - steps):
        seg = vals[i:i + steps + 1]
        if seg[0] <= 0:
            continue
        if all(b > a for a, b in zip(seg, seg[1:])) and seg[-1] >= ratio * seg[0]:
            return i
    return None


def judge_trace(values: list[Scalar], kind: StatKind, sched: TruncationSchedule, *,
                scale: float = 1.0, require_exact_zero: bool = False) -> tuple[Verdict, dict]:
    """Decide HOLDS / DIVERGENCE / INCONCLUSIVE from a statistic trace.

    Divergence needs a run of ``growth_steps`` strictly increasing steps
    with cumulative growth >= ``growth_ratio``.  A SUP trace holds when it
    stabilizes (final two values within tolerance) or when its increments
    certify geometric decay (ratio <= 1/growth_ratio twice running), which
    extrapolates to a finite limit.  A DEFECT trace holds when its final
    value is negligible against ``scale`` or decays geometrically to zero.
    """
    if len(values) < 3:
        raise ScheduleError("judging a trace needs at least 3 values")
    floats = [_to_float(v) for v in values]
    tol = sched.stabilization_tol
    theta = 1.0 / sched.growth_ratio
    routes = {"kind": kind.value, "stabilized": False, "geometric_decay": False,
              "growth_window_at": None}

    window = _growth_window(floats, sched.growth_ratio, sched.growth_steps)
    routes["growth_window_at"] = window

    if kind is StatKind.SUP:
        stabilized = abs(floats[-1] - floats[-2]) <= tol * max(1.0, abs(floats[-1]))
        routes["stabilized"] = stabilized
        if stabilized:
            return Verdict.HOLDS, routes
        if window is not None:
            return Verdict.DIVERGENCE, routes
        incs = [b - a for a, b in zip(floats, floats[1:])]
        if len(incs) >= 3 and incs[-3] > 0 and incs[-2] > 0 and incs[-1] >= 0:
            if incs[-1] <= theta * incs[-2] and incs[-2] <= theta * incs[-3]:
                routes["geometric_decay"] = True
                return Verdict.HOLDS, routes
        return Verdict.INCONCLUSIVE, routes

    # DEFECT
    if window is not None:
        return Verdict.DIVERGENCE, routes
    if require_exact_zero and not isinstance(values[-1], float):
        small = values[-1] == 0
    else:
        small = abs(floats[-1]) <= tol * max(1.0, scale)
    routes["stabilized"] = small
    if small:
        return Verdict.HOLDS, routes
    if len(floats) >= 3 and floats[-3] > 0 and floats[-2] > 0:
        if floats[-1] <= theta * floats[-2] and floats[-2] <= theta * floats[-3]:
            routes["geometric_decay"] = True
            return Verdict.HOLDS, routes
    return Verdict.INCONCLUSIVE, routes


# ---------------------------------------------------------------------------
# Sequence-space evidence
# ---------------------------------------------------------------------------


def _osc(window: list[Scalar]) -> Scalar:
    return max(window) - min(window)


def space_evidence(x: LazySequence, tag: SpaceTag, sched: TruncationSchedule) -> ConditionVerdict:
    """Truncation evidence that ``x`` belongs to the tagged classical space.

    Statistics per tag: L1 partial sums of |x_k|; LINF running max |x_k|;
    BS running max |partial sum|; C / CS the oscillation (max - min) of the
    terms / partial sums over the last half of the window; C0 / C0S
    additionally require the tail magnitudes / partial sums themselves to
    vanish, so their defect is the max of oscillation and magnitude.
    """
    n_max = sched.max_size
    xs = x.prefix(n_max)
    abs_xs = [abs(v) for v in xs]
    sums: list[Scalar] = []
    acc = x.zero()
    for v in xs:
        acc = acc + v
        sums.append(acc)
    abs_sums = [abs(s) for s in sums]

    trace: list[tuple[int, Scalar]] = []
    witness: Optional[dict] = None
    if tag is SpaceTag.L1:
        kind = StatKind.SUP
        acc = x.zero()
        stats = []
        for i, v in enumerate(abs_xs, start=1):
            acc = acc + v
            stats.append(acc)
        for s in sched.sizes:
            trace.append((s, stats[s - 1]))
        prev = None
        for s, v in trace:
            if prev is not None and v < prev:
                raise AssertionError("L1 statistic must be non-decreasing")
            prev = v
    elif tag is SpaceTag.LINF:
        kind = StatKind.SUP
        for s in sched.sizes:
            window = abs_xs[:s]
            m = max(window)
            trace.append((s, m))
        witness = {"index": 1 + abs_xs[:n_max].index(max(abs_xs[:n_max]))}
    elif tag is SpaceTag.BS:
        kind = StatKind.SUP
        for s in sched.sizes:
            trace.append((s, max(abs_sums[:s])))
        witness = {"index": 1 + abs_sums.index(max(abs_sums))}
        prev = None
        for s, v in trace:
            if prev is not None and v < prev:
                raise AssertionError("BS statistic must be non-decreasing")
            prev = v
    elif tag in (SpaceTag.C, SpaceTag.C0):
        kind = StatKind.DEFECT
        for s in sched.sizes:
            window = xs[s // 2: s]
            d = _osc(window)
            if tag is SpaceTag.C0:
                mag = max(abs_xs[s // 2: s])
                d = max(d, mag)
            trace.append((s, d))
    elif tag in (SpaceTag.CS, SpaceTag.C0S):
        kind = StatKind.DEFECT
        for s in sched.sizes:
            window = sums[s // 2: s]
            d = _osc(window)
            if tag is SpaceTag.C0S:
                mag = max(abs_sums[s // 2: s])
                d = max(d, mag)
            trace.append((s, d))
    else:  # pragma: no cover - exhaustive over SpaceTag
        raise ValueError(f"unknown space tag {tag!r}")

    if tag in (SpaceTag.L1, SpaceTag.LINF, SpaceTag.C, SpaceTag.C0):
        scale = max(1.0, max((_to_float(v) for v in abs_xs), default=1.0))
    else:
        scale = max(1.0, max((_to_float(v) for v in abs_sums), default=1.0))

    status, routes = judge_trace([v for _, v in trace], kind, sched, scale=scale)
    aux = {"space": tag.value, "routes": routes}
    return ConditionVerdict(status=status, trace=trace, witness=witness, aux=aux)
