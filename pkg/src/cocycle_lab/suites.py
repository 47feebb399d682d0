"""Named experiment suites with deterministic reports.

Each suite samples seeded instances, runs the relevant constructions,
records exact rational rows, and flags every assertion it checked.  A
report is a pure function of (config, seed): rows are emitted in a fixed
order and fractions are rendered exactly, so reruns are byte-identical.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import sampling
from .dynamics import MarkerSequence, Odometer
from .involution_cocycles import (
    InvolutionCocycle,
    h_approximate,
    recover_generators,
    verify_identities,
)
from .space import (
    BernoulliMeasure,
    Measure,
    exceedance_prefixes,
    measure_from_json,
    measure_of_cylinder_set,
    tau3_functional,
    tau4_functional,
)
from .values import NeighborhoodChain, as_fraction, group_from_tag, is_dyadic
from .zcocycles import ZCocycle, coboundary_solve, density_table, gh_check


class UsageError(ValueError):
    """Configuration or invocation errors (exit code 2)."""


@dataclass
class ExperimentConfig:
    """Model, value group, seed, and tuning knobs for one experiment."""

    bases: tuple[int, ...] = (2, 2, 2, 2, 2)
    group: str = "rat"
    seed: int = 0
    eps0: Fraction = Fraction(1, 4)
    horizon: Optional[int] = None
    measures: tuple[Measure, ...] = ()
    count: Optional[int] = None
    n_max: Optional[int] = None
    epsilon_max: Fraction = Fraction(1)

    def __post_init__(self):
        self.bases = tuple(int(b) for b in self.bases)
        if len(self.bases) < 1:
            raise UsageError("depth must be >= 1")
        self.eps0 = as_fraction(self.eps0)
        self.epsilon_max = as_fraction(self.epsilon_max)
        if self.eps0 <= 0 or self.epsilon_max <= 0:
            raise UsageError("radii must be positive")
        group_from_tag(self.group)  # validate

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        kwargs = {}
        if "bases" in obj:
            kwargs["bases"] = tuple(obj["bases"])
        elif "depth" in obj:
            kwargs["bases"] = (2,) * int(obj["depth"])
        for key in ("group", "seed", "horizon", "count", "n_max"):
            if key in obj and obj[key] is not None:
                kwargs[key] = obj[key]
        for key in ("eps0", "epsilon_max"):
            if key in obj and obj[key] is not None:
                kwargs[key] = as_fraction(obj[key])
        if "measures" in obj:
            kwargs["measures"] = tuple(measure_from_json(m) for m in obj["measures"])
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad config: {exc}") from exc

    def model(self) -> Odometer:
        return Odometer(self.bases)

    def value_group(self):
        return group_from_tag(self.group)

    def rng(self) -> random.Random:
        return random.Random(self.seed)

    def default_measures(self) -> tuple[Measure, ...]:
        if self.measures:
            return self.measures
        return (BernoulliMeasure.uniform(self.bases),)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, Fraction)):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class Report:
    """Deterministic experiment output: header, rows, and pass/fail checks."""

    suite: str
    header: dict
    columns: tuple[str, ...]
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def experiment_id(self) -> str:
        return f"{self.suite}-seed{self.header.get('seed')}-depth{self.header.get('depth')}"

    def add_row(self, **values) -> None:
        self.rows.append({k: values.get(k) for k in self.columns})

    def check(self, name: str, passed: bool, witness: str = "") -> bool:
        self.checks.append({"name": name, "passed": bool(passed), "witness": witness})
        return passed

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c["passed"]]

    @staticmethod
    def _json_cell(value):
        if isinstance(value, Fraction):
            return {"fraction": str(value), "decimal": float(value)}
        return value

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment_id,
            "suite": self.suite,
            "header": {k: _fmt(v) for k, v in self.header.items()},
            "columns": list(self.columns),
            "rows": [
                {k: self._json_cell(v) for k, v in row.items()} for row in self.rows
            ],
            "checks": self.checks,
            "passed": self.passed,
        }
        return json.dumps(payload, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(row[k]) for k in self.columns))
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise UsageError(f"unknown format {fmt!r}")


def _header(config: ExperimentConfig, suite: str) -> dict:
    return {
        "suite": suite,
        "seed": config.seed,
        "depth": len(config.bases),
        "bases": ",".join(str(b) for b in config.bases),
        "group": config.group,
    }


def density_suite(config: ExperimentConfig) -> Report:
    """Coboundary approximants F_n with certified tau3 rate 2^-n."""
    model = config.model()
    if any(b != 2 for b in config.bases):
        raise UsageError("the density rate 2^-n is stated for the 2-odometer")
    rng = config.rng()
    group = config.value_group()
    markers = MarkerSequence(model)
    n_max = config.n_max or model.depth - 1
    if not 1 <= n_max <= model.depth - 1:
        raise UsageError(f"n_max must lie in 1..{model.depth - 1}")
    fair = BernoulliMeasure.uniform(config.bases)
    count = config.count or 5
    report = Report("density", _header(config, "density"), ("generator", "n", "tau3", "bound", "certified"))
    for g_idx in range(count):
        f = sampling.cylinder_function(rng, config.bases, group)
        rows = density_table(ZCocycle(model, f), markers, n_max, [fair])
        for row in rows:
            n = row["n"]
            bound = Fraction(1, 1 << n)
            report.add_row(
                generator=g_idx,
                n=n,
                tau3=row["tau3_0"],
                bound=bound,
                certified=row["certified"],
            )
            report.check(
                f"gen{g_idx}-n{n}-rate",
                row["tau3_0"] <= bound,
                witness=f"tau3={row['tau3_0']}",
            )
            report.check(f"gen{g_idx}-n{n}-certificate", row["certified"])
    return report


def topology_suite(config: ExperimentConfig) -> Report:
    """Quantitative inclusion constants between the tau functionals."""
    rng = config.rng()
    group = config.value_group()
    count = config.count or 100
    report = Report(
        "topology",
        _header(config, "topology"),
        ("case", "eps", "delta", "tau3", "tau4", "exceedance"),
    )
    report.header["epsilon_max"] = config.epsilon_max
    antecedents = 0
    for case in range(count):
        f = sampling.cylinder_function(rng, config.bases, group)
        g = f + sampling.cylinder_function(rng, config.bases, group, span=2)
        mu = sampling.bernoulli_measure(rng, config.bases)
        eps = Fraction(rng.randint(1, 8), 8) * config.epsilon_max
        delta = Fraction(rng.randint(1, 8), 8)
        t3 = tau3_functional(f, g, mu)
        t4 = tau4_functional(f, g, mu)
        exceed = measure_of_cylinder_set(mu, exceedance_prefixes(f, g, eps))
        report.add_row(case=case, eps=eps, delta=delta, tau3=t3, tau4=t4, exceedance=exceed)
        if t3 < eps * delta:
            antecedents += 1
            report.check(
                f"case{case}-tau3-constant",
                exceed < delta,
                witness=f"tau3={t3} eps={eps} delta={delta} mu(exceed)={exceed}",
            )
        if t4 < eps * delta / (1 + eps):
            report.check(
                f"case{case}-tau4-constant",
                exceed < delta,
                witness=f"tau4={t4} eps={eps} delta={delta} mu(exceed)={exceed}",
            )
    report.header["antecedents"] = antecedents
    return report


def odometer_suite(config: ExperimentConfig) -> Report:
    """Generator-family identities and the exact recovery round trip."""
    rng = config.rng()
    group = config.value_group()
    depth = len(config.bases)
    if any(b != 2 for b in config.bases):
        raise UsageError("involution cocycles need the 2-odometer")
    count = config.count or 20
    report = Report(
        "odometer", _header(config, "odometer"), ("family", "generators", "identities", "roundtrip")
    )
    for idx in range(count):
        n_gen = rng.randint(1, min(5, depth))
        family = sampling.invariant_family(rng, depth, n_gen, group)
        cocycle = InvolutionCocycle(family)
        check = verify_identities(cocycle)
        recovered = recover_generators(cocycle, n_gen, family.bases, group)
        roundtrip = recovered.tables == family.tables
        report.add_row(
            family=idx, generators=n_gen, identities=check.ok, roundtrip=roundtrip
        )
        report.check(f"family{idx}-identities", check.ok, witness=str(check.witness))
        report.check(f"family{idx}-roundtrip", roundtrip)
    return report


def happrox_suite(config: ExperimentConfig) -> Report:
    """Dyadic-valued cohomologous cocycles with bounded transfer."""
    rng = config.rng()
    depth = len(config.bases)
    if any(b != 2 for b in config.bases):
        raise UsageError("involution cocycles need the 2-odometer")
    if config.group != "rat":
        raise UsageError("the dyadic approximation suite needs the rational group")
    chain = NeighborhoodChain(config.eps0)
    count = config.count or 20
    report = Report(
        "happrox",
        _header(config, "happrox"),
        ("family", "generators", "max_transfer", "bound", "dyadic"),
    )
    report.header["eps0"] = config.eps0
    for idx in range(count):
        n_gen = rng.randint(1, min(4, depth))
        family = sampling.invariant_family(rng, depth, n_gen, group_from_tag("rat"))
        result = h_approximate(family, chain, verify=True)
        beta = result.beta
        size = 1 << depth
        dyadic_ok = all(
            is_dyadic(beta.eval_word_index(sorted(w), i))
            for w in _subsets(n_gen)
            for i in range(size)
        )
        max_g = max(abs(v) for v in result.transfer.table)
        report.add_row(
            family=idx,
            generators=n_gen,
            max_transfer=max_g,
            bound=result.radius_bound,
            dyadic=dyadic_ok,
        )
        report.check(f"family{idx}-dyadic", dyadic_ok)
        report.check(
            f"family{idx}-transfer-bound",
            max_g <= config.eps0,
            witness=f"max|g|={max_g}",
        )
    return report


def _subsets(n: int):
    for bits in range(1 << n):
        yield [k for k in range(1, n + 1) if (bits >> (k - 1)) & 1]


def gh_suite(config: ExperimentConfig) -> Report:
    """Cross-oracle agreement of the bounded-sums test with the exact solver."""
    rng = config.rng()
    model = config.model()
    count = config.count or 50
    report = Report(
        "gh",
        _header(config, "gh"),
        ("case", "coboundary", "cycle_sum", "empirical_sup", "bound"),
    )
    for case in range(count):
        f = sampling.small_integer_function(rng, config.bases, -2, 2)
        a = ZCocycle(model, f)
        certificate = coboundary_solve(a)
        result = gh_check(a, horizon=config.horizon)
        agree = result.decision == (certificate is not None)
        report.add_row(
            case=case,
            coboundary=result.decision,
            cycle_sum=a.cycle_sum.payload,
            empirical_sup=result.empirical_sup,
            bound=certificate.spread_bound if certificate else "",
        )
        report.check(f"case{case}-agreement", agree)
        if certificate is not None:
            report.check(
                f"case{case}-sup-bound",
                result.empirical_sup <= certificate.spread_bound,
                witness=f"sup={result.empirical_sup} M={certificate.spread_bound}",
            )
        else:
            report.check(f"case{case}-witness", result.witness is not None)
    return report


SUITES: dict[str, Callable[[ExperimentConfig], Report]] = {
    "density": density_suite,
    "topology": topology_suite,
    "odometer": odometer_suite,
    "happrox": happrox_suite,
    "gh": gh_suite,
}


def run(config: ExperimentConfig, suite: str) -> Report:
    """Run a named suite; unknown names are usage errors."""
    if suite not in SUITES:
        raise UsageError(
            f"unknown suite {suite!r}; available: {', '.join(sorted(SUITES))}"
        )
    return SUITES[suite](config)
