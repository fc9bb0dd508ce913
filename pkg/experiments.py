"""
Experiment configs and the runners behind the command line and the API

A config names one group and one state, optionally a family parameter
substituted into both. Runners return plain rows; writing them out is
left to write_csv or to the JSON routes
"""

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Iterable, TextIO

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

import bounds
import oracle
from config import Settings
from errors import ConfigError, DomainError, OracleMismatchError
from groups import build_model, inverse
from models.group import IDENTITY, FreeGroup, GroupModel
from models.results import (
    COGROWTH_FIELDS,
    CSV_FIELDS,
    PSD_FIELDS,
    VERIFY_FIELDS,
    WINDOW_FIELDS,
    BoundResult,
    CsvRow,
    Rigor,
    ScanResult,
    VerificationCheck,
)
from models.state import DecayCertificate, RadialCoefficients, StateModel
from spectra import cogrowth_count, growth_rate
from states import (
    FreeProductState,
    LengthState,
    RadialState,
    build_state,
    decay_profile,
    empirical_decay_rate,
    gram_psd_check,
    radial_closed_form,
    radial_count,
    strictness_scan,
)


logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parent / "schemas" / "experiment.schema.json"

# Default ball radius per command when the config does not set one
DEFAULT_RADII = {"analyze": 8, "scan": 8, "verify": 4, "psd-check": 3, "cogrowth": 8}


@lru_cache(maxsize=1)
def _validator() -> Draft202012Validator:
    with open(SCHEMA_PATH, encoding="utf-8") as schema_file:
        schema = json.load(schema_file)
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def validate_config(config: Any) -> dict:
    """
    Validates a config against the published schema

    Raises:
        ConfigError: With the location and message of the most relevant
                     violation.
    """
    error = best_match(_validator().iter_errors(config))
    if error is not None:
        location = "/".join(str(part) for part in error.absolute_path) or "<root>"
        raise ConfigError(f"Invalid config at {location}: {error.message}")
    analysis = config.get("analysis", {})
    if analysis.get("k_min", 1) > analysis.get("k_max", math.inf):
        raise ConfigError("analysis.k_min must not exceed analysis.k_max")
    return config


def load_config(path: str | Path) -> dict:
    """Reads and validates a JSON experiment config"""
    try:
        with open(path, encoding="utf-8") as config_file:
            config = json.load(config_file)
    except OSError as error:
        raise ConfigError(f"Cannot read config {path}: {error}") from error
    except json.JSONDecodeError as error:
        raise ConfigError(f"Config {path} is not valid JSON: {error}") from error
    return validate_config(config)


def substitute(node: Any, name: str | None, value: int | None) -> Any:
    """
    Replaces every descriptor value equal to the family parameter name
    and expands {"repeat": n, "factor": ...} list items into n copies
    """
    if name is not None and isinstance(node, str) and node == name:
        return value
    if isinstance(node, list):
        expanded = []
        for item in node:
            if isinstance(item, dict) and set(item) == {"repeat", "factor"}:
                count = substitute(item["repeat"], name, value)
                if not isinstance(count, int) or count < 1:
                    raise ConfigError(f"Cannot repeat a factor {count!r} times")
                factor = substitute(item["factor"], name, value)
                expanded.extend(factor for _ in range(count))
            else:
                expanded.append(substitute(item, name, value))
        return expanded
    if isinstance(node, dict):
        return {
            key: item if key == "kind" else substitute(item, name, value)
            for key, item in node.items()
        }
    return node


def build_member(config: dict, value: int | None = None) -> tuple[GroupModel, StateModel]:
    """
    Builds the group and state of one family member

    Raises:
        ConfigError: If a descriptor still holds an unsubstituted name
                     or a value of the wrong type.
        DomainError: If the descriptors do not fit together.
    """
    name = config.get("family", {}).get("parameter")
    group = substitute(config["group"], name, value)
    state = substitute(config["state"], name, value)
    try:
        model = build_model(group)
        return model, build_state(state, model)
    except DomainError:
        raise
    except (KeyError, TypeError, ValueError) as error:
        raise ConfigError(f"Cannot build the experiment: {error}") from error


def family_values(config: dict) -> list[int | None]:
    family = config.get("family")
    return list(family["values"]) if family else [None]


@dataclass(frozen=True)
class AnalysisOptions:
    """Effective per-run options; CLI flags win over the config"""

    command: str
    k_min: int
    k_max: int
    radius: int
    epsilon: float
    cogrowth_length: int
    gamma: float | None
    seeds: int
    cap: int
    threads: int
    psd_tolerance: float
    strict_tolerance: float
    oracle_tolerance: float

    def header_lines(self) -> list[str]:
        # Thread counts stay out so output does not depend on them
        return [
            f"# cutofflab {self.command} k_min={self.k_min} k_max={self.k_max} "
            f"radius={self.radius} epsilon={self.epsilon!r} cap={self.cap}",
            f"# tolerances psd={self.psd_tolerance!r} strict={self.strict_tolerance!r} "
            f"oracle={self.oracle_tolerance!r}",
        ]


def analysis_options(
    config: dict,
    settings: Settings,
    command: str,
    epsilon: float | None = None,
    radius: int | None = None,
) -> AnalysisOptions:
    analysis = config.get("analysis", {})
    tolerances = analysis.get("tolerances", {})
    default_k_max = bounds.DEFAULT_K_MAX if command == "scan" else 8
    options = AnalysisOptions(
        command=command,
        k_min=analysis.get("k_min", 1),
        k_max=analysis.get("k_max", default_k_max),
        radius=radius if radius is not None else analysis.get("radius", DEFAULT_RADII[command]),
        epsilon=epsilon if epsilon is not None else analysis.get("epsilon", bounds.DEFAULT_EPSILON),
        cogrowth_length=analysis.get("cogrowth_length", 6),
        gamma=analysis.get("gamma"),
        seeds=analysis.get("seeds", 20),
        cap=settings.cap,
        threads=settings.threads,
        psd_tolerance=tolerances.get("psd", settings.psd_tolerance),
        strict_tolerance=tolerances.get("strict", settings.strict_tolerance),
        oracle_tolerance=tolerances.get("oracle", 1e-10),
    )
    if not 0 < options.epsilon < 0.5:
        raise ConfigError(f"epsilon must lie in (0, 1/2), got {options.epsilon}")
    if options.radius < 0 or (command != "psd-check" and options.radius < 1):
        raise ConfigError(f"radius must be positive, got {options.radius}")
    return options


def _map_members(config: dict, options: AnalysisOptions, run: Callable[[int | None], Any]) -> list:
    # map keeps the family order whatever the thread count
    with ThreadPoolExecutor(max_workers=max(1, options.threads)) as pool:
        return list(pool.map(run, family_values(config)))


@dataclass
class Report:
    """Rows of one command with the comment lines written above them"""

    fields: tuple[str, ...]
    rows: list[dict]
    comments: list[str]
    summary: str | None = None


def _closed_form(size_S: int, certificate: DecayCertificate | None, k: int):
    if certificate is None or certificate.poly_degree != 0 or size_S < 3:
        return None
    c = k - math.log(size_S - 1) / (2 * certificate.rate)
    if c <= 0:
        return None
    return bounds.closed_form_upper(size_S, certificate.rate, c)


def run_analyze(config: dict, options: AnalysisOptions) -> Report:
    """
    One row per (family parameter, k) with the certified upper bound,
    the closed forms, the best lower bound and the density verdict

    The decay certificate is checked on B(radius) once per member; upper
    bounds of a member whose certificate fails are reported Unknown.
    """

    def analyze(value):
        model, state = build_member(config, value)
        logger.info("Analyzing %s on %s", state.describe(), model.name)
        profile = decay_profile(state, max(options.radius, 5), options.cap)
        omega = growth_rate(model, options.radius, options.cap)
        trusted = state.certificate is None or bounds.certificate_gate(
            state, options.radius, options.cap
        ).passed
        rows = []
        for k in range(options.k_min, options.k_max + 1):
            if trusted:
                upper = bounds.l2_upper_bound(
                    state, k, options.radius, options.cap, check_certificate=False
                )
                closed = _closed_form(model.size_S, state.certificate, k)
            else:
                upper = BoundResult(math.nan, Rigor.UNKNOWN, options.radius)
                closed = None
            lower = bounds.best_lower_bound(state, k, profile, options.gamma, options.cap)
            verdict = bounds.density_verdict(profile, omega, k, state.nonnegative)
            rows.append(
                CsvRow(
                    family_param=value,
                    k=k,
                    upper_l2=upper.value,
                    upper_closed_paper=closed.displayed if closed else None,
                    upper_closed_exact=closed.exact if closed else None,
                    lower_best=lower.value if lower else None,
                    lower_kind=lower.kind if lower else None,
                    density_verdict=verdict.verdict.value,
                    truncation_radius=upper.truncation_radius,
                    tail_bound=upper.tail_bound,
                )
            )
        rate = empirical_decay_rate(state, options.radius, options.cap)
        hits = strictness_scan(state, 2, options.strict_tolerance, options.cap)
        label = model.name if value is None else f"{model.name} ({value})"
        note = (
            f"# {label}: empirical_decay_rate={format_field(rate)} "
            f"growth_rate={format_field(omega)} non_strict_in_B2={len(hits)}"
        )
        if not trusted:
            note += " certificate=failed"
        return rows, note

    results = _map_members(config, options, analyze)
    rows = sorted((row for member, _ in results for row in member), key=CsvRow.sort_key)
    comments = options.header_lines() + [note for _, note in results]
    return Report(CSV_FIELDS, [row.as_dict() for row in rows], comments)


def run_scan(config: dict, options: AnalysisOptions) -> tuple[Report, ScanResult]:
    if "family" not in config:
        raise ConfigError("scan needs a family block")
    result = bounds.cutoff_scan(
        lambda value: build_member(config, value),
        family_values(config),
        epsilon=options.epsilon,
        k_max=options.k_max,
        radius=options.radius,
        threads=options.threads,
        cap=options.cap,
    )
    summary = result.summary_line()
    comments = options.header_lines() + [f"# summary {summary}"]
    report = Report(
        WINDOW_FIELDS, [window.as_dict() for window in result.windows], comments, summary
    )
    return report, result


def run_cogrowth(config: dict, options: AnalysisOptions) -> Report:
    def count(value):
        model, _ = build_member(config, value)
        estimate = cogrowth_count(model, options.cogrowth_length, options.cap)
        rows = []
        running = None
        for length, relations in enumerate(estimate.counts, start=1):
            if relations > 0:
                running = relations ** (1 / length)
            rows.append(
                {
                    "family_param": value,
                    "length": length,
                    "count": relations,
                    "gamma_hat": running if running is not None else estimate.gamma_hat,
                }
            )
        note = (
            f"# {model.name}: gamma_hat={format_field(estimate.gamma_hat)}"
            f"{' (free convention)' if estimate.gamma_convention else ''}"
        )
        return rows, note

    results = _map_members(config, options, count)
    comments = options.header_lines() + [note for _, note in results]
    return Report(COGROWTH_FIELDS, [row for rows, _ in results for row in rows], comments)


def run_psd_check(config: dict, options: AnalysisOptions) -> Report:
    """Gram matrix check of the configured state on B(radius)"""

    def check(value):
        model, state = build_member(config, value)
        ball = [g for layer in oracle.ball_layers(model, options.radius, options.cap) for g in layer]
        result = gram_psd_check(state, ball, options.psd_tolerance)
        return {
            "family_param": value,
            "size": result.size,
            "min_eigenvalue": result.min_eigenvalue,
            "psd": result.psd,
        }

    rows = _map_members(config, options, check)
    return Report(PSD_FIELDS, rows, options.header_lines())


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _random_coefficients(model: FreeGroup, support: int, seed: int) -> RadialCoefficients:
    rng = np.random.default_rng(seed)
    lam = tuple(float(x) for x in rng.uniform(-1, 1, size=support + 1))
    return RadialCoefficients(lam).normalized(model.size_S)


def expected_intersection(model: FreeGroup, length: int, i: int, j: int) -> int:
    """|g S(i) intersected with S(j)| for |g| = length from the counting formula"""
    if length == 0:
        return radial_count(model.size_S, 0, i, 0) if i == j else 0
    doubled = i + length - j
    if doubled % 2 or not 0 <= doubled // 2 <= min(i, length):
        return 0
    return radial_count(model.size_S, length, i, doubled // 2)


def verify_member(model: GroupModel, state: StateModel, options: AnalysisOptions) -> list[VerificationCheck]:
    """
    Runs every oracle comparison that applies to the state

    Returns:
        list[VerificationCheck]: One entry per check with the largest
                                 deviation seen.
    """
    radius = options.radius
    cap = options.cap
    exact = 1e-12
    layers = oracle.ball_layers(model, radius, cap)
    ball = [g for layer in layers for g in layer]
    checks = [
        VerificationCheck("normalization", abs(state.evaluate(IDENTITY) - 1), exact, 1),
        VerificationCheck(
            "hermitian",
            max(abs(state.evaluate(inverse(model, g)) - complex(state.evaluate(g)).conjugate()) for g in ball),
            exact,
            len(ball),
        ),
    ]

    mean, variance = bounds.chi1_moments(state, 1)
    oracle_mean, oracle_variance = oracle.variance_exact(state, 1, cap=cap)
    checks.append(
        VerificationCheck(
            "chi1_moments",
            max(_relative(mean, oracle_mean), _relative(variance, oracle_variance)),
            exact,
            model.size_S**2,
        )
    )

    if state.certificate is not None:
        checks.append(oracle.certificate_check(state, radius, exact, cap))
        deviation = 0.0
        for k in range(options.k_min, options.k_max + 1):
            result = bounds.l2_upper_bound(state, k, radius, cap, check_certificate=False)
            if result.certified:
                deviation = max(
                    deviation,
                    _relative(result.truncated_sum, oracle.tv_l2_truncated_sum(state, k, radius, cap)),
                )
        checks.append(VerificationCheck("truncated_sum", deviation, exact, options.k_max - options.k_min + 1))

    if isinstance(state, LengthState) and model.closed_form_sphere_size(1) is not None:
        deviation, checked = 0.0, 0
        q = model.size_S - 1
        for k in range(options.k_min, options.k_max + 1):
            x = q * math.exp(-2 * k * state.t)
            if x >= 1:
                continue
            series = model.size_S / q * x / (1 - x)
            result = bounds.l2_upper_bound(state, k, radius, cap, check_certificate=False)
            deviation = max(deviation, _relative(result.value, 0.5 * math.sqrt(series)))
            checked += 1
        checks.append(VerificationCheck("geometric_series", deviation, 1e-9, checked))

    if isinstance(state, RadialState):
        support = len(state.coeffs.lam) - 1
        vectors = [state.coeffs.lam] + [
            _random_coefficients(model, support, seed).lam for seed in range(options.seeds)
        ]
        closed_deviation, decay_excess = 0.0, 0.0
        q = model.size_S - 1
        for g in ball:
            table = oracle.intersection_table(model, g, support, cap)
            for lam in vectors:
                closed = radial_closed_form(model.size_S, lam, len(g))
                closed_deviation = max(closed_deviation, abs(closed - oracle.radial_from_table(table, lam)))
                decay_excess = max(decay_excess, abs(closed) - (len(g) + 1) * q ** (-len(g) / 2))
        checks.append(
            VerificationCheck("radial_closed_form", closed_deviation, options.oracle_tolerance, len(ball) * len(vectors))
        )
        checks.append(VerificationCheck("radial_decay", max(decay_excess, 0.0), exact, len(ball) * len(vectors)))

    if isinstance(model, FreeGroup) and model.rank >= 2:
        reach = min(radius, 4)
        mismatches, checked = 0, 0
        for layer in layers[: min(radius, 3) + 1]:
            for g in layer:
                table = oracle.intersection_table(model, g, reach, cap)
                for i in range(reach + 1):
                    for j in range(reach + len(g) + 1):
                        checked += 1
                        if table.get((i, j), 0) != expected_intersection(model, len(g), i, j):
                            mismatches += 1
        checks.append(VerificationCheck("intersection_counts", mismatches, 0, checked))

    if isinstance(state, FreeProductState):
        failures = sum(
            1 for g in ball if not oracle.free_product_refactor_check(model, state.factors, g)
        )
        checks.append(VerificationCheck("free_product_blocks", failures, 0, len(ball)))
        _, total = oracle.variance_exact(state, 1, cap=cap)
        parts = [oracle.variance_exact(factor, 1, cap=cap)[1] for factor in state.factors]
        checks.append(
            VerificationCheck("free_variance_additivity", _relative(total, math.fsum(parts)), exact, len(parts))
        )

    for check in checks:
        if not check.passed:
            logger.warning("Check %s failed: deviation %.3e > %.3e", check.name, check.max_deviation, check.tolerance)
    return checks


def run_verify(config: dict, options: AnalysisOptions) -> Report:
    def verify(value):
        model, state = build_member(config, value)
        logger.info("Verifying %s on %s", state.describe(), model.name)
        return [
            {"family_param": value, **_check_row(check)}
            for check in verify_member(model, state, options)
        ]

    rows = [row for member in _map_members(config, options, verify) for row in member]
    return Report(VERIFY_FIELDS, rows, options.header_lines())


def _check_row(check: VerificationCheck) -> dict:
    return {
        "name": check.name,
        "max_deviation": check.max_deviation,
        "tolerance": check.tolerance,
        "checked": check.checked,
        "passed": check.passed,
    }


def ensure_passed(report: Report) -> None:
    """
    Raises OracleMismatchError when a verification check or a Gram
    matrix check in the report failed
    """
    failed = [
        str(row.get("name", row.get("family_param")))
        for row in report.rows
        if row.get("passed", row.get("psd", True)) is False
    ]
    if failed:
        raise OracleMismatchError(f"Checks beyond tolerance: {', '.join(sorted(set(failed)))}")


def format_field(value: Any) -> str:
    """
    CSV text of one field: floats with 17 significant digits, inf for
    divergent and nan for unknown bounds, empty for missing values
    """
    if value is None:
        return ""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def write_csv(stream: TextIO, report: Report) -> None:
    """Writes the comment lines, a header row and the rows with UNIX line endings"""
    for comment in report.comments:
        stream.write(comment + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(report.fields)
    for row in report.rows:
        writer.writerow([format_field(row[name]) for name in report.fields])


def json_rows(rows: Iterable[dict]) -> list[dict]:
    """Rows with non-finite floats spelled out, since JSON has no inf or nan"""
    return [
        {
            key: format_field(value) if isinstance(value, float) and not math.isfinite(value) else value
            for key, value in row.items()
        }
        for row in rows
    ]


RUNNERS = {
    "analyze": run_analyze,
    "cogrowth": run_cogrowth,
    "psd-check": run_psd_check,
    "verify": run_verify,
}


def run_command(command: str, config: dict, options: AnalysisOptions) -> Report:
    """Runs a command by name; scan reports come with their summary line"""
    if command == "scan":
        report, _ = run_scan(config, options)
        return report
    return RUNNERS[command](config, options)
