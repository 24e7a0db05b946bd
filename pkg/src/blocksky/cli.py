"""Command line entry points.

Every option can also come from a JSON config file passed with
``--config``; keys mirror the long flag names with underscores
(``{"algorithm": "pro_sky", "budget": 500}``). Explicit flags override
config values. Reports go to ``--out`` as deterministic JSON, or to
stdout when no path is given.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from blocksky.datamodel import (
    IngestConfig,
    IngestError,
    load_dataset,
    load_ground_truth,
)
from blocksky.functions import (
    double_metaphone_function,
    exact_match,
    get_substring,
    predicate_universe,
    soundex_function,
)
from blocksky.harness import (
    ExperimentPlan,
    HarnessError,
    asl_payload,
    compare_baselines,
    comparison_payload,
    cs_payload,
    run_algorithm,
    run_cs,
    skyline_payload,
    sweep_csv,
    sweep_label_cost,
    sweep_payload,
    write_report,
)
from blocksky.learner import LearnError, SkylineResult
from blocksky.metrics import MetricsError, build_index
from blocksky.oracle import GroundTruthOracle, OracleError, replay
from blocksky.scheme import SchemeError, parse_scheme

FAILURES = (IngestError, HarnessError, LearnError, OracleError,
            SchemeError, MetricsError, ValueError, OSError)

ALGORITHM_ALIASES = {"naive": "naive_sky", "active": "active_sky",
                     "pro": "pro_sky"}


class Settings:
    """Option values merged over a config file; explicit flags win."""

    def __init__(self, config_path: str | None, flags: dict):
        self.values: dict = {}
        if config_path:
            try:
                data = json.loads(Path(config_path).read_text("utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise click.ClickException(f"cannot read config: {exc}")
            if not isinstance(data, dict):
                raise click.ClickException("config file must hold a JSON object")
            self.values.update(data)
        for key, value in flags.items():
            if value is None:
                continue
            if isinstance(value, tuple) and not value:
                continue
            self.values[key] = value

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def require(self, key: str):
        value = self.values.get(key)
        if value is None:
            flag = key.replace("_", "-")
            raise click.ClickException(
                f"missing --{flag} (or config key {key!r})")
        return value


def parse_functions(spec) -> tuple | None:
    """Parse "exact,soundex,metaphone,substring:4" into constructors."""
    if spec is None:
        return None
    tokens = spec if isinstance(spec, (list, tuple)) else str(spec).split(",")
    out = []
    for token in tokens:
        token = str(token).strip()
        if token == "exact":
            out.append(exact_match())
        elif token == "soundex":
            out.append(soundex_function())
        elif token in ("metaphone", "double_metaphone"):
            out.append(double_metaphone_function())
        elif token.startswith("substring"):
            length = int(token.split(":", 1)[1]) if ":" in token else 4
            out.append(get_substring(length))
        else:
            raise click.ClickException(f"unknown blocking function {token!r}")
    if not out:
        raise click.ClickException("function list is empty")
    return tuple(out)


def float_grid(value) -> tuple[float, ...]:
    if value is None:
        return ()
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return tuple(float(tok) for tok in str(value).split(",") if tok.strip())


def int_grid(value) -> tuple[int, ...]:
    if value is None:
        return ()
    if isinstance(value, int):
        return (value,)
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    return tuple(int(tok) for tok in str(value).split(",") if tok.strip())


def load_inputs(settings: Settings, need_truth: bool):
    """Dataset index plus optional ground truth, per the ingest options."""
    ingest = IngestConfig(
        mode=settings.get("mode", "dedup"),
        delimiter=str(settings.get("delimiter", ",")),
        id_column=str(settings.get("id_column", "id")),
        other_path=settings.get("other"),
        truth_has_header=bool(settings.get("truth_has_header", False)),
    )
    dataset = load_dataset(settings.require("dataset"), ingest)
    truth = None
    truth_path = settings.get("truth")
    if truth_path is None and need_truth:
        raise click.ClickException("missing --truth (or config key 'truth')")
    if truth_path is not None:
        truth = load_ground_truth(truth_path, dataset, ingest)
    functions = parse_functions(settings.get("functions"))
    universe = predicate_universe(dataset.schema, functions)
    return build_index(dataset, universe), truth


def resolve_algorithm(settings: Settings, allowed=None) -> str:
    name = str(settings.require("algorithm"))
    name = ALGORITHM_ALIASES.get(name, name)
    if allowed is not None and name not in allowed:
        raise click.ClickException(
            f"algorithm must be one of {', '.join(sorted(allowed))}")
    return name


def single_param(settings: Settings, algorithm: str):
    """The one epsilon/delta/l a single run needs, from grid-style flags."""
    if algorithm == "asl":
        grid, name = float_grid(settings.get("epsilon")), "epsilon"
    elif algorithm == "pro_sky":
        grid, name = int_grid(settings.get("l")), "l"
    else:
        grid, name = float_grid(settings.get("delta")), "delta"
    if len(grid) != 1:
        raise click.ClickException(f"{algorithm} needs exactly one --{name}")
    return name, grid[0]


def emit(payload: dict, out: str | None) -> None:
    if out:
        write_report(out, payload)
        click.echo(f"wrote {out}")
    else:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))


def fail_on(exc: Exception) -> click.ClickException:
    return click.ClickException(str(exc))


def config_option(fn):
    return click.option("--config", "config_path",
                        type=click.Path(dir_okay=False),
                        help="JSON file with default option values.")(fn)


def ingest_options(fn):
    for option in reversed([
        click.option("--dataset", help="Delimited record file."),
        click.option("--truth", help="Delimited true-match pair file."),
        click.option("--mode", type=click.Choice(["dedup", "linkage"])),
        click.option("--other", help="Second source file (linkage mode)."),
        click.option("--delimiter"),
        click.option("--id-column", "id_column"),
        click.option("--truth-has-header", "truth_has_header", is_flag=True,
                     default=None),
        click.option("--functions",
                     help="Comma list: exact,soundex,metaphone,substring:4."),
    ]):
        fn = option(fn)
    return fn


def run_options(fn):
    for option in reversed([
        click.option("--algorithm"),
        click.option("--budget", type=int),
        click.option("--epsilon", help="Completeness threshold(s)."),
        click.option("--delta", help="Threshold step(s)."),
        click.option("--l", "l", help="Conjunction size cap(s)."),
        click.option("--k", type=int, help="Sample size per round."),
        click.option("--seed", type=int),
        click.option("--sampler", type=click.Choice(["active", "random"])),
        click.option("--out", help="Report file path."),
    ]):
        fn = option(fn)
    return fn


@click.group()
def main() -> None:
    """Learn entity-resolution blocking schemes and their skyline."""


def _single_run(settings: Settings, allowed=None, oracle_factory=None) -> None:
    algorithm = resolve_algorithm(settings, allowed)
    need_truth = oracle_factory is None
    try:
        index, truth = load_inputs(settings, need_truth=need_truth)
        name, param = single_param(settings, algorithm)
        if oracle_factory is None:
            oracle = GroundTruthOracle(truth, int(settings.require("budget")))
        else:
            oracle = oracle_factory()
        result = run_algorithm(
            index, oracle, algorithm=algorithm,
            seed=int(settings.get("seed", 1)),
            k=settings.get("k"), sampler=settings.get("sampler", "active"),
            **{name: param})
        if isinstance(result, SkylineResult):
            payload = skyline_payload(result, index, truth)
        else:
            payload = asl_payload(result, index, truth)
    except FAILURES as exc:
        raise fail_on(exc)
    emit(payload, settings.get("out"))
    log_path = settings.get("log")
    if log_path:
        oracle.write_log(log_path)
        click.echo(f"wrote {log_path}")


@main.command()
@config_option
@ingest_options
@run_options
@click.option("--log", help="Write the oracle label log here.")
def learn(config_path, **flags) -> None:
    """Run one learner against ground truth and report the result."""
    _single_run(Settings(config_path, flags))


@main.command()
@config_option
@ingest_options
@run_options
@click.option("--log", help="Write the oracle label log here.")
def skyline(config_path, **flags) -> None:
    """Learn the scheme skyline (naive, active or pro)."""
    _single_run(Settings(config_path, flags),
                allowed=("naive_sky", "active_sky", "pro_sky"))


@main.command()
@config_option
@ingest_options
@run_options
@click.option("--repetitions", type=int)
@click.option("--base-seed", "base_seed", type=int)
def cs(config_path, **flags) -> None:
    """Outcome stability over repeated seeded runs."""
    settings = Settings(config_path, flags)
    algorithm = resolve_algorithm(settings)
    try:
        index, truth = load_inputs(settings, need_truth=True)
        name, param = single_param(settings, algorithm)
        plan = ExperimentPlan(
            algorithm=algorithm, index=index, truth=truth,
            budgets=(int(settings.require("budget")),),
            repetitions=int(settings.get("repetitions", 10)),
            base_seed=int(settings.get("base_seed", 1)),
            k=settings.get("k"), sampler=settings.get("sampler", "active"),
            **{name + "s": (param,)})
        report = run_cs(plan)
    except FAILURES as exc:
        raise fail_on(exc)
    emit(cs_payload(report), settings.get("out"))


@main.command()
@config_option
@ingest_options
@run_options
@click.option("--repetitions", type=int)
@click.option("--base-seed", "base_seed", type=int)
@click.option("--target-cs", "target_cs", type=float)
@click.option("--step", type=int)
@click.option("--cap", type=int)
@click.option("--csv", "csv_path", help="Also write the table as CSV here.")
def sweep(config_path, **flags) -> None:
    """Walk the label budget upward until outcomes stabilize."""
    settings = Settings(config_path, flags)
    algorithm = resolve_algorithm(settings)
    try:
        index, truth = load_inputs(settings, need_truth=True)
        if algorithm == "asl":
            grids = {"epsilons": float_grid(settings.get("epsilon"))}
        elif algorithm == "pro_sky":
            grids = {"ls": int_grid(settings.get("l"))}
        else:
            grids = {"deltas": float_grid(settings.get("delta"))}
        plan = ExperimentPlan(
            algorithm=algorithm, index=index, truth=truth,
            budgets=(int(settings.get("budget", 50)),),
            repetitions=int(settings.get("repetitions", 10)),
            base_seed=int(settings.get("base_seed", 1)),
            k=settings.get("k"), sampler=settings.get("sampler", "active"),
            **grids)
        report = sweep_label_cost(plan,
                                  float(settings.require("target_cs")),
                                  step=int(settings.get("step", 50)),
                                  cap=int(settings.get("cap", 10_000)))
    except FAILURES as exc:
        raise fail_on(exc)
    emit(sweep_payload(report), settings.get("out"))
    csv_path = settings.get("csv_path") or settings.get("csv")
    if csv_path:
        Path(csv_path).write_text(sweep_csv(report), encoding="utf-8")
        click.echo(f"wrote {csv_path}")


@main.command()
@config_option
@ingest_options
@click.option("--skyline", "skyline_path",
              help="Report file from `learn` or `skyline`.")
@click.option("--preset", "presets", multiple=True,
              help="name=SCHEME_TEXT baseline; repeatable.")
@click.option("--out", help="Report file path.")
def compare(config_path, **flags) -> None:
    """Score preset baseline schemes against a learned skyline."""
    settings = Settings(config_path, flags)
    try:
        index, truth = load_inputs(settings, need_truth=True)
        report_path = settings.require("skyline_path")
        data = json.loads(Path(report_path).read_text("utf-8"))
        texts = [p["scheme"] for p in data.get("points", [])]
        if "scheme" in data and not texts:  # single-scheme report
            texts = [data["scheme"]["scheme"]]
        schemes = [parse_scheme(t, index.universe) for t in texts]
        preset_pairs = []
        for item in settings.get("presets", ()):
            name, _, text = str(item).partition("=")
            if not text:
                name, text = item, item
            preset_pairs.append((name, parse_scheme(text, index.universe)))
        if not preset_pairs:
            raise click.ClickException("needs at least one --preset")
        report = compare_baselines(index, truth, schemes, preset_pairs)
    except FAILURES as exc:
        raise fail_on(exc)
    except (KeyError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"bad skyline report: {exc}")
    emit(comparison_payload(report), settings.get("out"))


@main.command("replay")
@config_option
@ingest_options
@run_options
@click.option("--log", "log_path", help="Oracle label log to replay.")
def replay_run(config_path, **flags) -> None:
    """Re-run a learner against a recorded label log."""
    settings = Settings(config_path, flags)
    log_path = settings.require("log_path")
    try:
        oracle = replay(log_path)
    except FAILURES as exc:
        raise fail_on(exc)
    _single_run(settings, oracle_factory=lambda: oracle)


@main.command()
@config_option
@ingest_options
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
def serve(config_path, **flags) -> None:
    """Serve interactive labelling sessions over HTTP."""
    settings = Settings(config_path, flags)
    try:
        index, _ = load_inputs(settings, need_truth=False)
    except FAILURES as exc:
        raise fail_on(exc)
    from blocksky.service import create_app
    import uvicorn

    app = create_app(index)
    uvicorn.run(app, host=str(settings.get("host", "127.0.0.1")),
                port=int(settings.get("port", 8000)))


if __name__ == "__main__":
    main()
