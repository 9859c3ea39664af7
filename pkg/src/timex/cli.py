"""Command-line front end.

Subcommands: ``analyze`` a dataset against a model, ``simulate`` a synthetic
benchmark, ``evaluate`` methods across replicated benchmarks, ``render`` a
results heatmap, and ``serve`` a synthetic model over the wire protocol.
Exit codes: 0 success, 1 usage error, 2 analysis/protocol/file error.
"""

import json
import shlex
import sys
from pathlib import Path

import click

from . import evaluate as evaluation
from . import synth
from .data import FORMAT_BINARY, FORMAT_CSV_LONG, LossKind, Task, load_dataset, save_dataset
from .errors import TimexError
from .models import spawn_external_model
from .pipeline import AnalysisConfig, FeatureGroup, analyze
from .render import render_heatmap
from .serving import serve_model

_LOSSES = {
    "auto": None,
    "quadratic": LossKind.quadratic(),
    "bce": LossKind.binary_cross_entropy(),
}


@click.group()
def cli():
    """Explain which features, windows, and orderings a temporal model relies on."""


def _detect_format(path: str, fmt: str) -> str:
    if fmt != "auto":
        return fmt
    return FORMAT_CSV_LONG if path.endswith(".csv") else FORMAT_BINARY


def _load_groups(path: str | None):
    if path is None:
        return None
    doc = json.loads(Path(path).read_text())
    return tuple(FeatureGroup.from_document(entry) for entry in doc)


@cli.command("analyze")
@click.option("--data", required=True, help="Dataset file (TDS1 binary or long-form CSV).")
@click.option("--format", "fmt", type=click.Choice(["auto", FORMAT_BINARY, FORMAT_CSV_LONG]),
              default="auto", show_default=True)
@click.option("--model-cmd", default=None,
              help="Command serving the model over stdio (parsed with shell quoting).")
@click.option("--builtin", "builtin_spec", default=None,
              help="Synthetic model spec JSON to run in process.")
@click.option("--out", required=True, help="Path for the results JSON document.")
@click.option("--heatmap", default=None, help="Optional path for a results heatmap SVG.")
@click.option("--permutations", default=50, show_default=True)
@click.option("--gamma", default=0.99, show_default=True,
              help="Window localization parameter.")
@click.option("--fdr", default=0.1, show_default=True, help="Target false discovery rate.")
@click.option("--seed", default=0, show_default=True)
@click.option("--loss", type=click.Choice(sorted(_LOSSES)), default="auto", show_default=True)
@click.option("--batch-size", default=256, show_default=True)
@click.option("--jobs", default=1, show_default=True, help="Worker threads.")
@click.option("--groups", default=None, help="Feature-group tree JSON.")
@click.option("--model-timeout", default=30.0, show_default=True,
              help="Seconds to wait for the external model handshake.")
def analyze_cmd(data, fmt, model_cmd, builtin_spec, out, heatmap, permutations, gamma, fdr,
                seed, loss, batch_size, jobs, groups, model_timeout):
    """Analyze a dataset against a black-box model."""
    if (model_cmd is None) == (builtin_spec is None):
        raise click.UsageError("exactly one of --model-cmd or --builtin is required")
    dataset = load_dataset(data, _detect_format(data, fmt))
    config = AnalysisConfig(
        gamma=gamma, q=fdr, permutations=permutations, seed=seed,
        loss=_LOSSES[loss], batch_size=batch_size, parallelism=jobs,
        feature_groups=_load_groups(groups),
    )
    if builtin_spec is not None:
        model = synth.make_synthetic_model(synth.load_model_spec(builtin_spec))
    else:
        parts = shlex.split(model_cmd)
        model = spawn_external_model(parts[0], parts[1:], timeout=model_timeout,
                                     batch_size=batch_size)
    try:
        report = analyze(model, dataset, config)
    finally:
        model.close()
    Path(out).write_text(report.to_json())
    if heatmap is not None:
        Path(heatmap).write_text(render_heatmap(report.to_document()))
    important = sum(1 for f in report.features if f.important)
    click.echo(f"analyzed {dataset.num_features} features: {important} important -> {out}",
               err=True)


@cli.command()
@click.option("--instances", default=1000, show_default=True)
@click.option("--features", default=10, show_default=True)
@click.option("--timesteps", default=20, show_default=True)
@click.option("--relevant", default=5, show_default=True)
@click.option("--task", type=click.Choice(["classification", "regression"]),
              default="classification", show_default=True)
@click.option("--target-metric", default=0.9, show_default=True,
              help="Accuracy (classification) or R^2 (regression) the noised model is tuned to.")
@click.option("--tolerance", default=0.005, show_default=True)
@click.option("--fraction-categorical", default=0.5, show_default=True)
@click.option("--fraction-trend", default=0.5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", required=True)
def simulate(instances, features, timesteps, relevant, task, target_metric, tolerance,
             fraction_categorical, fraction_trend, seed, out_dir):
    """Generate a synthetic dataset, ground truth, and tuned model spec."""
    if relevant > features:
        raise click.UsageError("--relevant cannot exceed --features")
    task = Task(task)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base, gen_specs = synth.generate_dataset(
        instances, features, timesteps, seed, fraction_categorical, fraction_trend
    )
    targets, spec, _ = synth.build_ground_truth(base, gen_specs, relevant, seed, task)
    dataset = base.with_targets(targets, task)
    metric = synth.ACCURACY if task == Task.CLASSIFICATION else synth.R_SQUARED
    beta = synth.tune_beta(spec, dataset, metric, target_metric, tolerance)
    spec = synth.finalize_spec(spec, dataset, beta)
    save_dataset(dataset, out / "dataset.tds", FORMAT_BINARY)
    (out / "ground_truth.json").write_text(
        json.dumps(synth.ground_truth_record(spec), indent=2) + "\n"
    )
    synth.save_model_spec(spec, out / "model.json")
    click.echo(f"wrote dataset.tds, ground_truth.json, model.json (beta={beta:.6g}) to {out}",
               err=True)


@cli.command()
@click.option("--replicates", default=3, show_default=True)
@click.option("--methods", default=",".join(evaluation.METHODS), show_default=True,
              help="Comma-separated subset of: " + ", ".join(evaluation.METHODS))
@click.option("--instances", default=1000, show_default=True)
@click.option("--features", default=10, show_default=True)
@click.option("--timesteps", default=20, show_default=True)
@click.option("--relevant", default=5, show_default=True)
@click.option("--task", type=click.Choice(["classification", "regression"]),
              default="classification", show_default=True)
@click.option("--target-metric", default=0.9, show_default=True)
@click.option("--permutations", default=50, show_default=True)
@click.option("--gamma", default=0.99, show_default=True)
@click.option("--fdr", default=0.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--jobs", default=1, show_default=True, help="Concurrent replicates.")
@click.option("--out", required=True, help="Path for the comparison CSV.")
def evaluate(replicates, methods, instances, features, timesteps, relevant, task,
             target_metric, permutations, gamma, fdr, seed, jobs, out):
    """Run the replicated method-comparison suite and write its CSV."""
    method_list = tuple(m.strip() for m in methods.split(",") if m.strip())
    unknown = set(method_list) - set(evaluation.METHODS)
    if unknown:
        raise click.UsageError(f"unknown methods: {', '.join(sorted(unknown))}")
    cfg = evaluation.SuiteConfig(
        replicates=replicates, num_instances=instances, num_features=features,
        sequence_length=timesteps, num_relevant=relevant, task=Task(task),
        methods=method_list, seed=seed, target_metric=target_metric,
        permutations=permutations, gamma=gamma, q=fdr, jobs=jobs,
    )
    result = evaluation.run_suite(cfg)
    Path(out).write_text(evaluation.suite_csv(result))
    for rep in result.replicates:
        if rep.error is not None:
            click.echo(f"replicate {rep.index} excluded: {rep.error}", err=True)
    click.echo(f"{replicates - result.excluded}/{replicates} replicates -> {out}", err=True)


@cli.command()
@click.option("--results", required=True, help="Results JSON from `analyze`.")
@click.option("--out", required=True, help="Path for the SVG.")
def render(results, out):
    """Render a results document as a heatmap SVG."""
    try:
        document = json.loads(Path(results).read_text())
    except ValueError as exc:
        raise TimexError(f"malformed results JSON: {exc}") from exc
    Path(out).write_text(render_heatmap(document))
    click.echo(f"wrote {out}", err=True)


@cli.command()
@click.option("--builtin", "builtin_spec", required=True,
              help="Synthetic model spec JSON to serve over stdio.")
def serve(builtin_spec):
    """Serve a synthetic model over the wire protocol (for subprocess analysis)."""
    model = synth.make_synthetic_model(synth.load_model_spec(builtin_spec))
    sys.exit(serve_model(model))


def main(argv=None) -> int:
    """Entry point mapping errors to exit codes (1 usage, 2 runtime)."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (TimexError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
