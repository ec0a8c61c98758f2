"""Command-line front end: configure a group and step law, run experiments,
write CSV/JSON results.

Exit codes: 0 success; 1 hypothesis validation failure under
--require-hypotheses; 2 bad arguments or config; 3 numeric failure.
Every subcommand is deterministic given its argv, including --seed, and
--threads never changes output bytes.
"""

from __future__ import annotations

import functools
import io
import math
from pathlib import Path

import click
import numpy as np

from . import groups, stats, walk, words
from .errors import (
    DegenerateInput,
    DomainError,
    EmptyInput,
    NoInverse,
    NumericFailure,
    ParseError,
    TooLarge,
    ValidationError,
)
from .groups import CertStatus
from .rng import SplitMix64
from .sl2 import ElementClass, mat_mul, observe, trace

DEFAULT_STEPS = 200
DEFAULT_SAMPLES = 10_000

_BAD_INPUT = (
    ParseError,
    ValidationError,
    DegenerateInput,
    DomainError,
    NoInverse,
    TooLarge,
    EmptyInput,
)


def _guarded(f):
    @click.pass_context
    @functools.wraps(f)
    def wrapper(ctx, *args, **kwargs):
        try:
            return ctx.invoke(f, *args, **kwargs)
        except _BAD_INPUT as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(2)
        except NumericFailure as e:
            click.echo(f"numeric failure: {e}", err=True)
            ctx.exit(3)

    return wrapper


def _resolve_group(spec: str) -> tuple[groups.GeneratorSet, str]:
    if spec == "sanov":
        return groups.sanov(), "sanov"
    if spec.startswith("pants:"):
        parts = spec[len("pants:"):].split(",")
        if len(parts) != 3:
            raise ParseError("pants spec needs three lengths: pants:l1,l2,l3")
        try:
            l1, l2, l3 = (float(p) for p in parts)
        except ValueError:
            raise ParseError(f"bad pants lengths in {spec!r}") from None
        return groups.pants(l1, l2, l3), spec
    path = Path(spec)
    if not path.is_file():
        raise ParseError(
            f"group spec {spec!r} is not 'sanov', 'pants:l1,l2,l3', or a config file"
        )
    return groups.load(path.read_bytes()), spec


def _resolve_law(weights_text, k: int) -> walk.StepLaw:
    if weights_text is None:
        return walk.StepLaw.uniform(k)
    try:
        weights = tuple(float(p) for p in weights_text.split(","))
    except ValueError:
        raise ParseError(f"bad weights {weights_text!r}") from None
    if len(weights) != k:
        raise ValidationError(f"got {len(weights)} weights for {k} generators")
    return walk.StepLaw(weights)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def _group_options(f):
    f = click.option(
        "--weights",
        default=None,
        help="Comma-separated step weights over the generators (default uniform).",
    )(f)
    f = click.option(
        "--group",
        "group_spec",
        default="sanov",
        show_default=True,
        help="'sanov', 'pants:l1,l2,l3', or a group config JSON path.",
    )(f)
    return f


def _run_options(f):
    f = click.option("--threads", default=1, show_default=True, type=int)(f)
    f = click.option("--seed", default=0, show_default=True, type=int)(f)
    f = click.option(
        "--N", "n_samples", default=DEFAULT_SAMPLES, show_default=True, type=int
    )(f)
    f = click.option(
        "--n", "n_steps", default=DEFAULT_STEPS, show_default=True, type=int
    )(f)
    return f


@click.group()
def cli():
    """Random walks on Fuchsian groups: simulate, classify, check limit laws."""


@cli.command("validate")
@_group_options
@click.option("--depth", default=6, show_default=True, type=int)
@click.option(
    "--require-hypotheses",
    is_flag=True,
    help="Exit 1 unless both hypotheses are Verified.",
)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
@click.pass_context
def validate_cmd(ctx, group_spec, weights, depth, require_hypotheses, out):
    """Search short products for the unboundedness and strong-irreducibility
    certificates and print the report."""
    gens, label = _resolve_group(group_spec)
    report = groups.validate(gens, depth)
    obj = {
        "group": label,
        "moment_ok": report.moment_ok,
        "unbounded": report.unbounded.value,
        "strongly_irreducible": report.strongly_irreducible.value,
        "witness_words": [words.format_word(w, gens) for w in report.witness_words],
        "search_depth": report.search_depth,
    }
    _emit(stats._json_value(obj), out)
    if require_hypotheses and (
        report.unbounded is not CertStatus.VERIFIED
        or report.strongly_irreducible is not CertStatus.VERIFIED
    ):
        click.echo("hypotheses not verified at this search depth", err=True)
        ctx.exit(1)


@cli.command("walk")
@_group_options
@_run_options
@click.option("--keep-words", is_flag=True, help="Record the sampled words (costly).")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def walk_cmd(group_spec, weights, n_steps, n_samples, seed, threads, keep_words, out):
    """Simulate a batch of walks and emit one CSV row per sample."""
    gens, _ = _resolve_group(group_spec)
    law = _resolve_law(weights, gens.k)
    samples = walk.simulate_batch(
        gens, law, n_steps, n_samples, seed, keep_words=keep_words, threads=threads
    )
    if out:
        walk.write_samples_csv(samples, out, gens)
    else:
        buf = io.StringIO()
        walk.write_samples_csv(samples, buf, gens)
        click.echo(buf.getvalue(), nl=False)


def _batch_or_csv(group_spec, weights, n_steps, n_samples, seed, threads, in_csv):
    gens, label = _resolve_group(group_spec)
    law = _resolve_law(weights, gens.k)
    if in_csv:
        samples = walk.read_samples_csv(in_csv, gens)
        if not samples:
            raise EmptyInput("the CSV holds no samples")
    else:
        samples = walk.simulate_batch(
            gens, law, n_steps, n_samples, seed, threads=threads
        )
    return gens, law, label, samples


@cli.command("estimate")
@_group_options
@_run_options
@click.option(
    "--in",
    "in_csv",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Read samples from a walk CSV instead of simulating.",
)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def estimate_cmd(group_spec, weights, n_steps, n_samples, seed, threads, in_csv, out):
    """Estimate the Lyapunov drift, CLT variance, and hyperbolic fraction."""
    _, _, label, samples = _batch_or_csv(
        group_spec, weights, n_steps, n_samples, seed, threads, in_csv
    )
    est = stats.estimate_laws(samples)
    _emit(
        stats.render_summary_json(
            label,
            est.n,
            est.N,
            None if in_csv else seed,
            est.lambda1_hat,
            est.lambda1_se,
            est.phi_hat,
            est.hyperbolic_fraction,
        ),
        out,
    )


@cli.command("clt")
@_group_options
@_run_options
@click.option(
    "--in",
    "in_csv",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Read samples from a walk CSV instead of simulating.",
)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def clt_cmd(group_spec, weights, n_steps, n_samples, seed, threads, in_csv, out):
    """Estimate the laws and report KS distances of both normalized statistics."""
    _, _, label, samples = _batch_or_csv(
        group_spec, weights, n_steps, n_samples, seed, threads, in_csv
    )
    est = stats.estimate_laws(samples)
    ks_log = stats.clt_ks(samples, est.lambda1_hat, est.phi_hat, use_geom=False)
    ks_geom = stats.clt_ks(samples, est.lambda1_hat, est.phi_hat, use_geom=True)
    _emit(
        stats.render_summary_json(
            label,
            est.n,
            est.N,
            None if in_csv else seed,
            est.lambda1_hat,
            est.lambda1_se,
            est.phi_hat,
            est.hyperbolic_fraction,
            ks_log_norm=ks_log,
            ks_geom=ks_geom,
        ),
        out,
    )


@cli.command("ldp")
@_group_options
@click.option("--t0", type=float, required=True, help="Deviation threshold per step.")
@click.option(
    "--ns",
    default="100,200,400",
    show_default=True,
    help="Comma-separated walk lengths (three or more).",
)
@click.option("--N", "n_samples", default=DEFAULT_SAMPLES, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--threads", default=1, show_default=True, type=int)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def ldp_cmd(group_spec, weights, t0, ns, n_samples, seed, threads, out):
    """Estimate deviation probabilities across several walk lengths."""
    gens, label = _resolve_group(group_spec)
    law = _resolve_law(weights, gens.k)
    try:
        lengths = [int(p) for p in ns.split(",")]
    except ValueError:
        raise ParseError(f"bad walk lengths {ns!r}") from None
    batches = [
        (n, walk.simulate_batch(gens, law, n, n_samples, seed, threads=threads))
        for n in lengths
    ]
    longest = max(lengths)
    est = stats.estimate_laws(dict(batches)[longest])
    points = stats.ldp_estimate(batches, est.lambda1_hat, t0)
    _emit(
        stats.render_summary_json(
            label,
            longest,
            est.N,
            seed,
            est.lambda1_hat,
            est.lambda1_se,
            est.phi_hat,
            est.hyperbolic_fraction,
            ldp=points,
        ),
        out,
    )


@cli.command("llt")
@_group_options
@_run_options
@click.option("--a1", type=float, required=True)
@click.option("--a2", type=float, required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def llt_cmd(group_spec, weights, n_steps, n_samples, seed, threads, a1, a2, out):
    """Compare the local window mass sqrt(n)*P(log_norm - lambda1*n in [a1,a2])
    with its Gaussian density prediction."""
    gens, label = _resolve_group(group_spec)
    law = _resolve_law(weights, gens.k)
    samples = walk.simulate_batch(gens, law, n_steps, n_samples, seed, threads=threads)
    est = stats.estimate_laws(samples)
    empirical, theoretical = stats.llt_window(
        samples, est.lambda1_hat, est.phi_hat, a1, a2
    )
    _emit(
        stats.render_summary_json(
            label,
            est.n,
            est.N,
            seed,
            est.lambda1_hat,
            est.lambda1_se,
            est.phi_hat,
            est.hyperbolic_fraction,
            llt={
                "a1": a1,
                "a2": a2,
                "empirical": empirical,
                "theoretical": theoretical,
            },
        ),
        out,
    )


@cli.command("lil")
@_group_options
@click.option("--nmax", default=100_000, show_default=True, type=int)
@click.option("--stride", default=1, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option(
    "--lambda1",
    "lambda1_opt",
    type=float,
    default=None,
    help="Use this drift instead of estimating it from an auxiliary batch.",
)
@click.option("--phi", "phi_opt", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def lil_cmd(group_spec, weights, nmax, stride, seed, lambda1_opt, phi_opt, out):
    """Run one long walk and emit the iterated-logarithm normalization
    (log_norm - lambda1*n)/sqrt(2*phi*n*loglog n) as plot-ready CSV."""
    gens, label = _resolve_group(group_spec)
    law = _resolve_law(weights, gens.k)
    lam, phi = lambda1_opt, phi_opt
    if lam is None or phi is None:
        aux = walk.simulate_batch(gens, law, 400, DEFAULT_SAMPLES, seed)
        est = stats.estimate_laws(aux)
        lam = est.lambda1_hat if lam is None else lam
        phi = est.phi_hat if phi is None else phi
    traj = walk.simulate_path(gens, law, nmax, seed, checkpoint_stride=stride)
    values = stats.lil_normalize(traj, lam, phi)
    lines = ["n,value"]
    lines.extend(f"{n},{v:.17g}" for n, v in values)
    body = "\n".join(lines)
    if out:
        Path(out).write_text(body + "\n")
        summary = {
            "group": label,
            "nmax": nmax,
            "seed": seed,
            "lambda1": lam,
            "phi": phi,
            "checkpoints": len(values),
            "max_abs_value": max((abs(v) for _, v in values), default=None),
            "failed": traj.failed,
        }
        click.echo(stats._json_value(summary))
    else:
        click.echo(body)


@cli.command("exact")
@_group_options
@click.option("--n", "n_steps", default=6, show_default=True, type=int)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def exact_cmd(group_spec, weights, n_steps, out):
    """Enumerate all k^n words and print the exact observable distribution."""
    gens, label = _resolve_group(group_spec)
    law = _resolve_law(weights, gens.k)
    dist = stats.exact_distribution(gens, law, n_steps)
    obj = {
        "group": label,
        "n": dist.n,
        "mean_log_norm": dist.mean_log_norm(),
        "var_log_norm": dist.var_log_norm(),
        "hyperbolic_fraction": dist.hyperbolic_fraction(),
        "atoms": [
            {
                "log_norm": a.log_norm,
                "trace_sign": a.trace_sign,
                "log_abs_trace": a.log_abs_trace,
                "class": a.cls.value,
                "probability": a.probability,
            }
            for a in dist.atoms
        ],
    }
    _emit(stats._json_value(obj), out)


@cli.command("pants")
@click.option("--l1", type=float, required=True)
@click.option("--l2", type=float, required=True)
@click.option("--l3", type=float, required=True)
@click.option(
    "--include-inverses/--no-inverses",
    "include_inverses",
    default=True,
    show_default=True,
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False),
    default=None,
    help="Write the group config JSON here.",
)
@_guarded
def pants_cmd(l1, l2, l3, include_inverses, out):
    """Construct pair-of-pants generators and print matrices and traces."""
    gens = groups.pants(l1, l2, l3, include_inverses)
    x, y = gens.mats[0], gens.mats[1]
    xy = mat_mul(x, y)
    for name, m in (("X", x), ("Y", y)):
        click.echo(
            f"{name} = [[{m.a:.17g}, {m.b:.17g}], [{m.c:.17g}, {m.d:.17g}]]"
        )
    click.echo(f"tr X = {trace(x):.17g}")
    click.echo(f"tr Y = {trace(y):.17g}")
    click.echo(f"tr XY = {trace(xy):.17g}")
    if out:
        Path(out).write_text(groups.dump_config(gens) + "\n")


@cli.command("conj-clm")
@click.option("--l1", type=float, required=True)
@click.option("--l2", type=float, required=True)
@click.option("--l3", type=float, required=True)
@click.option("--n", "n_length", default=DEFAULT_STEPS, show_default=True, type=int)
@click.option("--N", "n_samples", default=DEFAULT_SAMPLES, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def conj_clm_cmd(l1, l2, l3, n_length, n_samples, seed, out):
    """Sample uniform cyclically reduced words of length n in the pants group
    and emit their normalized geometric lengths (geom - kappa_hat*n)/sqrt(n)."""
    gens = groups.pants(l1, l2, l3, True)
    label = f"pants:{l1:g},{l2:g},{l3:g}"
    rank = 2
    rows = []
    for i in range(n_samples):
        stream = SplitMix64.for_sample(seed, i)
        w = words.sample_cyclic_reduced(rank, n_length, stream)
        g = words.evaluate(w, gens)
        _, _, _, cls, geom = observe(g)
        if cls is not ElementClass.HYPERBOLIC:
            continue  # unreachable in a free pants group; kept defensive
        rows.append((i, geom))
    if len(rows) < 2:
        raise EmptyInput("too few hyperbolic samples")
    geoms = np.asarray([g for _, g in rows])
    kappa = float(np.mean(geoms)) / n_length
    nu = float(np.var(geoms, ddof=1)) / n_length
    normalized = (geoms - kappa * n_length) / math.sqrt(n_length)
    lines = ["index,n,geom_length,normalized"]
    lines.extend(
        f"{i},{n_length},{g:.17g},{z:.17g}"
        for (i, g), z in zip(rows, normalized.tolist())
    )
    body = "\n".join(lines)
    summary = {
        "group": label,
        "n": n_length,
        "N": n_samples,
        "seed": seed,
        "kappa_hat": kappa,
        "nu_hat": nu,
        "ks_normal": stats._ks_against_normal(normalized, nu) if nu > 0 else None,
        "samples_used": len(rows),
    }
    if out:
        Path(out).write_text(body + "\n")
        click.echo(stats._json_value(summary))
    else:
        click.echo(body)


def main(argv=None) -> int:
    """Entry point returning the exit code (0/1/2/3)."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
        return rv if isinstance(rv, int) else 0
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.UsageError as e:
        e.show()
        return 2
    except click.Abort:
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
