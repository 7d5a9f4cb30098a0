import json
import logging
import sys
from functools import wraps
from typing import Dict, List, Optional, Sequence

import click
from rich.console import Console
from rich.table import Table
from tabulate import tabulate

from classify import (
    free_product_decomposition,
    full_report,
    in_C_rigid,
    isomorphism_obstruction,
    prime_factorization,
)
from config import Caps, settings
from coxeter import (
    growth_counts_bfs,
    growth_counts_transfer,
    hecke_sum_converges,
    transfer_spectral_radius,
)
from documents import InputDocument, parse
from errors import DocumentError, InputError, ResourceCapError
from fock import build_space, model_for
from fock_checks import verify_commutator_star, verify_expectation_triple, verify_iterated_expectation
from graph_core import core_reconstruction, link, sort_vertices, star
from reports import TOOL_VERSION, build_report, emit, input_digest

logger = logging.getLogger(__name__)

console = Console(stderr=True)

COMMANDS = ("analyze", "rigid", "core", "components", "hecke-growth", "fock-verify", "isocheck")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAP = 3


def resolve_caps(doc: InputDocument, flags: Optional[Dict[str, Optional[int]]] = None) -> Caps:
    """Flags beat document options, which beat GPFACTOR_CAPS and the individual settings."""
    return settings.resolved_caps().override(**doc.options.caps()).override(**(flags or {}))


def _assume_ii1(doc: InputDocument, flag: Optional[bool]) -> Optional[bool]:
    return flag if flag is not None else doc.options.assume_II1_factor


def _subset(doc: InputDocument, raw: Optional[str], default: Sequence[str]) -> List[str]:
    if raw is None:
        return list(default)
    members = [part.strip() for part in raw.split(",") if part.strip()]
    return list(sort_vertices(doc.graph().check_vertices(members)))


def _load_q_file(path: str) -> Dict[str, float]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise InputError(f"cannot read q file '{path}': {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw.values()):
        raise InputError(f"{path}: expected an object mapping vertex ids to numbers")
    return {str(k): float(v) for k, v in raw.items()}


# Command bodies

def _analyze(doc: InputDocument, caps: Caps, assume_ii1: Optional[bool] = None, **_) -> dict:
    g, desc = doc.graph(), doc.descriptors()
    report = full_report(g, desc, _assume_ii1(doc, assume_ii1), caps.sweep_cap)
    result = report.to_dict()
    result["vertex_algebras"] = {v: desc[v].to_dict() for v in g.vertices}
    result["consistency_problems"] = report.consistency_problems()
    return result


def _rigid(doc: InputDocument, caps: Caps, **_) -> dict:
    g = doc.graph()
    failures = {}
    for v in g.vertices:
        back = link(g, link(g, {v})).members
        if back != {v}:
            failures[v] = list(sort_vertices(back))
    return {
        "rigid": not failures,
        "double_links": failures,
        "in_C_rigid": in_C_rigid(g, doc.descriptors()).to_dict(),
    }


def _core(doc: InputDocument, caps: Caps, **_) -> dict:
    g = doc.graph()
    rebuilt = core_reconstruction(g)
    return {
        "core": {
            "vertices": list(rebuilt.core.vertices),
            "edges": [list(e) for e in rebuilt.core.sorted_edges()],
        },
        "classes": dict(sorted(rebuilt.classes.items())),
        "part_sizes": {c: len(part) for c, part in sorted(rebuilt.parts.items())},
        "reconstruction_valid": rebuilt.witness.is_valid(),
        "witness": dict(sorted(rebuilt.witness.as_dict().items())),
    }


def _components(doc: InputDocument, caps: Caps, **_) -> dict:
    g, desc = doc.graph(), doc.descriptors()
    return {
        "irreducible_components": [r.to_dict() for r in prime_factorization(g, desc)],
        "connected_components": [r.to_dict() for r in free_product_decomposition(g, desc)],
    }


def _hecke_growth(doc: InputDocument, caps: Caps, max_len: int = 10, q_file: Optional[str] = None, **_) -> dict:
    g, desc = doc.graph(), doc.descriptors()
    if max_len < 0:
        raise InputError("--max-len must be non-negative")
    if q_file is not None:
        q = _load_q_file(q_file)
        source = "q file"
    elif g.vertices and all(desc[v].hecke_q is not None for v in g.vertices):
        q = {v: desc[v].hecke_q for v in g.vertices}
        source = "vertex descriptors"
    else:
        q = {}
        source = "q ≡ 1"
    bfs = growth_counts_bfs(g, max_len, caps.enumeration_cap)
    transfer = growth_counts_transfer(g, max_len, q)
    unweighted = growth_counts_transfer(g, max_len)
    return {
        "max_length": max_len,
        "q": {v: q.get(v, 1.0) for v in g.vertices},
        "q_source": source,
        "counts": list(bfs.counts),
        "weighted_sums": list(transfer.weighted),
        "counts_agree": bfs.counts == unweighted.counts,
        "spectral_radius": transfer_spectral_radius(g, q),
        "converges": hecke_sum_converges(g, q).to_dict(),
    }


def _fock_verify(
    doc: InputDocument,
    caps: Caps,
    depth: int = 3,
    trials: int = 20,
    seed: int = 0,
    tol: Optional[float] = None,
    workers: int = 1,
    gamma1: Optional[str] = None,
    gamma2: Optional[str] = None,
    stand_in_dim: int = 2,
    vertex: Optional[str] = None,
    **_,
) -> dict:
    g, desc = doc.graph(), doc.descriptors()
    if not g.vertices:
        raise InputError("fock verification needs at least one vertex")
    if stand_in_dim < 2:
        raise InputError("--stand-in-dim must be at least 2")
    v = vertex if vertex is not None else g.vertices[0]
    if v not in g:
        raise InputError(f"unknown vertex id '{v}'")
    g1 = _subset(doc, gamma1, star(g, v).sorted())
    g2 = _subset(doc, gamma2, [w for w in g.vertices if w != v])
    models = {w: model_for(desc[w], stand_in_dim) for w in g.vertices}
    space = build_space(g, models, depth, caps.fock_dimension_cap, caps.enumeration_cap)
    options = dict(trials=trials, seed=seed, tol=tol, workers=workers)
    checks = [
        verify_expectation_triple(space, g1, g2, **options).to_dict(),
        verify_iterated_expectation(space, g1, g2, **options).to_dict(),
    ]
    skipped = []
    if depth < 2:
        skipped.append({"identity": "commutator_star", "reason": "depth below 2"})
    elif not space.tracial:
        skipped.append({"identity": "commutator_star", "reason": "non-tracial vertex states"})
    else:
        checks.append(verify_commutator_star(space, v, **options).to_dict())
    return {
        "space": {
            "depth": depth,
            "dimension": space.dimension,
            "models": {
                w: {"dimension": m.dimension, "tracial": m.is_tracial, "commutative": m.commutative}
                for w, m in models.items()
            },
        },
        "checks": checks,
        "skipped": skipped,
        "passed": all(check["passed"] for check in checks),
    }


def _isocheck(doc: InputDocument, caps: Caps, other: Optional[InputDocument] = None, **_) -> dict:
    if other is None:
        raise InputError("isocheck needs two input documents")
    result = isomorphism_obstruction(doc.graph(), doc.descriptors(), other.graph(), other.descriptors())
    return result.to_dict()


_RUNNERS = {
    "analyze": _analyze,
    "rigid": _rigid,
    "core": _core,
    "components": _components,
    "hecke-growth": _hecke_growth,
    "fock-verify": _fock_verify,
    "isocheck": _isocheck,
}


def run(command: str, doc: InputDocument, caps: Optional[Caps] = None, **options) -> dict:
    """Run one command on a parsed document and return its result payload."""
    if command not in _RUNNERS:
        raise InputError(f"unknown command '{command}' (expected one of {', '.join(COMMANDS)})")
    caps = resolve_caps(doc) if caps is None else caps
    logger.info(f"🚀 running {command}")
    return _RUNNERS[command](doc, caps, **options)


# Output helpers

def _display_summary(command: str, result: dict) -> None:
    """Key facts of a result as a rich table on stderr."""
    table = Table(title=f"gpfactor {command}")
    table.add_column("Field", style="cyan")
    table.add_column("Value", style="magenta")
    if command == "analyze":
        for name, verdict in result["properties"].items():
            table.add_row(name, f"{verdict['verdict']}  ({verdict['provenance']})")
    elif command == "fock-verify":
        for check in result["checks"]:
            mark = "✅" if check["passed"] else "❌"
            table.add_row(check["identity"], f"{mark} max residual {check['max_residual']:.3e}")
    else:
        for key, value in result.items():
            if isinstance(value, (str, int, float, bool)):
                table.add_row(key, str(value))
            elif isinstance(value, list):
                table.add_row(key, f"{len(value)} entries")
    console.print(table)


def _display_growth(result: dict) -> None:
    rows = [
        (n, count, weighted)
        for n, (count, weighted) in enumerate(zip(result["counts"], result["weighted_sums"]))
    ]
    click.echo(tabulate(rows, headers=["length", "elements", "Σ q_w"], floatfmt=".6g"), err=True)


def guarded(func):
    """Map library errors to the documented exit codes."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except DocumentError as exc:
            for message in exc.errors:
                console.print(f"[red]❌ {message}[/red]")
            sys.exit(EXIT_INPUT)
        except InputError as exc:
            console.print(f"[red]❌ {exc}[/red]")
            sys.exit(EXIT_INPUT)
        except ResourceCapError as exc:
            console.print(f"[red]⛔ {exc}[/red]")
            sys.exit(EXIT_CAP)
    return wrapper


def _execute(ctx: click.Context, command: str, source, summary: bool, **options) -> dict:
    data = source.read()
    doc = parse(data)
    caps = resolve_caps(doc, ctx.obj["caps"])
    result = run(command, doc, caps, **options)
    click.echo(emit(build_report(command, result, input_digest(data))), nl=False)
    if summary:
        _display_summary(command, result)
    return result


input_argument = click.argument("source", type=click.File("rb"))
summary_option = click.option("--summary", is_flag=True, help="Print a summary table on stderr")


@click.group()
@click.version_option(version=TOOL_VERSION)
@click.option("--log-level", default=None, help=f"Logging level (default {settings.log_level})")
@click.option("--enumeration-cap", type=click.IntRange(min=1), default=None,
              help=f"Maximum number of group elements enumerated (default {settings.enumeration_cap})")
@click.option("--fock-dimension-cap", type=click.IntRange(min=1), default=None,
              help=f"Maximum truncated Fock space dimension (default {settings.fock_dimension_cap})")
@click.option("--sweep-cap", type=click.IntRange(min=1), default=None,
              help=f"Maximum graph size for subgraph sweeps (default {settings.sweep_cap})")
@click.pass_context
def cli(ctx, log_level, enumeration_cap, fock_dimension_cap, sweep_cap):
    """gpfactor - structural analysis of graph products of von Neumann algebras.

    Reports go to stdout as canonical JSON; diagnostics go to stderr.
    Exit status: 0 success, 2 invalid input, 3 resource cap exceeded.
    """
    from main import setup_logging

    setup_logging(log_level or settings.log_level)
    ctx.ensure_object(dict)
    ctx.obj["caps"] = {
        "enumeration_cap": enumeration_cap,
        "fock_dimension_cap": fock_dimension_cap,
        "sweep_cap": sweep_cap,
    }


@cli.command()
@input_argument
@click.option("--assume-ii1/--no-assume-ii1", "assume_ii1", default=None,
              help="Override the II1-factor verdict of the graph product")
@summary_option
@click.pass_context
@guarded
def analyze(ctx, source, assume_ii1, summary):
    """Full structural report: properties, factorizations, core."""
    _execute(ctx, "analyze", source, summary, assume_ii1=assume_ii1)


@cli.command()
@input_argument
@summary_option
@click.pass_context
@guarded
def rigid(ctx, source, summary):
    """Rigidity of the graph and membership in C_Rigid."""
    _execute(ctx, "rigid", source, summary)


@cli.command()
@input_argument
@summary_option
@click.pass_context
@guarded
def core(ctx, source, summary):
    """Core graph and its reconstruction as a graph product of complete graphs."""
    _execute(ctx, "core", source, summary)


@cli.command()
@input_argument
@summary_option
@click.pass_context
@guarded
def components(ctx, source, summary):
    """Tensor (irreducible) and free (connected) decompositions."""
    _execute(ctx, "components", source, summary)


@cli.command("hecke-growth")
@input_argument
@click.option("--max-len", type=int, default=10, show_default=True, help="Largest word length counted")
@click.option("--q-file", type=click.Path(dir_okay=False), default=None,
              help="JSON object mapping vertex ids to Hecke parameters")
@click.option("--table", is_flag=True, help="Print the growth table on stderr")
@summary_option
@click.pass_context
@guarded
def hecke_growth(ctx, source, max_len, q_file, table, summary):
    """Growth series of W_Γ and convergence of the Hecke sum."""
    result = _execute(ctx, "hecke-growth", source, summary, max_len=max_len, q_file=q_file)
    if table:
        _display_growth(result)


@cli.command("fock-verify")
@input_argument
@click.option("--depth", type=int, default=3, show_default=True, help="Truncation depth L")
@click.option("--trials", type=click.IntRange(min=1), default=20, show_default=True, help="Random trials per identity")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed of the trial seed sequence")
@click.option("--tol", type=float, default=None, help=f"Residual tolerance (default {settings.tolerance:g})")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True, help="Parallel trial workers")
@click.option("--gamma1", default=None, help="Comma-separated ids of Γ1 (default Star of the vertex)")
@click.option("--gamma2", default=None, help="Comma-separated ids of Γ2 (default all but the vertex)")
@click.option("--stand-in-dim", type=int, default=2, show_default=True,
              help="Dimension of the commutative model used for infinite-dimensional vertices")
@click.option("--vertex", default=None, help="Vertex v for the commutator check (default first vertex)")
@summary_option
@click.pass_context
@guarded
def fock_verify(ctx, source, summary, **options):
    """Numerically check expectation and commutator identities on a truncated Fock space."""
    _execute(ctx, "fock-verify", source, summary, **options)


@cli.command()
@click.argument("first", type=click.File("rb"))
@click.argument("second", type=click.File("rb"))
@summary_option
@click.pass_context
@guarded
def isocheck(ctx, first, second, summary):
    """Graph-level isomorphism obstruction between two graph products."""
    data_a, data_b = first.read(), second.read()
    doc_a, doc_b = parse(data_a), parse(data_b)
    caps = resolve_caps(doc_a, ctx.obj["caps"])
    result = run("isocheck", doc_a, caps, other=doc_b)
    result["inputs"] = [input_digest(data_a), input_digest(data_b)]
    click.echo(emit(build_report("isocheck", result, input_digest(data_a + b"\n" + data_b))), nl=False)
    if summary:
        _display_summary("isocheck", result)


if __name__ == "__main__":
    cli()
