from __future__ import annotations

import io
import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, List, Optional, Sequence

import numpy as np
import typer
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from ptqm.acceptability import AcceptanceConfig, MetricOperator, accept
from ptqm.errors import NotAcceptableError, PTQMError, SchemaError
from ptqm.evolution import EvolutionConfig, brach_sweep, evolve, oscillator_levels
from ptqm.formats import (
    RunManifest,
    complex_pairs,
    dumps,
    file_digest,
    load_matrix,
    load_vector,
    matrix_to_dict,
    vector_to_dict,
    write_csv,
)
from ptqm.hermitize import BasisChange, hermitize, to_nonorthogonal
from ptqm.ptsym import ParityOperator, pt_residual
from ptqm.repro import SUITES, SuiteResult, run_all, run_suite
from ptqm.settings import CLUSTER_TOL, DEFAULT_COND_CAP, DEFAULT_RTOL, DEFAULT_TOL, default_seed

app = typer.Typer(add_completion=False, help="Non-Hermitian quantum mechanics as ordinary QM in a non-orthogonal basis.")
demo_app = typer.Typer(add_completion=False, help="Worked demonstrations.")
app.add_typer(demo_app, name="demo")

NEGATIVE = 2
console = Console(stderr=True)
log = logging.getLogger("ptqm")

# typer re-exports BadParameter but not the ClickException it derives from
ClickException = next(cls for cls in typer.BadParameter.__mro__ if cls.__name__ == "ClickException")

ACCEPT_DEFAULTS = AcceptanceConfig.model_fields
EVOLVE_DEFAULTS = EvolutionConfig.model_fields


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


class Run:
    """Collects outputs of one command: stdout by default, files plus manifest.json under --out-dir."""

    def __init__(self, command: str, out_dir: Optional[Path]) -> None:
        self.out_dir = out_dir
        self.manifest = RunManifest(command=command)
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)

    def input(self, name: str, path: Path) -> Path:
        self.manifest.inputs[name] = file_digest(path)
        return path

    def configure(self, config: BaseModel, seed: Optional[int] = None) -> None:
        self.manifest.config.update(config.model_dump(exclude={"seed"}))
        if seed is not None:
            self.manifest.seed = seed

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        started = time.perf_counter()
        try:
            yield
        finally:
            self.manifest.timings[name] = time.perf_counter() - started

    def emit_json(self, name: str, data: Any) -> None:
        if self.out_dir is None:
            typer.echo(dumps(data), nl=False)
            return
        path = self.out_dir / f"{name}.json"
        path.write_text(dumps(data))
        self.manifest.outputs.append(path.name)

    def emit_csv(self, name: str, records: Sequence[BaseModel]) -> None:
        if self.out_dir is None:
            buf = io.StringIO()
            write_csv(buf, records)
            typer.echo(buf.getvalue(), nl=False)
            return
        path = self.out_dir / f"{name}.csv"
        write_csv(path, records)
        self.manifest.outputs.append(path.name)

    def finish(self, negative: bool = False) -> None:
        if self.out_dir is not None:
            self.manifest.write(self.out_dir / "manifest.json")
            log.info("%s: wrote %s to %s", self.manifest.command, ", ".join(self.manifest.outputs), self.out_dir)
        if negative:
            raise typer.Exit(code=NEGATIVE)


def _run(ctx: typer.Context, command: str) -> Run:
    out_dir = ctx.obj.get("out_dir") if ctx.obj else None
    return Run(command, out_dir)


@app.callback()
def main(
    ctx: typer.Context,
    out_dir: Optional[Path] = typer.Option(None, "--out-dir", help="Write outputs and manifest.json here instead of stdout"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging to stderr"),
) -> None:
    _setup_logging(verbose)
    ctx.obj = {"out_dir": out_dir}


@app.command("check-pt")
def check_pt(
    ctx: typer.Context,
    h: Path = typer.Option(..., "--h", help="Hamiltonian JSON"),
    p: Path = typer.Option(..., "--p", help="Parity operator JSON"),
    tol: float = typer.Option(DEFAULT_RTOL, help="Relative tolerance on ||H - P conj(H) P||_F"),
) -> None:
    """Test H = P conj(H) P. Exit 2 when it fails."""
    run = _run(ctx, "check-pt")
    matrix = load_matrix(run.input("h", h))
    parity = ParityOperator(load_matrix(run.input("p", p)))
    residual = pt_residual(matrix, parity)
    satisfies = residual <= tol
    run.manifest.config["tol"] = tol
    run.emit_json("check_pt", {"satisfies": satisfies, "residual": residual})
    run.finish(negative=not satisfies)


def _acceptance(
    tol: float,
    cond_cap: float,
    cluster_tol: float,
    herm_tol: float,
    prob_tol: float,
    t_max: float,
    t_points: int,
    n_states: int,
    seed: Optional[int],
) -> AcceptanceConfig:
    return AcceptanceConfig(
        tol=tol,
        cond_cap=cond_cap,
        cluster_tol=cluster_tol,
        herm_tol=herm_tol,
        prob_tol=prob_tol,
        t_max=t_max,
        t_points=t_points,
        n_states=n_states,
        seed=default_seed() if seed is None else seed,
    )


@app.command("accept")
def accept_cmd(
    ctx: typer.Context,
    h: Path = typer.Option(..., "--h", help="Hamiltonian JSON"),
    tol: float = typer.Option(DEFAULT_RTOL, help="Real-spectrum tolerance"),
    cond_cap: float = typer.Option(DEFAULT_COND_CAP, "--cond-cap", help="Largest eigenvector-matrix condition number"),
    cluster_tol: float = typer.Option(CLUSTER_TOL, "--cluster-tol", help="Eigenvalues closer than this share an eigenspace"),
    herm_tol: float = typer.Option(DEFAULT_TOL, "--herm-tol", help="Tolerance on ||C H - H^dagger C||_F"),
    prob_tol: float = typer.Option(DEFAULT_TOL, "--prob-tol", help="Probability conservation tolerance"),
    t_max: float = typer.Option(ACCEPT_DEFAULTS["t_max"].default, "--t-max", help="Last time of the conservation check"),
    t_points: int = typer.Option(ACCEPT_DEFAULTS["t_points"].default, "--t-points", help="Times sampled in [0, t_max]"),
    n_states: int = typer.Option(ACCEPT_DEFAULTS["n_states"].default, "--n-states", help="Random probe states"),
    seed: Optional[int] = typer.Option(None, help="Seed for probe states (default: $PTQM_SEED or 0)"),
) -> None:
    """Run the four acceptability criteria. Exit 2 when rejected."""
    run = _run(ctx, "accept")
    config = _acceptance(tol, cond_cap, cluster_tol, herm_tol, prob_tol, t_max, t_points, n_states, seed)
    run.configure(config, seed=config.seed)
    matrix = load_matrix(run.input("h", h))
    with run.stage("accept"):
        report = accept(matrix, config)
    run.emit_json("report", report.to_dict())
    if not report.accepted:
        console.print(f"[yellow]rejected:[/] {escape(', '.join(report.reasons))}", soft_wrap=True)
    run.finish(negative=not report.accepted)


@app.command("hermitize")
def hermitize_cmd(
    ctx: typer.Context,
    h: Path = typer.Option(..., "--h", help="Hamiltonian JSON"),
    tol: float = typer.Option(DEFAULT_RTOL, help="Real-spectrum tolerance"),
    cond_cap: float = typer.Option(DEFAULT_COND_CAP, "--cond-cap", help="Largest eigenvector-matrix condition number"),
    cluster_tol: float = typer.Option(CLUSTER_TOL, "--cluster-tol", help="Eigenvalues closer than this share an eigenspace"),
    herm_tol: float = typer.Option(DEFAULT_TOL, "--herm-tol", help="Tolerance on ||C H - H^dagger C||_F"),
    prob_tol: float = typer.Option(DEFAULT_TOL, "--prob-tol", help="Probability conservation tolerance"),
    t_max: float = typer.Option(ACCEPT_DEFAULTS["t_max"].default, "--t-max", help="Last time of the conservation check"),
    t_points: int = typer.Option(ACCEPT_DEFAULTS["t_points"].default, "--t-points", help="Times sampled in [0, t_max]"),
    n_states: int = typer.Option(ACCEPT_DEFAULTS["n_states"].default, "--n-states", help="Random probe states"),
    seed: Optional[int] = typer.Option(None, help="Seed for probe states"),
) -> None:
    """Write an accepted H as a Hermitian one in a non-orthogonal basis."""
    run = _run(ctx, "hermitize")
    config = _acceptance(tol, cond_cap, cluster_tol, herm_tol, prob_tol, t_max, t_points, n_states, seed)
    run.configure(config, seed=config.seed)
    matrix = load_matrix(run.input("h", h))
    with run.stage("hermitize"):
        try:
            pair = hermitize(matrix, config)
        except NotAcceptableError as exc:
            console.print(f"[yellow]not acceptable:[/] {escape(', '.join(exc.reasons))}", soft_wrap=True)
            run.finish(negative=True)
            return
    run.emit_json(
        "hermitize",
        {
            "h_herm": matrix_to_dict(pair.h_herm),
            "b": matrix_to_dict(pair.basis.b),
            "b_inv": matrix_to_dict(pair.basis.b_inv),
            "metric": matrix_to_dict(pair.metric.c),
            "residuals": pair.residuals(),
        },
    )
    run.finish()


@app.command("transform")
def transform_cmd(
    ctx: typer.Context,
    h: Path = typer.Option(..., "--h", help="Hermitian Hamiltonian JSON"),
    b: Path = typer.Option(..., "--b", help="Basis change JSON (columns are the new basis vectors)"),
) -> None:
    """Rewrite a Hermitian H in the basis b: H' = b^-1 H b with metric b^dagger b."""
    run = _run(ctx, "transform")
    matrix = load_matrix(run.input("h", h))
    basis = BasisChange.from_matrix(load_matrix(run.input("b", b)))
    h_prime, metric = to_nonorthogonal(matrix, basis)
    run.emit_json("transform", {"h_prime": matrix_to_dict(h_prime), "metric": matrix_to_dict(metric.c)})
    run.finish()


@app.command("evolve")
def evolve_cmd(
    ctx: typer.Context,
    h: Path = typer.Option(..., "--h", help="Hamiltonian JSON"),
    psi0: Path = typer.Option(..., "--psi0", help="Initial state JSON"),
    t: float = typer.Option(..., "--t", help="Evolution time"),
    c: Optional[Path] = typer.Option(None, "--c", help="Metric JSON (identity when omitted)"),
    hbar: float = typer.Option(1.0, help="Reduced Planck constant"),
) -> None:
    """psi(t) = exp(-i H t / hbar) psi0, with its norm in the metric."""
    run = _run(ctx, "evolve")
    matrix = load_matrix(run.input("h", h))
    state = load_vector(run.input("psi0", psi0))
    metric = MetricOperator(load_matrix(run.input("c", c))) if c is not None else MetricOperator.identity(matrix.shape[0])
    psi_t = evolve(matrix, state, t, hbar)
    run.manifest.config.update({"t": t, "hbar": hbar})
    run.emit_json(
        "state",
        {
            "t": t,
            "state": vector_to_dict(psi_t),
            "norm": metric.inner(psi_t, psi_t).real,
            "initial_norm": metric.inner(state, state).real,
        },
    )
    run.finish()


def _parse_alphas(spec: str) -> List[float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise SchemaError("expected a0:a1:n", field="--alphas")
    try:
        a0, a1, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise SchemaError(f"cannot parse {spec!r} as a0:a1:n", field="--alphas") from exc
    if n < 1:
        raise SchemaError("n must be at least 1", field="--alphas")
    return np.linspace(a0, a1, n).tolist()


@app.command("brach")
def brach_cmd(
    ctx: typer.Context,
    epsilon: float = typer.Option(1.0, help="Field strength; H = epsilon sigma_x"),
    alphas: str = typer.Option("0.01:0.76:76", help="Basis parameters as a0:a1:n"),
    hbar: float = typer.Option(1.0, help="Reduced Planck constant"),
    t_max: Optional[float] = typer.Option(None, "--t-max", help="Search horizon (default: one spectral period)"),
    grid_points: int = typer.Option(EVOLVE_DEFAULTS["grid_points"].default, "--grid-points", help="First-passage scan resolution"),
    root_polish_tol: float = typer.Option(EVOLVE_DEFAULTS["root_polish_tol"].default, "--root-polish-tol", help="Absolute tolerance on the passage time"),
    fidelity_tol: float = typer.Option(EVOLVE_DEFAULTS["fidelity_tol"].default, "--fidelity-tol", help="F >= 1 - fidelity_tol counts as arrival"),
    coarse_threshold: float = typer.Option(EVOLVE_DEFAULTS["coarse_threshold"].default, "--coarse-threshold", help="Grid maxima below 1 - threshold are skipped"),
    cond_cap: float = typer.Option(DEFAULT_COND_CAP, "--cond-cap", help="Largest allowed cond(B)"),
    alpha_margin: float = typer.Option(EVOLVE_DEFAULTS["alpha_margin"].default, "--alpha-margin", help="Keep alpha <= pi/4 - margin"),
    workers: int = typer.Option(1, help="Worker processes for the sweep"),
) -> None:
    """Brachistochrone sweep over alpha as CSV."""
    run = _run(ctx, "brach")
    config = EvolutionConfig(
        hbar=hbar,
        t_max=t_max,
        grid_points=grid_points,
        root_polish_tol=root_polish_tol,
        fidelity_tol=fidelity_tol,
        coarse_threshold=coarse_threshold,
        cond_cap=cond_cap,
        alpha_margin=alpha_margin,
    )
    run.configure(config)
    run.manifest.config.update({"epsilon": epsilon, "alphas": alphas, "workers": workers})
    with run.stage("sweep"):
        records = brach_sweep(epsilon, _parse_alphas(alphas), config, workers=workers)
    run.emit_csv("brach", records)
    run.finish()


@demo_app.command("shifted-osc")
def shifted_osc(
    ctx: typer.Context,
    nmax: int = typer.Option(64, "--nmax", help="Number states kept in the truncation"),
    n_lowest: Optional[int] = typer.Option(None, "--n-lowest", help="Levels to report (default ceil(nmax/8))"),
) -> None:
    """Lowest levels of p^2/2 + x^2/2 + i x against the exact spectrum n + 1."""
    run = _run(ctx, "demo shifted-osc")
    run.manifest.config.update({"nmax": nmax, "n_lowest": n_lowest})
    levels = oscillator_levels(nmax, n_lowest)
    run.emit_json(
        "shifted_osc",
        {
            "n_max": levels.n_max,
            "values": complex_pairs(levels.values),
            "errors": levels.errors.tolist(),
            "max_imag": levels.max_imag,
            "residual": levels.residual,
        },
    )
    run.finish()


def _print_checks(results: Sequence[SuiteResult]) -> None:
    table = Table(title="reproduction checks")
    table.add_column("suite")
    table.add_column("check")
    table.add_column("result")
    table.add_column("detail", overflow="fold")
    for result in results:
        for check in result.checks:
            mark = "[green]ok[/]" if check.passed else "[red]FAIL[/]"
            table.add_row(result.suite, check.name, mark, check.detail)
    console.print(table)


@app.command("repro")
def repro_cmd(
    ctx: typer.Context,
    name: str = typer.Argument(..., help=f"One of: {', '.join([*SUITES, 'all'])}"),
    alpha: float = typer.Option(0.3, help="Basis parameter for spin-half"),
    epsilon: float = typer.Option(1.0, help="Field strength for spin-half and brachistochrone"),
    count: int = typer.Option(200, help="Random Hamiltonians for equivalence"),
    seed: Optional[int] = typer.Option(None, help="Seed for equivalence (default: $PTQM_SEED or 0)"),
) -> None:
    """Re-run a worked example and check it. Exit 2 when any check fails."""
    if name != "all" and name not in SUITES:
        raise typer.BadParameter(f"unknown suite {name!r}", param_hint="NAME")
    run = _run(ctx, f"repro {name}")
    seed = default_seed() if seed is None else seed
    run.manifest.seed = seed
    run.manifest.config.update({"alpha": alpha, "epsilon": epsilon, "count": count})
    with run.stage(name):
        if name == "all":
            results = run_all(alpha=alpha, epsilon=epsilon, count=count, seed=seed)
        else:
            results = [run_suite(name, alpha=alpha, epsilon=epsilon, count=count, seed=seed)]
    _print_checks(results)
    if run.out_dir is None:
        # stdout carries one JSON document
        run.emit_json("repro", results[0].to_dict() if name != "all" else [r.to_dict() for r in results])
    else:
        for result in results:
            run.emit_json(result.suite, result.to_dict())
    run.finish(negative=not all(r.passed for r in results))


def _describe(exc: Exception) -> str:
    if isinstance(exc, ValidationError):
        first = exc.errors()[0]
        return f"invalid {'.'.join(str(p) for p in first['loc'])}: {first['msg']}"
    return str(exc)


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command line and return its exit code: 0 success, 2 negative verdict, 1 error."""
    try:
        code = app(args=list(sys.argv[1:] if argv is None else argv), prog_name="ptqm", standalone_mode=False)
    except typer.Exit as exc:
        return exc.exit_code
    except ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except typer.Abort:
        return 1
    except NotAcceptableError as exc:
        console.print(f"[yellow]not acceptable:[/] {escape(str(exc))}", soft_wrap=True)
        return NEGATIVE
    except (PTQMError, ValidationError, OSError) as exc:
        console.print(f"[red]error:[/] {escape(_describe(exc))}", soft_wrap=True)
        return 1
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(dispatch())
