"""Command line interface for minram."""

import json
import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import typer
from pydantic import BaseModel, ValidationError
from rich.console import Console

from .arith import prime_divisors
from .certify import certify_polynomial, frobenius_statistics, verify_realization
from .config import Settings, load_settings
from .cyclotomic import realize_abelian
from .errors import CertificateError, MinramError
from .group_core import (
    bound_table,
    boston_bound,
    central_tower_plan,
    check_consistency,
    load_group,
    nilpotent_invariants,
    nilpotent_series,
    ramification_bound,
    sgl3_family,
)
from .models import (
    AbelianRealization,
    CommandResult,
    NilpotentGroup,
    ScholzCertificate,
    ScholzConstraints,
)
from .quadfield import field_data
from .scholz_planner import ScholzPlanner, verify_certificate

app = typer.Typer(
    name="minram",
    help="Minimal-ramification bounds, Scholz prime systems and certified abelian fields.",
    no_args_is_help=True,
)

# Status lines go to stderr; stdout carries only the JSON result
console = Console(stderr=True)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


@app.callback()
def main(
    ctx: typer.Context,
    limit: Optional[int] = typer.Option(
        None, "--limit", min=2, help="Upper bound for every prime scan (env MINRAM_LIMIT)"
    ),
    jobs: Optional[int] = typer.Option(
        None, "--jobs", min=1, help="Worker threads for prime scans (env MINRAM_JOBS)"
    ),
    log_level: Optional[str] = typer.Option(
        None, "--log-level", help="Logging level (env MINRAM_LOG_LEVEL)"
    ),
):
    """Compute ramification bounds and certify the prime systems behind them."""
    try:
        settings = load_settings(scan_limit=limit, jobs=jobs, log_level=log_level)
    except (MinramError, ValidationError) as e:
        console.print(f"[red]Invalid settings: {e}[/]")
        raise typer.Exit(code=1)
    if not isinstance(logging.getLevelName(settings.log_level), int):
        raise typer.BadParameter(
            f"Unknown log level {settings.log_level}", param_hint="--log-level"
        )

    logging.basicConfig(
        level=settings.log_level,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )
    ctx.obj = settings


@contextmanager
def domain_errors() -> Iterator[None]:
    """Turn library errors into a red message and exit code 1."""
    try:
        yield
    except MinramError as e:
        logger.error(e.message)
        console.print(f"[red]Error: {e.message}[/]")
        raise typer.Exit(code=1)


def _settings(ctx: typer.Context) -> Settings:
    return ctx.obj if isinstance(ctx.obj, Settings) else load_settings()


def _dump(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json", by_alias=True)
    if isinstance(value, dict):
        return {str(k): _dump(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_dump(v) for v in value]
    return value


def emit(command: str, inputs: Dict[str, Any], payload: Dict[str, Any], started: float) -> None:
    result = CommandResult(
        command=command,
        inputs=inputs,
        payload=_dump(payload),
        elapsed_ms=round((time.perf_counter() - started) * 1000, 3),
    )
    typer.echo(result.model_dump_json(by_alias=True))


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text())
    except OSError as e:
        raise MinramError(f"Cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise MinramError(f"{path} is not valid JSON: {e}") from e


def _unwrap(data: Any) -> Any:
    """Accept either a bare object or the CommandResult another command printed."""
    if isinstance(data, dict) and "payload" in data and "command" in data:
        return data["payload"]
    return data


def _load_checked_group(path: Path) -> NilpotentGroup:
    group = load_group(_read_json(path))
    for pc in group.sylows.values():
        check_consistency(pc)
    return group


def _int_list(value: str, option: str) -> List[int]:
    try:
        return [int(part) for part in value.replace(" ", "").split(",") if part]
    except ValueError:
        raise typer.BadParameter(
            f"Expected comma-separated integers, got {value!r}", param_hint=option
        )


def _factor_list(value: str) -> List[int]:
    factors = _int_list(value, "FACTORS")
    if not factors or any(n < 1 for n in factors) or all(n == 1 for n in factors):
        raise typer.BadParameter(
            f"Expected a nontrivial list of positive factors, got {value!r}", param_hint="FACTORS"
        )
    return factors


@app.command()
def bound(
    group_file: Path = typer.Argument(..., help="Group JSON: pc-presentation, sylows or abelian"),
    field: str = typer.Option("Q", "--field", help='"Q", a discriminant or field JSON'),
):
    """Ramification bounds of a nilpotent group over a base field."""
    started = time.perf_counter()
    with domain_errors():
        group = _load_checked_group(group_file)
        base = field_data(field)
        value = ramification_bound(group, base)
        payload = {
            "ramification_bound": value,
            # same value under the key of the published bound schema
            "paper_bound": value,
            "boston_bound": boston_bound(group),
            "invariants": nilpotent_invariants(group),
            "table": bound_table(group, base),
            "series": nilpotent_series(group),
            "plans": {l: central_tower_plan(pc) for l, pc in group.sylows.items()},
            "field": base,
        }
    emit("bound", {"group_file": str(group_file), "field": field}, payload, started)


@app.command("realize-abelian")
def realize_abelian_command(
    ctx: typer.Context,
    factors: str = typer.Argument(..., help="Cyclic factors, e.g. 3,9"),
    scholz: Tuple[int, int] = typer.Option(
        (None, None), "--scholz", help="Impose the l^N-Scholz conditions: --scholz L N"
    ),
):
    """Realize a finite abelian group over Q with exactly d ramified primes."""
    started = time.perf_counter()
    values = _factor_list(factors)
    l, big_n = scholz
    settings = _settings(ctx)
    with domain_errors():
        planner = ScholzPlanner(settings=settings, logger=logger)
        payload: Dict[str, Any] = {}
        if l is not None:
            try:
                constraints = ScholzConstraints(primes=[l], N=big_n, s0=[l])
            except ValidationError as e:
                raise MinramError(f"Invalid Scholz constraints: {e}") from e
            realization, report = planner.find_scholz_abelian(values, constraints)
            payload["scholz"] = report
        else:
            realization = realize_abelian(values, limit=settings.scan_limit, jobs=settings.jobs)
        ramification = verify_realization(realization)
        payload.update(realization=realization, ramification=ramification)
    emit("realize-abelian", {"factors": values, "scholz": [l, big_n]}, payload, started)
    if not ramification.verdict:
        console.print("[red]Ramification check failed[/]")
        raise typer.Exit(code=1)


@app.command()
def certificate(
    ctx: typer.Context,
    group_file: Path = typer.Argument(..., help="Group JSON"),
    field: str = typer.Option("Q", "--field", help='"Q", a discriminant or field JSON'),
    output: Optional[Path] = typer.Option(
        None, "--output", "-o", help="Also write the certificate"
    ),
):
    """Build the Scholz certificate of a nilpotent group."""
    started = time.perf_counter()
    inputs = {"group_file": str(group_file), "field": field}
    with domain_errors():
        group = _load_checked_group(group_file)
        base = field_data(field)
        planner = ScholzPlanner(settings=_settings(ctx), logger=logger)
        try:
            cert = planner.build_certificate(group, base)
        except CertificateError as e:
            emit("certificate", inputs, {"error": e.message, "partial": e.partial}, started)
            raise
    if output is not None:
        output.write_text(cert.model_dump_json(by_alias=True, indent=2))
        console.print(f"[green]Certificate written to {output}[/]")
    emit("certificate", inputs, {"certificate": cert}, started)


@app.command("exceptional-set")
def exceptional_set(
    ctx: typer.Context,
    field: str = typer.Option("Q", "--field", help='"Q", a discriminant or field JSON'),
    primes: str = typer.Option(..., "--primes", help="Primes l the set serves, e.g. 3 or 3,5"),
    big_n: int = typer.Option(1, "--N", min=1, help="Level N of the governing field"),
):
    """Least l^N-exceptional set of a base field."""
    started = time.perf_counter()
    values = _int_list(primes, "--primes")
    with domain_errors():
        base = field_data(field)
        planner = ScholzPlanner(settings=_settings(ctx), logger=logger)
        found = planner.find_exceptional_set(base, values, big_n)
    emit(
        "exceptional-set",
        {"field": field, "primes": values, "N": big_n},
        {"exceptional_set": found, "t_primes": found.t_primes},
        started,
    )


@app.command("scholz-search")
def scholz_search(
    ctx: typer.Context,
    factors: str = typer.Argument(..., help="Cyclic factors of odd order, e.g. 3,3"),
    big_n: int = typer.Option(1, "--N", min=1, help="Scholz level N"),
    s0: str = typer.Option("", "--s0", help="Extra primes that must split completely"),
    t_primes: str = typer.Option("", "--t", help="Exceptional primes that must split completely"),
    inert_disc: Optional[int] = typer.Option(
        None, "--inert-disc", help="Conductors must be inert in Q(sqrt(D))"
    ),
):
    """Least conductors satisfying the l^N-Scholz conditions."""
    started = time.perf_counter()
    values = _factor_list(factors)
    order = 1
    for n in values:
        order *= n
    primes = prime_divisors(order)
    extra = _int_list(s0, "--s0")
    with domain_errors():
        try:
            constraints = ScholzConstraints(
                primes=primes,
                N=big_n,
                s0=sorted(set(primes) | set(extra)),
                t_primes=_int_list(t_primes, "--t"),
                inert_disc=inert_disc,
            )
        except ValidationError as e:
            raise MinramError(f"Invalid Scholz constraints: {e}") from e
        planner = ScholzPlanner(settings=_settings(ctx), logger=logger)
        realization, report = planner.find_scholz_abelian(values, constraints)
    emit(
        "scholz-search",
        {"factors": values, "N": big_n, "s0": constraints.s0, "t": constraints.t_primes},
        {"realization": realization, "constraints": constraints, "report": report},
        started,
    )


@app.command()
def certify(
    target: str = typer.Argument(..., help="Coefficients (constant first) or a realization file"),
    expect: Optional[str] = typer.Option(None, "--expect", help="Expected ramified primes"),
    frobenius: Optional[int] = typer.Option(
        None, "--frobenius", min=100, help="Also compare Frobenius patterns below this bound"
    ),
):
    """Ramified primes of a polynomial or of a realization built by realize-abelian."""
    started = time.perf_counter()
    path = Path(target)
    with domain_errors():
        payload: Dict[str, Any] = {}
        if path.is_file():
            data = _unwrap(_read_json(path))
            if isinstance(data, dict) and "realization" in data:
                data = data["realization"]
            try:
                realization = AbelianRealization.model_validate(data)
            except ValidationError as e:
                raise MinramError(f"{path} does not hold a realization: {e}") from e
            report = verify_realization(realization)
            if frobenius is not None:
                payload["frobenius"] = [
                    frobenius_statistics(spec, frobenius) for spec in realization.specs
                ]
        else:
            expected = _int_list(expect, "--expect") if expect is not None else None
            report = certify_polynomial(_int_list(target, "TARGET"), expected)
        payload["ramification"] = report
    emit("certify", {"target": target, "expect": expect}, payload, started)
    mismatched = any(f.mismatches for f in payload.get("frobenius", []))
    if not report.verdict or mismatched:
        console.print("[red]Certification failed[/]")
        raise typer.Exit(code=1)
    console.print(f"[green]Ramified exactly at {report.ramified_primes}[/]")


@app.command()
def verify(
    certificate_file: Path = typer.Argument(..., help="Certificate JSON (or certificate output)"),
):
    """Replay every condition of a certificate."""
    started = time.perf_counter()
    with domain_errors():
        data = _unwrap(_read_json(certificate_file))
        if isinstance(data, dict) and "certificate" in data:
            data = data["certificate"]
        try:
            cert = ScholzCertificate.model_validate(data)
        except ValidationError as e:
            raise CertificateError(f"Malformed certificate: {e}") from e
        report = verify_certificate(cert)
    emit("verify", {"certificate_file": str(certificate_file)}, {"report": report}, started)
    if not report.passed:
        console.print(f"[red]Verification failed with {len(report.failures)} problems:[/]")
        for failure in report.failures:
            console.print(f"- {failure}")
        raise typer.Exit(code=1)
    console.print(f"[green]Certificate verified: {report.conditions_checked} conditions[/]")


@app.command()
def sgl3(
    ctx: typer.Context,
    n: int = typer.Argument(..., help="Number of generators"),
    l: int = typer.Option(3, "--l", help="Odd prime exponent"),
    with_certificate: bool = typer.Option(
        False, "--certificate/--no-certificate", help="Also build the certificate over Q"
    ),
):
    """Relatively free exponent-l class-2 group on n generators."""
    started = time.perf_counter()
    with domain_errors():
        record = sgl3_family(n, l)
        payload: Dict[str, Any] = {"record": record}
        if with_certificate:
            group = NilpotentGroup.from_sylows(record.group)
            planner = ScholzPlanner(settings=_settings(ctx), logger=logger)
            cert = planner.build_certificate(group, field_data("Q"))
            payload["certificate"] = cert
            payload["matches_expected"] = len(cert.total_ramified) == record.expected_ram
    emit("sgl3", {"n": n, "l": l}, payload, started)


if __name__ == "__main__":
    app()
