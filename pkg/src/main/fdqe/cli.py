"""
CLI

Command line entry point. Decisions, sweeps, embedding enumeration, diagram export and predicate evaluation, each as a
subcommand of one click group.

Results go to stdout (human-readable by default, one JSON document per line with --json); logging and diagnostics go
to stderr. `run()` never lets an exception escape for bad input: every failure becomes a one-line diagnostic and an
`ExitCode`.
"""

import json
import logging as log

import click

from fdqe.algebra import BlockSizes, LanguageVariant, parse_algebra
from fdqe.bratteli import EDGE_STYLES, MultiplicityMatrix, diagrams_to_dot, enumerate_embedding_matrices, to_dot
from fdqe.constants import *
from fdqe.errors import ExitCode, FdqeError, NonConvergenceError, ValidationError
from fdqe.logs import init_logger
from fdqe.numeric import OptimizerConfig, Predicate, check_preservation, rho_min, rho_sim_bounds
from fdqe.qe_engine import decide_qe, format_sweep_table, sweep
from fdqe.records import (ElementRecord, MatrixRecord, PredicateValueRecord, PreservationRecord, VerdictRecord,
                          iter_sweep_json, load_record)

PROG_NAME = "fdqe"


### Parameter types ###

class AlgebraType(click.ParamType):
    """
    Click parameter type for the algebra notation, e.g. `3,2`.
    """
    name = "algebra"

    def convert(self, value, param, ctx):
        if isinstance(value, BlockSizes): return value
        try:
            return parse_algebra(value)
        except ValidationError as e:
            self.fail(str(e), param, ctx)


ALGEBRA = AlgebraType()
LANGUAGE = click.Choice(LANGUAGES, case_sensitive = False)
PREDICATE = click.Choice(["rho-min", "rho-sim"], case_sensitive = False)
STYLE = click.Choice(EDGE_STYLES)


### Helpers ###

def _read(path: str) -> str:
    try:
        with open(path, "r", encoding = "utf-8") as f:
            return f.read()
    except UnicodeDecodeError as e:
        raise ValidationError(f"{path} is not UTF-8 text (byte {e.start})")


def _read_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in {path}: {e.msg} (line {e.lineno}, column {e.colno})")


def _load_element(data, A: BlockSizes, what: str):
    record = ElementRecord()
    record.from_dict(data)
    if record.value.algebra != A:
        raise ValidationError(f"{what} belongs to ({record.value.algebra}), expected ({A})")
    return record.value


def _load_inputs(A: BlockSizes, input_path: str, input_y_path):
    """
    [Internal] Reads the element(s) for `predicates`. The input file is either an element file or an object with "x"
    and (optionally) "y" element files; --input-y takes precedence over "y".
    """
    data = _read_json(input_path)
    if isinstance(data, dict) and "x" in data:
        x = _load_element(data["x"], A, "x")
        y = _load_element(data["y"], A, "y") if data.get("y") is not None else None
    else:
        x, y = _load_element(data, A, "Input"), None
    if input_y_path is not None:
        y = _load_element(_read_json(input_y_path), A, "Second input")
    return x, y


def _config(seed: int, restarts: int) -> OptimizerConfig:
    return OptimizerConfig(restarts = restarts, seed = seed)


def _finish(converged: bool, strict: bool, what: str):
    if converged: return
    if strict: raise NonConvergenceError(f"{what} did not converge; the reported value is an upper bound only")
    log.warning("%s did not converge; the reported value is an upper bound only", what)


def _one_line(message: str) -> str:
    return "; ".join(line.strip() for line in str(message).splitlines() if line.strip())


### Command group ###

@click.group(context_settings = {"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", count = True, help = "Increase log verbosity (-v info, -vv debug, -vvv trace).")
@click.option("--log-dir", default = LOGS_DIRECTORY, show_default = True,
              help = "Also write latest.log and debug.log to this directory.")
def cli(verbose: int, log_dir: str):
    """
    Quantifier elimination for finite-dimensional C*-algebras.
    """
    init_logger(verbose, log_dir)


@cli.command()
@click.argument("algebra", type = ALGEBRA)
@click.option("--lang", default = DEFAULT_LANGUAGE, type = LANGUAGE, show_default = True)
@click.option("--sub", type = ALGEBRA, default = None, help = "Only test embeddings of this substructure.")
@click.option("--json", "as_json", is_flag = True, help = "Print the verdict as JSON.")
def check(algebra: BlockSizes, lang: str, sub, as_json: bool):
    """
    Decide whether the theory of ALGEBRA eliminates quantifiers.
    """
    verdict = decide_qe(algebra, LanguageVariant.parse(lang), sub = sub)

    if as_json:
        click.echo(VerdictRecord(verdict).encode())
        return

    click.echo(f"Algebra: {verdict.algebra.notation()} ({verdict.algebra})")
    click.echo(f"Language: {verdict.language.value}")
    click.echo(click.style(f"QE: {'yes' if verdict.qe else 'no'}", fg = "green" if verdict.qe else "red"))
    if verdict.certificate:
        cert = verdict.certificate
        click.echo(f"Certificate: two embeddings of ({cert.sub_dims}) that no automorphism relates")
        click.echo(f"  e1 = {cert.e1}")
        click.echo(f"  e2 = {cert.e2}")
        if sub is None:
            click.echo("Other substructures may also fail; test one with --sub <sizes>")
    click.echo(f"Candidates: {verdict.stats.candidates}, matrices: {verdict.stats.matrices}")


@cli.command(name = "sweep")
@click.option("--bound", required = True, type = int, help = "Largest matrix size sum to decide.")
@click.option("--lang", default = DEFAULT_LANGUAGE, type = LANGUAGE, show_default = True)
@click.option("--workers", default = DEFAULT_SWEEP_WORKERS, type = int, show_default = True)
@click.option("--json", "as_json", is_flag = True, help = "Print one JSON verdict per line.")
def sweep_command(bound: int, lang: str, workers: int, as_json: bool):
    """
    Decide every canonical algebra up to a matrix size sum.
    """
    report = sweep(bound, LanguageVariant.parse(lang), workers = workers)
    if as_json:
        for line in iter_sweep_json(report):
            click.echo(line)
    else:
        click.echo(format_sweep_table(report), nl = False)


@cli.command()
@click.argument("source", type = ALGEBRA)
@click.argument("target", type = ALGEBRA)
@click.option("--lang", default = DEFAULT_LANGUAGE, type = LANGUAGE, show_default = True)
@click.option("--dot", "dot_path", type = click.Path(dir_okay = False, writable = True), default = None,
              help = "Write every admissible diagram to this DOT file.")
@click.option("--style", default = "solid", type = STYLE, show_default = True, help = "DOT edge style.")
@click.option("--json", "as_json", is_flag = True, help = "Print one JSON matrix per line.")
def embeddings(source: BlockSizes, target: BlockSizes, lang: str, dot_path, style: str, as_json: bool):
    """
    List the admissible multiplicity matrices SOURCE -> TARGET.
    """
    language = LanguageVariant.parse(lang)
    matrices = enumerate_embedding_matrices(source, target, language)

    if dot_path:
        with open(dot_path, "w") as f:
            f.write(diagrams_to_dot(matrices, style))
        log.info("Wrote %d diagram(s) to %s", len(matrices), dot_path)

    for E in matrices:
        click.echo(MatrixRecord(E).encode() if as_json else str(E))
    if not as_json:
        click.echo(f"{len(matrices)} {language.value}-admissible embedding(s) of ({source}) into ({target})")


@cli.command()
@click.argument("path", type = click.Path(dir_okay = False))
@click.option("--style", default = "solid", type = STYLE, show_default = True,
              help = "Edge style for a single matrix (certificates always use solid and dashed).")
def render(path: str, style: str):
    """
    Print the Bratteli diagram of a matrix file, or of a verdict's certificate, as DOT.
    """
    record = load_record(_read(path))
    if isinstance(record, MatrixRecord):
        click.echo(to_dot(record.value, style), nl = False)
    elif isinstance(record, VerdictRecord):
        cert = record.value.certificate
        if cert is None: raise ValidationError(f"The verdict in {path} has no certificate to render")
        click.echo(diagrams_to_dot([cert.e1, cert.e2], ("solid", "dashed")), nl = False)
    else:
        raise ValidationError(f"{path} holds neither a multiplicity matrix nor a verdict")


@cli.command()
@click.option("--algebra", "algebra", required = True, type = ALGEBRA)
@click.option("--op", "op", required = True, type = PREDICATE)
@click.option("--input", "input_path", required = True, type = click.Path(dir_okay = False))
@click.option("--input-y", "input_y_path", default = None, type = click.Path(dir_okay = False),
              help = "Second element for rho-sim.")
@click.option("--seed", default = DEFAULT_SEED, type = int, show_default = True)
@click.option("--restarts", default = DEFAULT_RESTARTS, type = int, show_default = True)
@click.option("--strict", is_flag = True, help = "Exit with code 2 if the optimizer did not converge.")
@click.option("--json", "as_json", is_flag = True)
def predicates(algebra: BlockSizes, op: str, input_path: str, input_y_path, seed: int, restarts: int,
               strict: bool, as_json: bool):
    """
    Evaluate rho-min on an element, or bound rho-sim on a pair.
    """
    predicate = Predicate.parse(op)
    cfg = _config(seed, restarts)
    x, y = _load_inputs(algebra, input_path, input_y_path)

    if predicate is Predicate.RHO_MIN:
        result = rho_min(x, cfg)
        text = f"rho_min = {float(result):.9f}"
    else:
        if y is None: raise ValidationError("rho-sim needs a second element (--input-y, or a \"y\" key in the input)")
        result = rho_sim_bounds(x, y, cfg)
        text = f"rho_sim in [{result.lower:.9f}, {result.upper:.9f}]"

    click.echo(PredicateValueRecord((predicate, result)).encode() if as_json else text)
    _finish(result.converged, strict, predicate.value)


@cli.command()
@click.argument("source", type = ALGEBRA)
@click.argument("target", type = ALGEBRA)
@click.option("--matrix", "matrix_path", required = True, type = click.Path(dir_okay = False))
@click.option("--predicate", "predicate_name", required = True, type = PREDICATE)
@click.option("--samples", default = DEFAULT_SAMPLES, type = int, show_default = True)
@click.option("--seed", default = DEFAULT_SEED, type = int, show_default = True)
@click.option("--restarts", default = DEFAULT_RESTARTS, type = int, show_default = True)
@click.option("--diagonal", is_flag = True, help = "Sample real diagonal elements only.")
@click.option("--strict", is_flag = True, help = "Exit with code 2 if any evaluation did not converge.")
@click.option("--json", "as_json", is_flag = True)
def preserve(source: BlockSizes, target: BlockSizes, matrix_path: str, predicate_name: str, samples: int, seed: int,
             restarts: int, diagonal: bool, strict: bool, as_json: bool):
    """
    Check whether the embedding in a matrix file preserves a predicate.
    """
    predicate = Predicate.parse(predicate_name)
    cfg = _config(seed, restarts)
    record = MatrixRecord.decode(_read(matrix_path))
    E: MultiplicityMatrix = record.value
    if E.source != source or E.target != target:
        raise ValidationError(f"{matrix_path} maps ({E.source}) into ({E.target}), expected ({source}) into ({target})")

    report = check_preservation(E, predicate, samples, cfg, diagonal = diagonal)

    if as_json:
        click.echo(PreservationRecord(report).encode())
    else:
        click.echo(f"Embedding: {E} ({E.source} -> {E.target})")
        click.echo(f"Predicate: {predicate.value}")
        click.echo(f"Inputs: {report.samples}")
        click.echo(f"Max discrepancy: {report.max_discrepancy:.9f}")
    _finish(report.converged, strict, f"{predicate.value} preservation check")


### Entry point ###

def run(argv) -> int:
    """
    Runs the command line with the given arguments and returns the exit code.
    """
    try:
        cli.main(args = list(argv), prog_name = PROG_NAME, standalone_mode = False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("error: aborted", err = True)
        return ExitCode.USAGE.value
    except click.ClickException as e:
        click.echo(f"error: {_one_line(e.format_message())}", err = True)
        return ExitCode.USAGE.value
    except NonConvergenceError as e:
        click.echo(f"error: {_one_line(e)}", err = True)
        return ExitCode.NON_CONVERGENCE.value
    except (FdqeError, OSError) as e:
        log.debug("Command failed", exc_info = True)
        click.echo(f"error: {_one_line(e)}", err = True)
        return ExitCode.USAGE.value
    return ExitCode.OK.value
