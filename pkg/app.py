from dataclasses import dataclass
import functools
import json
import logging
import os
import sys
from typing import Any, Optional

import click
from dotenv import load_dotenv

from config import ProductionConfig

from qcskit.models.bord_model import BordSyntaxError, GluingMismatch, euler_char, evaluate, parse, to_text
from qcskit.models.choi_model import choi_apply, compose_choi, hom_membership_audit, tensor_choi
from qcskit.models.frobenius_model import (
    GENERATOR_NAMES,
    closed_surface_invariant,
    generator_matrix,
    group_algebra_z2,
    trivial,
    validate_frobenius,
)
from qcskit.models.herm_model import inner
from qcskit.models.lp_model import LpCapExceeded
from qcskit.models.ms_model import (
    ObjectPolicy,
    build_ms,
    functor_axiom_check,
    qcs_morphism_audit,
    scale_audit,
    tensor_gap_demo,
    trace_out_build,
)
from qcskit.models.qcs_model import (
    Verdict,
    bipolar_membership,
    canonical_membership,
    polar_membership,
    qcs_axiom_suite,
    qcs_membership,
    tensor_membership,
    unit_object_audit,
)
from qcskit.models.report_model import AuditReport
from qcskit.utils.json_utils import (
    algebra_from_json,
    complex_to_json,
    desc_from_json,
    desc_to_json,
    dumps,
    herm_from_json,
    load_argument,
    matrices_from_json,
    matrix_to_json,
    morphism_from_json,
    morphism_to_json,
    verdict_to_json,
)
from qcskit.utils.logger import configure_logger


load_dotenv()

logger = logging.getLogger(__name__)
configure_logger(logger)


EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2
EXIT_UNRESOLVED = 3

BUILTIN_ALGEBRAS = {"C": trivial, "C[Z/2]": group_algebra_z2}
INPUT_ERRORS = (ValueError, KeyError, OSError, LpCapExceeded)


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every sub-command of one invocation."""
    tol: float
    seed: int
    samples: int
    budget: int
    lam: float
    format: str
    schema: str
    max_term_bytes: int
    command: str = ""


class ComplexParamType(click.ParamType):
    """Accepts "2", "1.5-0.5j" or "[re, im]"."""
    name = "complex"

    def convert(self, value, param, ctx):
        if isinstance(value, complex):
            return value
        text = str(value).strip()
        try:
            if text.startswith("["):
                re_part, im_part = json.loads(text)
                return complex(float(re_part), float(im_part))
            return complex(text.replace(" ", ""))
        except (ValueError, TypeError) as e:
            self.fail(f"{value!r} is not a complex number ({e})", param, ctx)


COMPLEX = ComplexParamType()


##########################################################
#
# Input and output helpers
#
##########################################################


def verdict_exit_code(answer: Verdict) -> int:
    return {Verdict.IN: EXIT_PASS, Verdict.OUT: EXIT_VIOLATION, Verdict.UNRESOLVED: EXIT_UNRESOLVED}[answer]


def report_exit_code(report: AuditReport) -> int:
    return {"pass": EXIT_PASS, "fail": EXIT_VIOLATION, "unresolved": EXIT_UNRESOLVED}[report.status]


def render_text(value: Any, indent: int = 0) -> list[str]:
    """Human rendering of the JSON tree: one "key: value" line per scalar."""
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item and not _is_scalar_list(item):
                lines.append(f"{pad}{key}:")
                lines.extend(render_text(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar_text(item)}")
        return lines
    if isinstance(value, list) and not _is_scalar_list(value):
        lines = []
        for i, item in enumerate(value):
            lines.append(f"{pad}- [{i}]")
            lines.extend(render_text(item, indent + 1))
        return lines
    return [f"{pad}{_scalar_text(value)}"]


def _is_scalar_list(value: Any) -> bool:
    return isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value)


def _scalar_text(value: Any) -> str:
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    if value is None:
        return "-"
    return str(value)


def command_name(ctx: click.Context) -> str:
    """The sub-command path without the program name, e.g. "qcs polar-pair"."""
    return " ".join(ctx.command_path.split()[1:])


def emit(ctx: click.Context, result: Any, code: int = EXIT_PASS) -> None:
    """Writes the result envelope to stdout and exits with the given code."""
    config: RunConfig = ctx.obj
    command = command_name(ctx)
    if config.format == "text":
        click.echo(f"{command}:")
        click.echo("\n".join(render_text(result, 1)))
    else:
        click.echo(dumps({"schema": config.schema, "command": command, "result": result}))
    ctx.exit(code)


def emit_report(ctx: click.Context, report: AuditReport) -> None:
    emit(ctx, report.to_dict(), report_exit_code(report))


def handles_input_errors(fn):
    """Turns input errors raised by a command into an error object on stderr and exit code 2."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return fn(*args, **kwargs)
        except INPUT_ERRORS as e:
            config: RunConfig = ctx.obj
            error = {"type": type(e).__name__, "message": str(e).strip("'\"")}
            if isinstance(e, (BordSyntaxError, GluingMismatch)):
                error["line"], error["column"] = e.line, e.column
            if isinstance(e, BordSyntaxError) and e.expected:
                error["expected"] = list(e.expected)
            if isinstance(e, GluingMismatch):
                error["path"] = list(e.path)
            logger.error(f"{ctx.command_path} failed: {error['message']}")
            if config.format == "text":
                click.echo(f"error: {error['type']}: {error['message']}", err=True)
            else:
                click.echo(dumps({"schema": config.schema, "command": command_name(ctx), "error": error}), err=True)
            ctx.exit(EXIT_INPUT_ERROR)
    return wrapper


def load_matrix(value: str, where: str):
    return herm_from_json(load_argument(value, where), where)


def load_algebra(value: str):
    """A built-in name ("C", "C[Z/2]") or a JSON algebra, inline or from a file."""
    if value in BUILTIN_ALGEBRAS:
        return BUILTIN_ALGEBRAS[value]()
    return algebra_from_json(load_argument(value, "algebra"), "algebra")


def load_term(ctx: click.Context, term: Optional[str], path: Optional[str]):
    if (term is None) == (path is None):
        raise click.UsageError("Give a TERM argument or --file, but not both")
    if path is not None:
        with open(path, "rb") as handle:
            data = handle.read(ctx.obj.max_term_bytes + 1)
        if len(data) > ctx.obj.max_term_bytes:
            raise BordSyntaxError(f"term file exceeds the {ctx.obj.max_term_bytes}-byte limit", 1, 1)
        try:
            term = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise BordSyntaxError(f"term file is not UTF-8 ({e.reason})", 1, 1) from e
    return parse(term)


def scalar_display(value: complex) -> str:
    value = complex(value)
    if abs(value.imag) <= 1e-12 * max(1.0, abs(value.real)):
        return f"{value.real:.12g}"
    return f"{value.real:.12g}{value.imag:+.12g}j"


def create_app(config_class=ProductionConfig) -> click.Group:
    """Creates the qcskit command line application

    Args:
        config_class (Config): The configuration class to use.

    Returns:
        click.Group: The root command group with its defaults taken from the configuration.

    """
    # QCSKIT_SEED is read here so an export after import still applies
    default_seed = int(os.getenv("QCSKIT_SEED", str(config_class.SEED)))

    @click.group(context_settings={"help_option_names": ["-h", "--help"]})
    @click.option("--format", "output_format", type=click.Choice(["json", "text"]), default=config_class.FORMAT,
                  show_default=True, help="Output format; text renders the same tree for humans.")
    @click.option("--tol", type=float, default=config_class.TOL, show_default=True, help="Pairing tolerance.")
    @click.option("--seed", type=int, default=default_seed, show_default=True,
                  help="Sampling seed (QCSKIT_SEED overrides the default).")
    @click.option("--samples", type=click.IntRange(min=0), default=config_class.SAMPLES, show_default=True,
                  help="Random points per sampled audit.")
    @click.option("--budget", type=click.IntRange(min=1), default=config_class.BUDGET, show_default=True,
                  help="Cutting-plane rounds for tensor membership.")
    @click.pass_context
    def cli(ctx, output_format, tol, seed, samples, budget):
        """Quantum coherent spaces, Choi maps and mixed-state TQFT audits."""
        if tol < 0:
            raise click.BadParameter("must be non-negative", param_hint="--tol")
        ctx.obj = RunConfig(tol=tol, seed=seed, samples=samples, budget=budget, lam=config_class.LAMBDA,
                            format=output_format, schema=config_class.SCHEMA,
                            max_term_bytes=config_class.MAX_TERM_BYTES, command=ctx.invoked_subcommand or "")

    ##########################################################
    #
    # Quantum coherent spaces
    #
    ##########################################################

    @cli.group()
    def qcs():
        """Polarity, double polars and membership oracles."""

    @qcs.command("polar-pair")
    @click.option("--f", "f_value", required=True, help="Matrix f (JSON inline or file).")
    @click.option("--g", "g_value", required=True, help="Matrix g (JSON inline or file).")
    @click.pass_context
    @handles_input_errors
    def polar_pair(ctx, f_value, g_value):
        """Exit 0 iff 0 <= tr(fg) <= 1 within --tol."""
        f, g = load_matrix(f_value, "f"), load_matrix(g_value, "g")
        if f.n != g.n:
            raise ValueError(f"Dimension mismatch: f is {f.n}x{f.n}, g is {g.n}x{g.n}")
        pairing = inner(f, g)
        tol = ctx.obj.tol
        polar = -tol <= pairing <= 1 + tol
        emit(ctx, {"pairing": pairing, "polar": polar}, EXIT_PASS if polar else EXIT_VIOLATION)

    @qcs.command("polar-member")
    @click.option("--point", required=True, help="Matrix g to test against ∼S.")
    @click.option("--generators", required=True, help="List of matrices S.")
    @click.pass_context
    @handles_input_errors
    def polar_member(ctx, point, generators):
        """Decides g ∈ ∼S."""
        verdict = polar_membership(load_matrix(point, "point"),
                                   matrices_from_json(load_argument(generators, "generators")), ctx.obj.tol)
        emit(ctx, verdict_to_json(verdict), verdict_exit_code(verdict.answer))

    @qcs.command("bipolar-member")
    @click.option("--point", required=True, help="Matrix f to test against ∼∼S.")
    @click.option("--generators", required=True, help="List of matrices S.")
    @click.pass_context
    @handles_input_errors
    def bipolar_member(ctx, point, generators):
        """Decides f ∈ ∼∼S exactly with the LP oracle."""
        verdict = bipolar_membership(load_matrix(point, "point"),
                                     matrices_from_json(load_argument(generators, "generators")), ctx.obj.tol)
        emit(ctx, verdict_to_json(verdict), verdict_exit_code(verdict.answer))

    @qcs.command("canonical")
    @click.option("--point", required=True, help="Matrix f.")
    @click.option("--space", type=click.Choice(["D", "P"]), default="D", show_default=True)
    @click.pass_context
    @handles_input_errors
    def canonical(ctx, point, space):
        """Spectral membership in D(n) or P(n), with a polar witness on failure."""
        verdict = canonical_membership(load_matrix(point, "point"), space, ctx.obj.tol)
        emit(ctx, verdict_to_json(verdict), verdict_exit_code(verdict.answer))

    @qcs.command("suite")
    @click.option("--generators", required=True, help="List of matrices S.")
    @click.pass_context
    @handles_input_errors
    def suite(ctx, generators):
        """Closure-operator laws of the polar on a finite set."""
        config: RunConfig = ctx.obj
        mats = matrices_from_json(load_argument(generators, "generators"))
        emit_report(ctx, qcs_axiom_suite(mats, samples=config.samples, seed=config.seed, tol=config.tol))

    @qcs.command("tensor-member")
    @click.option("--point", required=True, help="Matrix f on the product carrier.")
    @click.option("--left", required=True, help="Description of the left factor.")
    @click.option("--right", required=True, help="Description of the right factor.")
    @click.pass_context
    @handles_input_errors
    def tensor_member(ctx, point, left, right):
        """Decides f ∈ X ⊗ Y (In is relative to finitely many product cuts when the polar is infinite)."""
        config: RunConfig = ctx.obj
        verdict = tensor_membership(load_matrix(point, "point"), desc_from_json(load_argument(left, "left"), "left"),
                                    desc_from_json(load_argument(right, "right"), "right"),
                                    budget=config.budget, seed=config.seed, tol=config.tol)
        emit(ctx, verdict_to_json(verdict), verdict_exit_code(verdict.answer))

    @qcs.command("member")
    @click.option("--point", required=True, help="Matrix f.")
    @click.option("--desc", "desc_value", required=True, help="Any QCS description.")
    @click.pass_context
    @handles_input_errors
    def member(ctx, point, desc_value):
        """Membership in any described QCS."""
        config: RunConfig = ctx.obj
        desc = desc_from_json(load_argument(desc_value, "desc"))
        verdict = qcs_membership(load_matrix(point, "point"), desc, tol=config.tol, budget=config.budget,
                                 seed=config.seed)
        result = verdict_to_json(verdict)
        result["desc"] = desc_to_json(desc)
        emit(ctx, result, verdict_exit_code(verdict.answer))

    @qcs.command("unit-audit")
    @click.pass_context
    @handles_input_errors
    def unit_audit(ctx):
        """Polars of R+, {0} and [0, 1] on the one-dimensional carrier."""
        emit_report(ctx, unit_object_audit(ctx.obj.tol))

    ##########################################################
    #
    # Choi morphisms
    #
    ##########################################################

    @cli.group()
    def choi():
        """Morphisms of quantum coherent spaces as Choi matrices."""

    @choi.command("apply")
    @click.option("--morphism", required=True, help="Choi morphism (JSON inline or file).")
    @click.option("--point", required=True, help="Input matrix on the domain carrier.")
    @click.pass_context
    @handles_input_errors
    def apply(ctx, morphism, point):
        """Image of one matrix."""
        F = morphism_from_json(load_argument(morphism, "morphism"))
        image = choi_apply(F, load_matrix(point, "point"))
        emit(ctx, {"image": matrix_to_json(image), "out_dim": F.out_dim})

    @choi.command("compose")
    @click.option("--first", required=True, help="Morphism applied first.")
    @click.option("--second", required=True, help="Morphism applied second.")
    @click.pass_context
    @handles_input_errors
    def compose(ctx, first, second):
        """Choi matrix of second ∘ first."""
        F1 = morphism_from_json(load_argument(first, "first"), "first")
        F2 = morphism_from_json(load_argument(second, "second"), "second")
        emit(ctx, morphism_to_json(compose_choi(F2, F1)))

    @choi.command("tensor")
    @click.option("--left", required=True, help="Morphism on the first factor.")
    @click.option("--right", required=True, help="Morphism on the second factor.")
    @click.pass_context
    @handles_input_errors
    def tensor(ctx, left, right):
        """Choi matrix of the tensor product of two morphisms."""
        F1 = morphism_from_json(load_argument(left, "left"), "left")
        F2 = morphism_from_json(load_argument(right, "right"), "right")
        emit(ctx, morphism_to_json(tensor_choi(F1, F2)))

    @choi.command("hom-audit")
    @click.option("--morphism", required=True, help="Choi morphism with domain and codomain.")
    @click.pass_context
    @handles_input_errors
    def choi_hom_audit(ctx, morphism):
        """Checks that the morphism maps its domain into its codomain."""
        config: RunConfig = ctx.obj
        F = morphism_from_json(load_argument(morphism, "morphism"))
        emit_report(ctx, hom_membership_audit(F, samples=config.samples, seed=config.seed,
                                              budget=config.budget, tol=config.tol))

    ##########################################################
    #
    # Frobenius algebras
    #
    ##########################################################

    @cli.group()
    def frob():
        """Commutative Frobenius algebras and their closed-surface invariants."""

    @frob.command("validate")
    @click.option("--algebra", required=True, help='Algebra JSON, or a built-in: "C", "C[Z/2]".')
    @click.pass_context
    @handles_input_errors
    def validate(ctx, algebra):
        """Checks every Frobenius axiom; exit 1 when one fails."""
        emit_report(ctx, validate_frobenius(load_algebra(algebra), ctx.obj.tol))

    @frob.command("gen")
    @click.option("--algebra", required=True, help='Algebra JSON, or a built-in: "C", "C[Z/2]".')
    @click.option("--name", required=True, type=click.Choice(list(GENERATOR_NAMES)))
    @click.pass_context
    @handles_input_errors
    def gen(ctx, algebra, name):
        """Matrix of one generating bordism in the pure theory."""
        generator = generator_matrix(load_algebra(algebra), name)
        emit(ctx, {"name": generator.name, "euler": generator.euler, "arity": list(generator.arity),
                   "matrix": matrix_to_json(generator.matrix)})

    @frob.command("invariant")
    @click.option("--algebra", required=True, help='Algebra JSON, or a built-in: "C", "C[Z/2]".')
    @click.option("--genus", type=click.IntRange(min=0), required=True)
    @click.pass_context
    @handles_input_errors
    def invariant(ctx, algebra, genus):
        """Value of the closed genus-g surface."""
        value = closed_surface_invariant(load_algebra(algebra), genus)
        emit(ctx, {"genus": genus, "invariant": complex_to_json(value), "display": scalar_display(value)})

    ##########################################################
    #
    # Bordism terms
    #
    ##########################################################

    @cli.group()
    def bord():
        """Parse, typecheck and evaluate bordism terms."""

    term_argument = click.argument("term", required=False)
    file_option = click.option("--file", "path", type=click.Path(dir_okay=False), help="Read the term from a file.")

    @bord.command("parse")
    @term_argument
    @file_option
    @click.pass_context
    @handles_input_errors
    def parse_term(ctx, term, path):
        """Parses a term and prints its normal rendering."""
        parsed = load_term(ctx, term, path)
        emit(ctx, {"term": to_text(parsed), "boundary": list(parsed.boundary)})

    @bord.command("type")
    @term_argument
    @file_option
    @click.pass_context
    @handles_input_errors
    def type_term(ctx, term, path):
        """Boundary circle counts; exit 2 with the location of a gluing mismatch."""
        parsed = load_term(ctx, term, path)
        circles_in, circles_out = parsed.boundary
        emit(ctx, {"term": to_text(parsed), "in": circles_in, "out": circles_out})

    @bord.command("euler")
    @term_argument
    @file_option
    @click.pass_context
    @handles_input_errors
    def euler(ctx, term, path):
        """Euler characteristic of a term."""
        parsed = load_term(ctx, term, path)
        emit(ctx, {"term": to_text(parsed), "euler": euler_char(parsed)})

    @bord.command("eval")
    @term_argument
    @file_option
    @click.option("--algebra", required=True, help='Algebra JSON, or a built-in: "C", "C[Z/2]".')
    @click.pass_context
    @handles_input_errors
    def eval_term(ctx, term, path, algebra):
        """Matrix of a term in the pure theory of an algebra."""
        parsed = load_term(ctx, term, path)
        matrix = evaluate(parsed, load_algebra(algebra))
        result = {"term": to_text(parsed), "boundary": list(parsed.boundary), "matrix": matrix_to_json(matrix)}
        if matrix.shape == (1, 1):
            result["display"] = scalar_display(matrix[0, 0])
        emit(ctx, result)

    ##########################################################
    #
    # Mixed-state TQFTs
    #
    ##########################################################

    @cli.group()
    def ms():
        """Mixed-state TQFTs: pure theories post-composed with D."""

    algebra_option = click.option("--algebra", required=True, help='Algebra JSON, or a built-in: "C", "C[Z/2]".')
    lambda_option = click.option("--lambda", "lam", type=float, default=config_class.LAMBDA, show_default=True,
                                 help="Euler rescaling factor.")
    policy_option = click.option("--policy", type=click.Choice([p.value for p in ObjectPolicy]),
                                 default=ObjectPolicy.TENSOR_OF_COMPONENTS.value, show_default=True,
                                 help="QCS assigned to unions of circles.")

    @ms.command("build")
    @algebra_option
    @lambda_option
    @policy_option
    @click.pass_context
    @handles_input_errors
    def build(ctx, algebra, lam, policy):
        """Choi matrices of all six generator images."""
        theory = build_ms(load_algebra(algebra), lam, ObjectPolicy(policy))
        emit(ctx, {
            "algebra": theory.algebra.name,
            "lambda": theory.lam,
            "policy": theory.object_policy.value,
            "generators": {name: morphism_to_json(F) for name, F in theory.generator_chois.items()},
        })

    @ms.command("scale-audit")
    @algebra_option
    @click.pass_context
    @handles_input_errors
    def scale(ctx, algebra):
        """Range of lambda for which every generator image preserves D; exit 1 when empty."""
        audit = scale_audit(load_algebra(algebra))
        result = audit.to_dict()
        result["verdict"] = "Feasible" if audit.feasible else "Infeasible"
        emit(ctx, result, EXIT_PASS if audit.feasible else EXIT_VIOLATION)

    @ms.command("axioms")
    @algebra_option
    @lambda_option
    @policy_option
    @click.pass_context
    @handles_input_errors
    def axioms(ctx, algebra, lam, policy):
        """Composition, monoidality, identity, relations and symmetry of the functor."""
        theory = build_ms(load_algebra(algebra), lam, ObjectPolicy(policy))
        emit_report(ctx, functor_axiom_check(theory, ctx.obj.tol, ctx.obj.seed))

    @ms.command("hom-audit")
    @algebra_option
    @lambda_option
    @policy_option
    @click.option("--atom", "atoms", multiple=True, type=click.Choice(list(GENERATOR_NAMES)),
                  help="Generator to audit (repeatable; all six by default).")
    @click.pass_context
    @handles_input_errors
    def ms_hom_audit(ctx, algebra, lam, policy, atoms):
        """Checks that each generator image is a morphism of quantum coherent spaces."""
        config: RunConfig = ctx.obj
        theory = build_ms(load_algebra(algebra), lam, ObjectPolicy(policy))
        emit_report(ctx, qcs_morphism_audit(theory, config.samples, config.seed, atoms=list(atoms) or None,
                                            budget=config.budget, tol=config.tol))

    @ms.command("trace-out")
    @algebra_option
    @click.option("--mu", type=COMPLEX, required=True, help="Nonzero value of the invertible Euler theory.")
    @policy_option
    @click.option("--audit/--no-audit", default=True, show_default=True, help="Run the functor and morphism audits.")
    @click.pass_context
    @handles_input_errors
    def trace_out(ctx, algebra, mu, policy, audit):
        """Product with an invertible theory, second factor traced out."""
        config: RunConfig = ctx.obj
        theory, report = trace_out_build(load_algebra(algebra), mu, ObjectPolicy(policy), samples=config.samples,
                                         seed=config.seed, budget=config.budget, tol=config.tol, audit=audit)
        result = report.to_dict()
        result["lambda"] = theory.lam
        emit(ctx, result, report_exit_code(report))

    @ms.command("tensor-gap")
    @click.option("--pairs", type=click.IntRange(min=1), default=200, show_default=True)
    @click.pass_context
    @handles_input_errors
    def tensor_gap(ctx, pairs):
        """Shows D(C^2) ⊗ D(C^2) is strictly smaller than D(C^4)."""
        emit_report(ctx, tensor_gap_demo(2, pairs, ctx.obj.seed, ctx.obj.tol))

    return cli


def run(argv: Optional[list[str]] = None, config_class=ProductionConfig) -> int:
    """Runs the command line and returns its exit code instead of exiting.

    Usage errors (unknown command, bad option) are printed and mapped to 2.
    """
    cli = create_app(config_class)
    try:
        code = cli.main(args=argv, prog_name="qcskit", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_INPUT_ERROR
    except click.Abort:
        return EXIT_INPUT_ERROR
    return code if isinstance(code, int) else EXIT_PASS


if __name__ == '__main__':
    sys.exit(run())
