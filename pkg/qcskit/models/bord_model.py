"""A small term language for (1+1)-dimensional bordisms.

Grammar (whitespace-insensitive; ";" binds looser than "*", both associate left):

    term   := factor { ";" factor }
    factor := atom { "*" atom }
    atom   := "cap" | "cup" | "mul" | "comul" | "id" | "swap" | "(" term ")"

"a ; b" glues b after a (diagrammatic order, read left to right); "a * b" places a and b side by
side, a on the first wires. Traversals are iterative so long chains do not hit the recursion limit.
"""
from dataclasses import dataclass, field
from functools import cached_property
import logging
import re
from typing import Iterator, NamedTuple, Union

import numpy as np

from qcskit.models.frobenius_model import ARITY, EULER, GENERATOR_NAMES, FrobeniusAlgebra, generator_matrix
from qcskit.models.report_model import AuditReport, CheckResult, max_abs
from qcskit.utils.logger import configure_logger


logger = logging.getLogger(__name__)
configure_logger(logger)


MAX_TERM_BYTES = 65536
MAX_NESTING = 256
MAX_EVAL_DIM = 4096


class BordSyntaxError(ValueError):
    """Lexical or syntax error at a source position, with the set of tokens that would have fit."""

    def __init__(self, message: str, line: int, column: int, expected: tuple = ()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        detail = f"; expected one of: {', '.join(self.expected)}" if self.expected else ""
        super().__init__(f"line {line}, column {column}: {message}{detail}")


class GluingMismatch(ValueError):
    """Sequential gluing whose boundary circle counts disagree.

    Attributes:
        path (tuple[str, ...]): Steps ("left"/"right") from the root to the offending ";" node.
        line (int), column (int): Position of that ";".

    """

    def __init__(self, detail: str, line: int, column: int, path: tuple = ()):
        self.detail = detail
        self.line = line
        self.column = column
        self.path = tuple(path)
        where = "/".join(self.path) or "root"
        super().__init__(f"line {line}, column {column}: {detail} (at {where})")

    def prefixed(self, *steps: str) -> "GluingMismatch":
        return GluingMismatch(self.detail, self.line, self.column, steps + self.path)


@dataclass(frozen=True)
class Atom:
    name: str
    pos: tuple = field(default=(1, 1), compare=False)

    @cached_property
    def boundary(self) -> tuple[int, int]:
        return ARITY[self.name]

    @cached_property
    def euler(self) -> int:
        return EULER[self.name]


@dataclass(frozen=True)
class Seq:
    """left then right: the outgoing circles of left are glued to the incoming circles of right."""
    left: "BordTerm"
    right: "BordTerm"
    pos: tuple = field(default=(1, 1), compare=False)

    @cached_property
    def boundary(self) -> tuple[int, int]:
        try:
            first = self.left.boundary
        except GluingMismatch as e:
            raise e.prefixed("left") from None
        try:
            second = self.right.boundary
        except GluingMismatch as e:
            raise e.prefixed("right") from None
        if first[1] != second[0]:
            raise GluingMismatch(f"cannot glue {first[1]} outgoing circle(s) to {second[0]} incoming circle(s)",
                                 *self.pos)
        return first[0], second[1]

    @cached_property
    def euler(self) -> int:
        return self.left.euler + self.right.euler


@dataclass(frozen=True)
class Par:
    """Disjoint union."""
    left: "BordTerm"
    right: "BordTerm"
    pos: tuple = field(default=(1, 1), compare=False)

    @cached_property
    def boundary(self) -> tuple[int, int]:
        try:
            first = self.left.boundary
        except GluingMismatch as e:
            raise e.prefixed("left") from None
        try:
            second = self.right.boundary
        except GluingMismatch as e:
            raise e.prefixed("right") from None
        return first[0] + second[0], first[1] + second[1]

    @cached_property
    def euler(self) -> int:
        return self.left.euler + self.right.euler


BordTerm = Union[Atom, Seq, Par]


def _postorder(term: BordTerm) -> Iterator[tuple[BordTerm, tuple]]:
    """Yields (node, path) with children before parents."""
    stack = [(term, (), False)]
    while stack:
        node, path, expanded = stack.pop()
        if isinstance(node, Atom) or expanded:
            yield node, path
            continue
        stack.append((node, path, True))
        stack.append((node.right, path + ("right",), False))
        stack.append((node.left, path + ("left",), False))


##########################################################
# Parsing
##########################################################


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(r"(?P<ws>\s+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[;*()])|(?P<bad>.)", re.DOTALL)
_ATOM_START = GENERATOR_NAMES + ("(",)


def tokenize(text: str) -> list[Token]:
    """Splits text into tokens, ending with an "end" token.

    Raises:
        BordSyntaxError: On unknown characters or identifiers.

    """
    tokens = []
    line, line_start = 1, 0
    for match in _TOKEN_RE.finditer(text):
        column = match.start() - line_start + 1
        kind = match.lastgroup
        value = match.group()
        if kind == "ws":
            for offset, char in enumerate(value):
                if char == "\n":
                    line += 1
                    line_start = match.start() + offset + 1
            continue
        if kind == "bad":
            logger.error(f"Unexpected character {value!r} at {line}:{column}")
            raise BordSyntaxError(f"unexpected character {value!r}", line, column, _ATOM_START)
        if kind == "name":
            if value not in GENERATOR_NAMES:
                logger.error(f"Unknown atom {value!r} at {line}:{column}")
                raise BordSyntaxError(f"unknown atom {value!r}", line, column, _ATOM_START)
            tokens.append(Token("atom", value, line, column))
        else:
            tokens.append(Token(value, value, line, column))
    tokens.append(Token("end", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.index = 0
        self.depth = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def fail(self, expected: tuple) -> None:
        token = self.current
        found = "end of input" if token.kind == "end" else repr(token.text)
        logger.error(f"Syntax error at {token.line}:{token.column}: unexpected {found}")
        raise BordSyntaxError(f"unexpected {found}", token.line, token.column, expected)

    def term(self) -> BordTerm:
        node = self.factor()
        while self.current.kind == ";":
            token = self.current
            self.index += 1
            node = Seq(node, self.factor(), (token.line, token.column))
        return node

    def factor(self) -> BordTerm:
        node = self.atom()
        while self.current.kind == "*":
            token = self.current
            self.index += 1
            node = Par(node, self.atom(), (token.line, token.column))
        return node

    def atom(self) -> BordTerm:
        token = self.current
        if token.kind == "atom":
            self.index += 1
            return Atom(token.text, (token.line, token.column))
        if token.kind == "(":
            if self.depth >= MAX_NESTING:
                logger.error(f"Parentheses nested deeper than {MAX_NESTING}")
                raise BordSyntaxError(f"parentheses nested deeper than {MAX_NESTING}", token.line, token.column)
            self.index += 1
            self.depth += 1
            node = self.term()
            if self.current.kind != ")":
                self.fail((";", "*", ")"))
            self.index += 1
            self.depth -= 1
            return node
        self.fail(_ATOM_START)


def parse(text: str) -> BordTerm:
    """Parses and typechecks a bordism term.

    Args:
        text (str): Source text, at most 64 KiB of UTF-8.

    Returns:
        BordTerm: The typed term tree.

    Raises:
        BordSyntaxError: On lexical or syntax errors, or oversized input.
        GluingMismatch: If a ";" glues mismatched circle counts (reported at that ";").

    """
    size = len(text.encode("utf-8"))
    if size > MAX_TERM_BYTES:
        logger.error(f"Term of {size} bytes exceeds {MAX_TERM_BYTES}")
        raise BordSyntaxError(f"term of {size} bytes exceeds the {MAX_TERM_BYTES}-byte limit", 1, 1)
    parser = _Parser(tokenize(text))
    term = parser.term()
    if parser.current.kind != "end":
        parser.fail((";", "*", "end of input"))
    typecheck(term)
    return term


def typecheck(term: BordTerm) -> tuple[int, int]:
    """Boundary circle counts (in, out) of a term; every node's type is cached.

    Raises:
        GluingMismatch: At the first ill-typed ";" in post-order, with its path from the root.

    """
    for node, path in _postorder(term):
        try:
            node.boundary
        except GluingMismatch as e:
            logger.error(f"Gluing mismatch: {e}")
            raise e.prefixed(*path) from None
    return term.boundary


def euler_char(term: BordTerm) -> int:
    """Sum of atom Euler characteristics; 2 - 2g for a closed connected genus-g term."""
    total = 0
    for node, _ in _postorder(term):
        if isinstance(node, Atom):
            total += EULER[node.name]
    return total


##########################################################
# Printing
##########################################################


def to_text(term: BordTerm) -> str:
    """Pretty-prints with the fewest parentheses that parse back to the same tree."""
    out = []
    stack: list = [term]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, Atom):
            out.append(item.name)
        else:
            if isinstance(item, Seq):
                wrap_left, wrap_right, op = False, isinstance(item.right, Seq), " ; "
            else:
                wrap_left, wrap_right, op = isinstance(item.left, Seq), not isinstance(item.right, Atom), " * "
            pieces = []
            pieces += ["(", item.left, ")"] if wrap_left else [item.left]
            pieces.append(op)
            pieces += ["(", item.right, ")"] if wrap_right else [item.right]
            stack.extend(reversed(pieces))
    return "".join(out)


def genus_term(genus: int) -> BordTerm:
    """cap ; (comul ; mul)^g ; cup, the closed connected surface of genus g."""
    if not isinstance(genus, (int, np.integer)) or genus < 0:
        logger.error(f"Invalid genus: {genus}")
        raise ValueError(f"Invalid genus: {genus}. Must be a non-negative integer.")
    return parse("cap" + " ; comul ; mul" * int(genus) + " ; cup")


##########################################################
# Evaluation
##########################################################


def evaluate(term: BordTerm, A: FrobeniusAlgebra) -> np.ndarray:
    """Matrix of the term under the TQFT of A: ";" is b @ a, "*" is the Kronecker product.

    Returns:
        np.ndarray: Shape (k^out, k^in).

    Raises:
        GluingMismatch: If the term is ill-typed.
        ValueError: If the algebra is not validated or a wire space exceeds MAX_EVAL_DIM.

    """
    typecheck(term)
    k = A.dim
    wires = max(max(node.boundary) for node, _ in _postorder(term))
    if k ** wires > MAX_EVAL_DIM:
        logger.error(f"Evaluation needs dimension {k}^{wires}, limit is {MAX_EVAL_DIM}")
        raise ValueError(f"Evaluation needs a space of dimension {k}^{wires}, above {MAX_EVAL_DIM}")
    generators = {name: generator_matrix(A, name).matrix for name in GENERATOR_NAMES}
    values: dict[int, np.ndarray] = {}
    for node, _ in _postorder(term):
        if isinstance(node, Atom):
            values[id(node)] = generators[node.name]
            continue
        first = values.pop(id(node.left))
        second = values.pop(id(node.right))
        values[id(node)] = second @ first if isinstance(node, Seq) else np.kron(first, second)
    return values[id(term)]


##########################################################
# Relations
##########################################################


RELATIONS = {
    "associativity": ("(mul * id) ; mul", "(id * mul) ; mul"),
    "left-unit": ("(cap * id) ; mul", "id"),
    "right-unit": ("(id * cap) ; mul", "id"),
    "coassociativity": ("comul ; (comul * id)", "comul ; (id * comul)"),
    "left-counit": ("comul ; (cup * id)", "id"),
    "right-counit": ("comul ; (id * cup)", "id"),
    "frobenius": ("(id * comul) ; (mul * id)", "mul ; comul", "(comul * id) ; (id * mul)"),
    "commutativity": ("swap ; mul", "mul"),
    "cocommutativity": ("comul ; swap", "comul"),
    "swap-involution": ("swap ; swap", "id * id"),
}


def relation_suite(A: FrobeniusAlgebra, tol: float = 1e-9) -> AuditReport:
    """Evaluates both (or all three) sides of every relation; checks matrices and Euler characteristics."""
    report = AuditReport(f"relations {A}")
    for name, sides in RELATIONS.items():
        terms = [parse(text) for text in sides]
        matrices = [evaluate(t, A) for t in terms]
        residual = max(max_abs(m - matrices[0]) for m in matrices[1:])
        eulers = {euler_char(t) for t in terms}
        check = report.add(CheckResult(name, residual <= tol and len(eulers) == 1, residual=residual))
        check.notes.append(" = ".join(sides))
        if len(eulers) != 1:
            check.notes.append(f"Euler characteristics differ: {sorted(eulers)}")
    return report
