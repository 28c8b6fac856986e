"""Mini imperative IR: typed in-memory form, textual format, validation.

A program is a set of named integer functions over basic blocks. The text
format (extension ``.mir``) is line oriented, one instruction per line:

    program <name>

    func <fname>(<p1>, <p2>)
    block <id>:
      <dest> = const <int>
      <dest> = input
      <dest> = <a> <op> <b>              # op: + - * / %
      <dest> = call <fname>(<a>, <b>)
      call <fname>(<a>)
      print <a>
      br <cmp> <a> <b> -> <then>, <else>   # cmp: < <= == != >= >
      jmp <id>
      ret [<a>]

Operands are local/parameter names or int32 literals; ``#`` starts a
comment. Every block ends with exactly one terminator. All arithmetic is
int32 two's complement with wrap-around; division and remainder truncate
toward zero (remainder takes the dividend's sign). Division or remainder
by zero is not undefined behavior: the interpreter and the symbolic engine
terminate the executing path with an arithmetic fault.

Programs are immutable after validation and safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1

BIN_OPS = ("+", "-", "*", "/", "%")
CMP_OPS = ("<", "<=", "==", "!=", ">=", ">")

ENTRY_FUNCTION = "main"

# Operands are either int32 literals or names of parameters/locals.
Operand = int | str


def wrap32(value: int) -> int:
    """Reduce an unbounded integer to int32 two's complement."""
    return ((value + (1 << 31)) & 0xFFFFFFFF) - (1 << 31)


def apply_binop(op: str, lhs: int, rhs: int) -> int:
    """Apply a binary operator with int32 wrap-around semantics.

    Division truncates toward zero; remainder satisfies
    ``lhs == div(lhs, rhs) * rhs + mod(lhs, rhs)``. Raises
    ZeroDivisionError for ``/`` and ``%`` with a zero divisor; callers
    turn that into an arithmetic-fault path end.
    """
    if op == "+":
        return wrap32(lhs + rhs)
    if op == "-":
        return wrap32(lhs - rhs)
    if op == "*":
        return wrap32(lhs * rhs)
    if op == "/":
        if rhs == 0:
            raise ZeroDivisionError("division by zero")
        quot = abs(lhs) // abs(rhs)
        return wrap32(-quot if (lhs < 0) != (rhs < 0) else quot)
    if op == "%":
        if rhs == 0:
            raise ZeroDivisionError("remainder by zero")
        quot = abs(lhs) // abs(rhs)
        if (lhs < 0) != (rhs < 0):
            quot = -quot
        return wrap32(lhs - quot * rhs)
    raise ValueError(f"unknown operator {op!r}")


def apply_cmp(cmp: str, lhs: int, rhs: int) -> bool:
    """Evaluate a comparison operator on two int32 values."""
    if cmp == "<":
        return lhs < rhs
    if cmp == "<=":
        return lhs <= rhs
    if cmp == "==":
        return lhs == rhs
    if cmp == "!=":
        return lhs != rhs
    if cmp == ">=":
        return lhs >= rhs
    if cmp == ">":
        return lhs > rhs
    raise ValueError(f"unknown comparison {cmp!r}")


# ---------------------------------------------------------------------------
# IR node types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    dest: str
    value: int


@dataclass(frozen=True)
class ReadInput:
    dest: str


@dataclass(frozen=True)
class BinOp:
    dest: str
    op: str
    lhs: Operand
    rhs: Operand


@dataclass(frozen=True)
class Call:
    dest: str | None
    callee: str
    args: tuple[Operand, ...]


@dataclass(frozen=True)
class Print:
    operand: Operand


Instruction = Const | ReadInput | BinOp | Call | Print


@dataclass(frozen=True)
class Branch:
    cmp: str
    lhs: Operand
    rhs: Operand
    then_block: str
    else_block: str


@dataclass(frozen=True)
class Jump:
    target: str


@dataclass(frozen=True)
class Return:
    value: Operand | None = None


Terminator = Branch | Jump | Return


@dataclass(frozen=True)
class Block:
    id: str
    instructions: tuple[Instruction, ...]
    terminator: Terminator


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[str, ...]
    blocks: dict[str, Block]
    entry_block: str


@dataclass(frozen=True)
class Program:
    name: str
    functions: dict[str, Function]
    entry: str = ENTRY_FUNCTION


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class IRError(Exception):
    """Base class for parse and validation failures."""


class ParseError(IRError):
    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class ValidationError(IRError):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

# Order matters: multi-char operators and signed integers before single chars.
_TOKEN_RE = re.compile(r"->|<=|>=|==|!=|-?\d+|[A-Za-z_][A-Za-z0-9_]*|[=(),:+*/%<>-]")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_KEYWORDS = frozenset(
    {"program", "func", "block", "const", "input", "call", "print", "br", "jmp", "ret"}
)


class _Cursor:
    """Token cursor over a single source line."""

    def __init__(self, line: str, lineno: int):
        self.lineno = lineno
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        for match in _TOKEN_RE.finditer(line):
            gap = line[pos : match.start()]
            if gap.strip():
                raise ParseError(
                    f"unexpected character {gap.strip()[0]!r}", lineno, pos + 1
                )
            self.tokens.append((match.group(), match.start() + 1))
            pos = match.end()
        if line[pos:].strip():
            raise ParseError(
                f"unexpected character {line[pos:].strip()[0]!r}", lineno, pos + 1
            )
        self.index = 0
        self._line_len = len(line)

    def peek(self) -> str | None:
        if self.index < len(self.tokens):
            return self.tokens[self.index][0]
        return None

    def next(self, what: str = "token") -> tuple[str, int]:
        if self.index >= len(self.tokens):
            raise ParseError(f"expected {what}", self.lineno, self._line_len + 1)
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, text: str) -> None:
        tok, col = self.next(f"'{text}'")
        if tok != text:
            raise ParseError(f"expected '{text}', found {tok!r}", self.lineno, col)

    def ident(self, what: str = "name") -> str:
        tok, col = self.next(what)
        if not _IDENT_RE.match(tok) or tok in _KEYWORDS:
            raise ParseError(f"expected {what}, found {tok!r}", self.lineno, col)
        return tok

    def int_literal(self) -> int:
        tok, col = self.next("integer")
        try:
            value = int(tok)
        except ValueError:
            raise ParseError(f"expected integer, found {tok!r}", self.lineno, col)
        if not INT32_MIN <= value <= INT32_MAX:
            raise ParseError("integer literal out of int32 range", self.lineno, col)
        return value

    def operand(self) -> Operand:
        tok, col = self.next("operand")
        if re.match(r"-?\d+\Z", tok):
            value = int(tok)
            if not INT32_MIN <= value <= INT32_MAX:
                raise ParseError("integer literal out of int32 range", self.lineno, col)
            return value
        if not _IDENT_RE.match(tok) or tok in _KEYWORDS:
            raise ParseError(f"expected operand, found {tok!r}", self.lineno, col)
        return tok

    def done(self) -> None:
        if self.index < len(self.tokens):
            tok, col = self.tokens[self.index]
            raise ParseError(f"trailing input {tok!r}", self.lineno, col)


def _parse_arg_list(cur: _Cursor) -> tuple[Operand, ...]:
    cur.expect("(")
    args: list[Operand] = []
    if cur.peek() == ")":
        cur.expect(")")
        return ()
    while True:
        args.append(cur.operand())
        tok, col = cur.next("',' or ')'")
        if tok == ")":
            return tuple(args)
        if tok != ",":
            raise ParseError(f"expected ',' or ')', found {tok!r}", cur.lineno, col)


def _parse_param_list(cur: _Cursor) -> tuple[str, ...]:
    cur.expect("(")
    params: list[str] = []
    if cur.peek() == ")":
        cur.expect(")")
        return ()
    while True:
        params.append(cur.ident("parameter name"))
        tok, col = cur.next("',' or ')'")
        if tok == ")":
            return tuple(params)
        if tok != ",":
            raise ParseError(f"expected ',' or ')', found {tok!r}", cur.lineno, col)


def _parse_terminator(cur: _Cursor) -> Terminator:
    head, col = cur.next()
    if head == "jmp":
        target = cur.ident("block id")
        cur.done()
        return Jump(target)
    if head == "ret":
        if cur.peek() is None:
            return Return(None)
        value = cur.operand()
        cur.done()
        return Return(value)
    if head == "br":
        cmp_tok, cmp_col = cur.next("comparison")
        if cmp_tok not in CMP_OPS:
            raise ParseError(f"expected comparison, found {cmp_tok!r}", cur.lineno, cmp_col)
        lhs = cur.operand()
        rhs = cur.operand()
        cur.expect("->")
        then_block = cur.ident("block id")
        cur.expect(",")
        else_block = cur.ident("block id")
        cur.done()
        return Branch(cmp_tok, lhs, rhs, then_block, else_block)
    raise ParseError(f"unknown terminator {head!r}", cur.lineno, col)


def _parse_instruction(cur: _Cursor) -> Instruction:
    head = cur.peek()
    if head == "print":
        cur.next()
        operand = cur.operand()
        cur.done()
        return Print(operand)
    if head == "call":
        cur.next()
        callee = cur.ident("function name")
        args = _parse_arg_list(cur)
        cur.done()
        return Call(None, callee, args)
    dest = cur.ident("destination")
    cur.expect("=")
    rhs_head = cur.peek()
    if rhs_head == "const":
        cur.next()
        value = cur.int_literal()
        cur.done()
        return Const(dest, value)
    if rhs_head == "input":
        cur.next()
        cur.done()
        return ReadInput(dest)
    if rhs_head == "call":
        cur.next()
        callee = cur.ident("function name")
        args = _parse_arg_list(cur)
        cur.done()
        return Call(dest, callee, args)
    lhs = cur.operand()
    op_tok, op_col = cur.next("operator")
    if op_tok not in BIN_OPS:
        raise ParseError(f"expected operator, found {op_tok!r}", cur.lineno, op_col)
    rhs = cur.operand()
    cur.done()
    return BinOp(dest, op_tok, lhs, rhs)


_TERMINATOR_HEADS = frozenset({"br", "jmp", "ret"})


def parse_program(text: str) -> Program:
    """Parse and validate textual IR.

    Raises ParseError with line/column on syntax errors and
    ValidationError (with the offending line where known) on semantic
    errors; a returned Program satisfies every structural invariant.
    """
    program_name: str | None = None
    functions: dict[str, Function] = {}
    source_map: dict[tuple[str, str, int], int] = {}

    cur_func: str | None = None
    cur_params: tuple[str, ...] = ()
    cur_blocks: dict[str, Block] = {}
    cur_block_id: str | None = None
    cur_block_line = 0
    cur_instrs: list[Instruction] = []
    cur_term: Terminator | None = None

    def flush_block(lineno: int) -> None:
        nonlocal cur_block_id, cur_instrs, cur_term
        if cur_block_id is None:
            return
        if cur_term is None:
            raise ParseError(
                f"block '{cur_block_id}' has no terminator", cur_block_line
            )
        if cur_block_id in cur_blocks:
            raise ParseError(f"duplicate block '{cur_block_id}'", cur_block_line)
        cur_blocks[cur_block_id] = Block(cur_block_id, tuple(cur_instrs), cur_term)
        cur_block_id = None
        cur_instrs = []
        cur_term = None

    def flush_func(lineno: int) -> None:
        nonlocal cur_func, cur_blocks
        if cur_func is None:
            return
        flush_block(lineno)
        if not cur_blocks:
            raise ParseError(f"function '{cur_func}' has no blocks", lineno)
        entry_block = next(iter(cur_blocks))
        if cur_func in functions:
            raise ParseError(f"duplicate function '{cur_func}'", lineno)
        functions[cur_func] = Function(cur_func, cur_params, cur_blocks, entry_block)
        cur_func = None
        cur_blocks = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cur = _Cursor(line, lineno)
        head = cur.peek()
        if head == "program":
            if program_name is not None:
                raise ParseError("duplicate 'program' header", lineno)
            if functions or cur_func is not None:
                raise ParseError("'program' header must come first", lineno)
            cur.next()
            program_name = cur.ident("program name")
            cur.done()
            continue
        if program_name is None:
            raise ParseError("expected 'program <name>' header", lineno)
        if head == "func":
            flush_func(lineno)
            cur.next()
            cur_func = cur.ident("function name")
            cur_params = _parse_param_list(cur)
            cur.done()
            continue
        if head == "block":
            if cur_func is None:
                raise ParseError("block outside of a function", lineno)
            flush_block(lineno)
            cur.next()
            cur_block_id = cur.ident("block id")
            cur.expect(":")
            cur.done()
            cur_block_line = lineno
            continue
        if cur_func is None or cur_block_id is None:
            raise ParseError("instruction outside of a block", lineno)
        if cur_term is not None:
            raise ParseError("instruction after terminator", lineno)
        if head in _TERMINATOR_HEADS:
            cur_term = _parse_terminator(cur)
            source_map[(cur_func, cur_block_id, -1)] = lineno
        else:
            source_map[(cur_func, cur_block_id, len(cur_instrs))] = lineno
            cur_instrs.append(_parse_instruction(cur))

    if program_name is None:
        raise ParseError("expected 'program <name>' header", max(1, text.count("\n") + 1))
    flush_func(text.count("\n") + 1)

    program = Program(program_name, functions)
    validate_program(program, source_map)
    return program


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_program(
    program: Program, source_map: dict[tuple[str, str, int], int] | None = None
) -> list[str]:
    """Check every structural invariant; return warnings for soft issues.

    Hard violations (missing entry, unknown callee, arity mismatch, bad
    branch targets, use of never-assigned operands) raise ValidationError.
    Unreachable blocks only produce warnings.
    """
    source_map = source_map or {}

    def line_of(func: str, block: str, index: int) -> int | None:
        return source_map.get((func, block, index))

    entry = program.functions.get(program.entry)
    if program.entry != ENTRY_FUNCTION or entry is None:
        raise ValidationError(f"missing entry function '{ENTRY_FUNCTION}'")
    if entry.params:
        raise ValidationError(f"entry function '{ENTRY_FUNCTION}' must take no parameters")

    warnings: list[str] = []
    for fname, func in program.functions.items():
        if func.entry_block not in func.blocks:
            raise ValidationError(
                f"function '{fname}': entry block '{func.entry_block}' does not exist"
            )
        dests_by_block: dict[str, set[str]] = {}
        for bid, block in func.blocks.items():
            dests: set[str] = set()
            for instr in block.instructions:
                dest = getattr(instr, "dest", None)
                if dest is not None:
                    dests.add(dest)
            dests_by_block[bid] = dests

        for bid, block in func.blocks.items():
            external = set(func.params)
            for other, dests in dests_by_block.items():
                if other != bid:
                    external |= dests

            def check_operand(op: Operand, assigned: set[str], index: int) -> None:
                if isinstance(op, str) and op not in assigned and op not in external:
                    raise ValidationError(
                        f"function '{fname}': operand '{op}' used before assignment",
                        line_of(fname, bid, index),
                    )

            assigned: set[str] = set(func.params)
            for index, instr in enumerate(block.instructions):
                if isinstance(instr, BinOp):
                    check_operand(instr.lhs, assigned, index)
                    check_operand(instr.rhs, assigned, index)
                elif isinstance(instr, Print):
                    check_operand(instr.operand, assigned, index)
                elif isinstance(instr, Call):
                    callee = program.functions.get(instr.callee)
                    if callee is None:
                        raise ValidationError(
                            f"unknown callee '{instr.callee}'", line_of(fname, bid, index)
                        )
                    if len(instr.args) != len(callee.params):
                        raise ValidationError(
                            f"call to '{instr.callee}' passes {len(instr.args)} "
                            f"arguments, expected {len(callee.params)}",
                            line_of(fname, bid, index),
                        )
                    for arg in instr.args:
                        check_operand(arg, assigned, index)
                dest = getattr(instr, "dest", None)
                if dest is not None:
                    assigned.add(dest)

            term = block.terminator
            if isinstance(term, Branch):
                for target in (term.then_block, term.else_block):
                    if target not in func.blocks:
                        raise ValidationError(
                            f"function '{fname}': branch target '{target}' does not exist",
                            line_of(fname, bid, -1),
                        )
                if term.then_block == term.else_block:
                    raise ValidationError(
                        f"function '{fname}': branch targets must be distinct",
                        line_of(fname, bid, -1),
                    )
                check_operand(term.lhs, assigned, -1)
                check_operand(term.rhs, assigned, -1)
            elif isinstance(term, Jump):
                if term.target not in func.blocks:
                    raise ValidationError(
                        f"function '{fname}': jump target '{term.target}' does not exist",
                        line_of(fname, bid, -1),
                    )
            elif isinstance(term, Return):
                if term.value is not None:
                    check_operand(term.value, assigned, -1)

        # Intra-function reachability: soft check only.
        seen = {func.entry_block}
        stack = [func.entry_block]
        while stack:
            block = func.blocks[stack.pop()]
            term = block.terminator
            targets: tuple[str, ...] = ()
            if isinstance(term, Branch):
                targets = (term.then_block, term.else_block)
            elif isinstance(term, Jump):
                targets = (term.target,)
            for target in targets:
                if target not in seen:
                    seen.add(target)
                    stack.append(target)
        for bid in func.blocks:
            if bid not in seen:
                warnings.append(f"function '{fname}': block '{bid}' is unreachable")

    return warnings


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt_operand(op: Operand) -> str:
    return str(op)


def _fmt_instruction(instr: Instruction) -> str:
    if isinstance(instr, Const):
        return f"{instr.dest} = const {instr.value}"
    if isinstance(instr, ReadInput):
        return f"{instr.dest} = input"
    if isinstance(instr, BinOp):
        return f"{instr.dest} = {_fmt_operand(instr.lhs)} {instr.op} {_fmt_operand(instr.rhs)}"
    if isinstance(instr, Call):
        args = ", ".join(_fmt_operand(a) for a in instr.args)
        call = f"call {instr.callee}({args})"
        return f"{instr.dest} = {call}" if instr.dest is not None else call
    if isinstance(instr, Print):
        return f"print {_fmt_operand(instr.operand)}"
    raise TypeError(f"not an instruction: {instr!r}")


def _fmt_terminator(term: Terminator) -> str:
    if isinstance(term, Branch):
        return (
            f"br {term.cmp} {_fmt_operand(term.lhs)} {_fmt_operand(term.rhs)}"
            f" -> {term.then_block}, {term.else_block}"
        )
    if isinstance(term, Jump):
        return f"jmp {term.target}"
    if isinstance(term, Return):
        return "ret" if term.value is None else f"ret {_fmt_operand(term.value)}"
    raise TypeError(f"not a terminator: {term!r}")


def serialize_program(program: Program) -> str:
    """Render a Program in the textual format.

    Round trip: ``parse_program(serialize_program(p))`` is structurally
    equal to ``p``, and serialization of the reparsed program is
    byte-identical.
    """
    lines = [f"program {program.name}", ""]
    for func in program.functions.values():
        lines.append(f"func {func.name}({', '.join(func.params)})")
        for block in func.blocks.values():
            lines.append(f"block {block.id}:")
            for instr in block.instructions:
                lines.append(f"  {_fmt_instruction(instr)}")
            lines.append(f"  {_fmt_terminator(block.terminator)}")
        lines.append("")
    return "\n".join(lines[:-1]) + "\n"


def count_branches(program: Program) -> int:
    """Number of two-way branch terminators in the program."""
    total = 0
    for func in program.functions.values():
        for block in func.blocks.values():
            if isinstance(block.terminator, Branch):
                total += 1
    return total
