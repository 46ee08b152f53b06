"""Line-oriented parser for decision models and fact files.

Model files declare sorts, environment variables and decision tables;
fact files restrict variables to exact values or value subsets. All
diagnostics carry line and column numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .kernel import Sort, Value, Vocabulary, VocabularyError, build_vocabulary, interval_sort
from .tables import (
    AnyValue,
    CellConstraint,
    DecisionTable,
    DRD,
    EMPTY_FACTS,
    FactSet,
    NotKnown,
    NotKnownThat,
    OrConstraint,
    Range,
    TableError,
    TableRow,
    ValueTest,
    compose_drd,
)

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
NUMBER = re.compile(r"-?\d+$")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Model:
    vocabulary: Vocabulary
    drd: DRD
    facts: Optional[FactSet]

    @property
    def tables(self):
        return self.drd.tables

    def sole_table(self) -> DecisionTable:
        if len(self.drd.tables) != 1:
            names = ", ".join(t.name for t in self.drd.tables)
            raise TableError(f"model has several tables ({names}); pick one")
        return self.drd.tables[0]

    def table(self, name: Optional[str]) -> DecisionTable:
        return self.drd.table(name) if name else self.sole_table()


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _split_csv(text: str, line_no: int) -> list[str]:
    parts = [p.strip() for p in text.split(",")]
    if any(not p for p in parts):
        raise ParseError("empty item in comma-separated list", line_no)
    return parts


def _check_ident(name: str, what: str, line_no: int) -> str:
    if not IDENT.match(name):
        raise ParseError(f"invalid {what} name {name!r}", line_no)
    return name


def parse_model(text: str) -> Model:
    """Parse a full model file into (vocabulary, tables, optional facts)."""
    sorts: dict[str, Sort] = {}
    sort_order: list[Sort] = []
    var_decls: list[tuple[str, str, str]] = []
    tables: list[DecisionTable] = []
    fact_lines: list[tuple[int, str]] = []

    lines = text.splitlines()
    i = 0
    n = len(lines)

    def err(msg: str, line_no: int, col: int = 1):
        raise ParseError(msg, line_no, col)

    while i < n:
        raw = lines[i]
        line = _strip_comment(raw).strip()
        line_no = i + 1
        if not line:
            i += 1
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()

        if head == "sort":
            name, eq, spec = rest.partition("=")
            name = name.strip()
            spec = spec.strip()
            _check_ident(name, "sort", line_no)
            if not eq:
                err(f"sort {name}: expected '='", line_no)
            if name in sorts:
                err(f"duplicate sort {name}", line_no)
            try:
                if spec.startswith("{"):
                    if not spec.endswith("}"):
                        err(f"sort {name}: expected closing '}}'", line_no)
                    inner = spec[1:-1].strip()
                    if not inner:
                        err(f"sort {name}: empty domain", line_no)
                    values = _split_csv(inner, line_no)
                    sorts[name] = Sort(name, tuple(values))
                elif ".." in spec:
                    lo, hi = spec.split("..", 1)
                    if not (NUMBER.match(lo.strip()) and NUMBER.match(hi.strip())):
                        err(f"sort {name}: interval bounds must be integers", line_no)
                    sorts[name] = interval_sort(name, int(lo), int(hi))
                else:
                    err(f"sort {name}: expected '{{values}}' or 'lo..hi'", line_no)
            except VocabularyError as e:
                err(str(e), line_no)
            sort_order.append(sorts[name])
            i += 1

        elif head == "var":
            name, colon, sort_name = rest.partition(":")
            name = name.strip()
            sort_name = sort_name.strip()
            _check_ident(name, "variable", line_no)
            if not colon or not sort_name:
                err(f"var {name}: expected ': SortName'", line_no)
            if sort_name not in sorts:
                err(f"var {name}: unknown sort {sort_name}", line_no)
            var_decls.append((name, "const", sort_name))
            i += 1

        elif head == "table":
            i = _parse_table(lines, i, sorts, var_decls, tables, err)

        elif head in ("know",) or ("=" in line or " in " in line) and head not in (
            "sort", "var", "table",
        ):
            fact_lines.append((line_no, line))
            i += 1
        else:
            err(f"unexpected directive {head!r}", line_no)

    decls = list(var_decls)
    for t in tables:
        out_var, out_sort = t.output
        if any(name == out_var for name, _, _ in decls):
            raise ParseError(f"table {t.name}: output {out_var} clashes with another symbol", n)
        decls.append((out_var, "const", out_sort.name))
    try:
        vocab = build_vocabulary(sort_order, decls)
    except VocabularyError as e:
        raise ParseError(str(e), n) from None
    try:
        drd = compose_drd(tables, vocab)
    except (TableError, VocabularyError) as e:
        raise ParseError(str(e), n) from None

    facts = None
    if fact_lines:
        facts = _parse_fact_lines(fact_lines, vocab)
    return Model(vocab, drd, facts)


def _parse_table(lines, i, sorts, var_decls, tables, err) -> int:
    line_no = i + 1
    line = _strip_comment(lines[i]).strip()
    m = re.match(r"table\s+(\w+)\s+hit\s+(\S+)$", line)
    if not m:
        err("expected 'table Name hit A|U'", line_no)
    name, policy = m.group(1), m.group(2)
    policy = {"A": "A", "Any": "A", "U": "U", "Unique": "U"}.get(policy)
    if policy is None:
        err(f"table {name}: unsupported hit policy {m.group(2)!r} (only A/U)", line_no)
    if any(t.name == name for t in tables):
        err(f"duplicate table {name}", line_no)

    decls = {v: s for v, _, s in var_decls}
    out_decls = {t.output[0]: t.output[1].name for t in tables}
    inputs: list[tuple[str, Sort]] = []
    output: Optional[tuple[str, Sort]] = None
    rows: list[tuple[int, list[str]]] = []

    i += 1
    while i < len(lines):
        raw = _strip_comment(lines[i]).strip()
        line_no = i + 1
        if not raw:
            i += 1
            continue
        head, _, rest = raw.partition(" ")
        rest = rest.strip()
        if head == "inputs":
            for v in _split_csv(rest, line_no):
                if v in decls:
                    inputs.append((v, sorts[decls[v]]))
                elif v in out_decls:
                    inputs.append((v, sorts[out_decls[v]]))
                else:
                    err(f"table {name}: unknown input variable {v}", line_no)
            i += 1
        elif head == "output":
            var, colon, sort_name = rest.partition(":")
            var, sort_name = var.strip(), sort_name.strip()
            if not colon or sort_name not in sorts:
                err(f"table {name}: output needs 'var : Sort'", line_no)
            output = (var, sorts[sort_name])
            out_decls[var] = sort_name
            i += 1
        elif head == "row":
            rows.append((line_no, _split_csv(rest, line_no)))
            i += 1
        else:
            break  # next top-level directive

    if not inputs:
        err(f"table {name}: missing 'inputs'", line_no)
    if output is None:
        err(f"table {name}: missing 'output'", line_no)

    parsed_rows = []
    for row_line, cells in rows:
        if len(cells) != len(inputs) + 1:
            err(
                f"table {name}: row arity mismatch: {len(cells)} cells for "
                f"{len(inputs)} inputs + output",
                row_line,
            )
        constraints = [
            parse_cell(cell, sort, row_line) for cell, (_, sort) in zip(cells, inputs)
        ]
        out_value = _parse_value(cells[-1], output[1], row_line)
        parsed_rows.append(TableRow(tuple(constraints), out_value))
    try:
        tables.append(DecisionTable(name, policy, tuple(inputs), output, tuple(parsed_rows)))
    except TableError as e:
        err(str(e), line_no)
    return i


def _parse_value(token: str, sort: Sort, line_no: int) -> Value:
    token = token.strip()
    if sort.numeric:
        if not NUMBER.match(token):
            raise ParseError(f"expected an integer of sort {sort.name}, got {token!r}", line_no)
        v: Value = int(token)
    else:
        v = token
    if v not in sort:
        raise ParseError(f"value {token!r} not in sort {sort.name}", line_no)
    return v


def parse_cell(text: str, sort: Sort, line_no: int = 1) -> CellConstraint:
    """Cell grammar: `-` | value | test | `lo..hi` | `!K` | `!K[ C ]` | C `|` C."""
    text = text.strip()
    if not text:
        raise ParseError("empty cell", line_no)
    parts = _split_top_level_or(text, line_no)
    if len(parts) > 1:
        out = _parse_single(parts[0], sort, line_no)
        for p in parts[1:]:
            out = OrConstraint(out, _parse_single(p, sort, line_no))
        return out
    return _parse_single(text, sort, line_no)


def _split_top_level_or(text: str, line_no: int) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ']'", line_no)
        if ch == "|" and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise ParseError("unbalanced '['", line_no)
    parts.append("".join(cur).strip())
    if any(not p for p in parts):
        raise ParseError("empty alternative in '|' constraint", line_no)
    return parts


def _parse_single(text: str, sort: Sort, line_no: int) -> CellConstraint:
    if text == "-":
        return AnyValue()
    if text == "!K":
        return NotKnown()
    if text.startswith("!K["):
        if not text.endswith("]"):
            raise ParseError("expected closing ']' after !K[", line_no)
        inner = text[3:-1].strip()
        if not inner or inner == "-" or inner == "!K" or inner.startswith("!K["):
            raise ParseError("!K[..] needs a value-level constraint", line_no)
        return NotKnownThat(parse_cell(inner, sort, line_no))
    for op in ("<=", ">=", "!=", "<", ">", "="):
        if text.startswith(op):
            value = _parse_value(text[len(op):], sort, line_no)
            if op in ("<", "<=", ">", ">=") and not sort.numeric:
                raise ParseError(f"order comparison on non-numeric sort {sort.name}", line_no)
            return ValueTest(op, value)
    if ".." in text and sort.numeric:
        lo, hi = text.split("..", 1)
        if NUMBER.match(lo.strip()) and NUMBER.match(hi.strip()):
            return Range(int(lo), int(hi))
        raise ParseError(f"bad range {text!r}", line_no)
    return ValueTest("=", _parse_value(text, sort, line_no))


def parse_facts(text: str, vocab: Vocabulary) -> FactSet:
    """Facts: one `var = value` or `var in {v1, v2}` per line (or ';'-separated).

    Repeated restrictions on one variable intersect; an empty intersection
    marks the knowledge as inconsistent.
    """
    fact_lines: list[tuple[int, str]] = []
    for idx, raw in enumerate(text.splitlines()):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        for piece in line.split(";"):
            piece = piece.strip()
            if piece:
                fact_lines.append((idx + 1, piece))
    return _parse_fact_lines(fact_lines, vocab)


def _parse_fact_lines(fact_lines: list[tuple[int, str]], vocab: Vocabulary) -> FactSet:
    facts = EMPTY_FACTS
    for line_no, line in fact_lines:
        m = re.match(r"(\w+)\s+in\s+\{(.*)\}$", line)
        if m:
            var, inner = m.group(1), m.group(2).strip()
            if not inner:
                raise ParseError(f"{var}: empty value set", line_no)
            values = _split_csv(inner, line_no)
        else:
            var, eq, value = line.partition("=")
            var, value = var.strip(), value.strip()
            if not eq or not value:
                raise ParseError(f"expected 'var = value' or 'var in {{..}}', got {line!r}", line_no)
            values = [value]
        if not vocab.has_symbol(var):
            raise ParseError(f"unknown variable {var}", line_no)
        sort = vocab.constant_sort(var)
        parsed = [_parse_value(v, sort, line_no) for v in values]
        facts = facts.restrict(var, parsed)
    return facts


def render_table(t: DecisionTable) -> str:
    """Table back to DSL text (cells in the same grammar the parser reads)."""
    lines = [f"table {t.name} hit {t.hit_policy}"]
    lines.append("  inputs " + ", ".join(v for v, _ in t.inputs))
    lines.append(f"  output {t.output[0]} : {t.output[1].name}")
    for row in t.rows:
        from .tables import render_constraint

        cells = [render_constraint(c) for c in row.cells]
        lines.append("  row " + ", ".join(cells + [str(row.output)]))
    return "\n".join(lines) + "\n"
