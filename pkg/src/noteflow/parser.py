"""Statement parsing into a normalized IR.

Supported grammar subset: assignments (incl. tuple / augmented / subscript
targets), attribute and method chains, subscripts, top-level function calls,
binary operators and bare expressions. Anything else degrades to an Unparsed
statement that still occupies its line id; parsing never raises.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

# Receiver marker for the result of the previous call in a chain.
RESULT = "<chain>"

PARSED = "parsed"
UNPARSED = "unparsed"

# Keyword arguments whose string values name columns.
_COLUMN_KWARGS = frozenset({
    "on", "left_on", "right_on", "by", "columns", "subset", "column",
    "id_vars", "value_vars", "index", "values", "key", "items" ,
})

# Functions whose leading positional string arguments name columns.
_COLUMN_ARG_FUNCS = frozenset({
    "groupby", "sort_values", "drop", "melt", "pivot", "pivot_table",
    "explode", "set_index", "getitem", "setitem",
})

_BINOP_NAMES = {
    ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Div: "truediv",
    ast.FloorDiv: "floordiv", ast.Mod: "mod", ast.Pow: "pow",
    ast.MatMult: "matmul", ast.BitAnd: "and", ast.BitOr: "or", ast.BitXor: "xor",
}

# Pandas accessor attributes that are namespaces, not columns.
_ACCESSORS = frozenset({"str", "dt", "cat", "loc", "iloc", "at", "iat"})


@dataclass(frozen=True)
class ArgValue:
    """Static summary of one argument expression."""
    kind: str                      # str|num|bool|none|name|str_list|list|dict|slice|compare|expr
    text: str
    value: object = None           # literal payload when statically known
    names: tuple[str, ...] = ()    # identifiers referenced inside the expression


@dataclass(frozen=True)
class AtomicCall:
    receiver: str                  # variable name, RESULT, or "" for plain function calls
    func_name: str
    args: tuple[ArgValue, ...] = ()
    kwargs: tuple[tuple[str, ArgValue], ...] = ()
    column_refs: tuple[str, ...] = ()

    def kwarg(self, name: str) -> ArgValue | None:
        for key, val in self.kwargs:
            if key == name:
                return val
        return None


@dataclass(frozen=True)
class StatementIR:
    cell_epoch: int
    line_id: int                   # 1-based first physical line of the logical statement
    targets: tuple[str, ...]
    calls: tuple[AtomicCall, ...]  # decomposed chain, evaluation order
    display_expr: bool
    raw: str
    parse_status: str
    inplace_ambiguous: bool = False


def split_statements(source_lines) -> list[tuple[int, str]]:
    """Join physical lines into logical statements, keyed by first physical line.

    Falls back to stripping magics / shell escapes on a syntax error, and
    finally to one statement per non-blank line so malformed cells still
    occupy stable line ids.
    """
    text = "\n".join(source_lines)
    for attempt in (text, _strip_magics(source_lines)):
        try:
            tree = ast.parse(attempt)
        except SyntaxError:
            continue
        lines = attempt.split("\n")
        out = []
        for node in tree.body:
            raw = "\n".join(lines[node.lineno - 1:node.end_lineno])
            out.append((node.lineno, raw))
        return out
    return [(i + 1, line) for i, line in enumerate(source_lines) if line.strip()]


def _strip_magics(source_lines) -> str:
    kept = []
    for line in source_lines:
        stripped = line.lstrip()
        if stripped.startswith(("%", "!", "?")):
            kept.append("")
        else:
            kept.append(line)
    return "\n".join(kept)


def parse_statement(raw: str, cell_epoch: int, line_id: int) -> StatementIR:
    """Parse one logical line; unsupported syntax degrades to Unparsed."""
    try:
        tree = ast.parse(raw)
    except SyntaxError:
        return _unparsed(raw, cell_epoch, line_id)
    if len(tree.body) != 1:
        return _unparsed(raw, cell_epoch, line_id)
    node = tree.body[0]
    try:
        ir = _parse_node(node, raw, cell_epoch, line_id)
    except _Unsupported:
        ir = _unparsed(raw, cell_epoch, line_id)
    return ir


def decompose_chain(ir: StatementIR) -> tuple[AtomicCall, ...]:
    """The statement's atomic calls in evaluation order."""
    return ir.calls


def referenced_variables(ir: StatementIR) -> set[str]:
    """Variable names the statement reads (receivers and argument names)."""
    out = set()
    for call in ir.calls:
        if call.receiver not in (RESULT, ""):
            out.add(call.receiver)
        for arg in call.args:
            out.update(arg.names)
        for _, arg in call.kwargs:
            out.update(arg.names)
    return out


class _Unsupported(Exception):
    pass


def _unparsed(raw, cell_epoch, line_id) -> StatementIR:
    return StatementIR(cell_epoch=cell_epoch, line_id=line_id, targets=(),
                       calls=(), display_expr=False, raw=raw, parse_status=UNPARSED)


def _parse_node(node, raw, cell_epoch, line_id) -> StatementIR:
    calls: list[AtomicCall] = []
    targets: list[str] = []
    display = False

    if isinstance(node, (ast.Assign, ast.AnnAssign)):
        value = node.value
        if value is None:
            raise _Unsupported
        _decompose(value, calls, value_position=True)
        if not calls and isinstance(value, ast.Name):
            # Pure alias `df2 = df`: give the flow an edge to classify.
            calls.append(AtomicCall(receiver=value.id, func_name="alias"))
        target_nodes = node.targets if isinstance(node, ast.Assign) else [node.target]
        for tgt in target_nodes:
            targets.extend(_parse_target(tgt, calls))
    elif isinstance(node, ast.AugAssign):
        if not isinstance(node.target, ast.Name):
            raise _Unsupported
        recv, _ = _decompose(node.value, calls, value_position=True)
        op = _BINOP_NAMES.get(type(node.op))
        if op is None:
            raise _Unsupported
        calls.append(AtomicCall(receiver=node.target.id, func_name=op,
                                args=(_summarize(node.value),)))
        targets.append(node.target.id)
    elif isinstance(node, ast.Expr):
        display = True
        recv, had_calls = _decompose(node.value, calls, value_position=True)
        if not had_calls:
            if isinstance(node.value, ast.Name):
                # Bare variable display; give the registry a hook.
                calls.append(AtomicCall(receiver=node.value.id, func_name="display"))
            else:
                raise _Unsupported
    elif isinstance(node, (ast.For, ast.While, ast.If, ast.With, ast.Try)):
        # Opaque block: only the tables before and after matter; targets are
        # every variable assigned anywhere inside.
        targets.extend(sorted(_assigned_names(node)))
        if not targets:
            raise _Unsupported
    else:
        # defs, imports, del, etc: recorded as no-ops occupying the line id
        raise _Unsupported

    inplace = any(_is_true_kwarg(c, "inplace") for c in calls)
    if inplace:
        display = False
        for call in calls:
            if _is_true_kwarg(call, "inplace") and call.receiver not in (RESULT, ""):
                if call.receiver not in targets:
                    targets.append(call.receiver)
    if display:
        targets = []
    if not calls and not targets:
        raise _Unsupported
    return StatementIR(cell_epoch=cell_epoch, line_id=line_id, targets=tuple(targets),
                       calls=tuple(calls), display_expr=display, raw=raw,
                       parse_status=PARSED, inplace_ambiguous=inplace)


def _is_true_kwarg(call: AtomicCall, name: str) -> bool:
    val = call.kwarg(name)
    return val is not None and val.kind == "bool" and val.value is True


def _parse_target(tgt, calls) -> list[str]:
    if isinstance(tgt, ast.Name):
        return [tgt.id]
    if isinstance(tgt, (ast.Tuple, ast.List)):
        names = []
        for elt in tgt.elts:
            if isinstance(elt, ast.Starred):
                elt = elt.value
            if isinstance(elt, ast.Name):
                names.append(elt.id)
        if not names:
            raise _Unsupported
        return names
    if isinstance(tgt, ast.Subscript):
        base, _ = _receiver_of(tgt.value, calls)
        key = _summarize(tgt.slice)
        _harvest_subcalls(tgt.slice, calls)
        calls.append(AtomicCall(receiver=base, func_name="setitem", args=(key,),
                                column_refs=_refs_from_key(tgt.slice)))
        return [base] if base not in (RESULT, "") else []
    if isinstance(tgt, ast.Attribute):
        base, _ = _receiver_of(tgt.value, calls)
        calls.append(AtomicCall(receiver=base, func_name="setattr",
                                args=(ArgValue(kind="str", text=repr(tgt.attr), value=tgt.attr),)))
        return [base] if base not in (RESULT, "") else []
    raise _Unsupported


def _decompose(node, calls, value_position: bool) -> tuple[str, bool]:
    """Flatten an expression into atomic calls; returns (receiver marker, had_calls)."""
    if isinstance(node, ast.Name):
        return node.id, False
    if isinstance(node, ast.Constant):
        return "", False
    if isinstance(node, ast.Call):
        func = node.func
        if isinstance(func, ast.Attribute):
            recv, _ = _receiver_of(func.value, calls)
            fname = func.attr
        elif isinstance(func, ast.Name):
            recv, fname = "", func.id
        else:
            raise _Unsupported
        args, kwargs, refs = [], [], []
        for arg in node.args:
            _harvest_subcalls(arg, calls)
            args.append(_summarize(arg))
        for kw in node.keywords:
            if kw.arg is None:
                continue
            _harvest_subcalls(kw.value, calls)
            kwargs.append((kw.arg, _summarize(kw.value)))
        refs = _collect_column_refs(fname, args, kwargs)
        calls.append(AtomicCall(receiver=recv, func_name=fname, args=tuple(args),
                                kwargs=tuple(kwargs), column_refs=tuple(refs)))
        return RESULT, True
    if isinstance(node, ast.Subscript):
        recv, _ = _receiver_of(node.value, calls)
        _harvest_subcalls(node.slice, calls)
        key = _summarize(node.slice)
        calls.append(AtomicCall(receiver=recv, func_name="getitem", args=(key,),
                                column_refs=_refs_from_key(node.slice)))
        return RESULT, True
    if isinstance(node, ast.Attribute):
        recv, _ = _receiver_of(node.value, calls)
        if value_position:
            # Bare attribute display such as `df.T`.
            calls.append(AtomicCall(receiver=recv, func_name=node.attr))
            return RESULT, True
        return recv, False
    if value_position and isinstance(node, ast.BinOp):
        op = _BINOP_NAMES.get(type(node.op))
        if op is None:
            raise _Unsupported
        recv, _ = _decompose(node.left, calls, value_position=True)
        _harvest_subcalls(node.right, calls)
        calls.append(AtomicCall(receiver=recv, func_name=op,
                                args=(_summarize(node.right),)))
        return RESULT, True
    if value_position and isinstance(node, (ast.Compare, ast.BoolOp, ast.UnaryOp,
                                            ast.IfExp, ast.Tuple, ast.List, ast.Dict)):
        _harvest_subcalls(node, calls)
        return "", bool(calls)
    raise _Unsupported


def _receiver_of(node, calls) -> tuple[str, bool]:
    """Resolve the base of an attribute path, decomposing call/subscript bases."""
    while isinstance(node, ast.Attribute):
        node = node.value
    if isinstance(node, ast.Name):
        return node.id, False
    if isinstance(node, (ast.Call, ast.Subscript)):
        return _decompose(node, calls, value_position=False)[0], True
    if isinstance(node, ast.Constant):
        return "", False
    raise _Unsupported


def _harvest_subcalls(node, calls) -> None:
    """Decompose call/subscript expressions nested inside argument positions."""
    if isinstance(node, (ast.Call, ast.Subscript)):
        _decompose(node, calls, value_position=False)
        return
    for child in ast.iter_child_nodes(node):
        _harvest_subcalls(child, calls)


def _summarize(node) -> ArgValue:
    text = _unparse(node)
    names = tuple(sorted({n.id for n in ast.walk(node) if isinstance(n, ast.Name)}))
    if isinstance(node, ast.Constant):
        v = node.value
        if isinstance(v, bool):
            return ArgValue(kind="bool", text=text, value=v)
        if v is None:
            return ArgValue(kind="none", text=text)
        if isinstance(v, (int, float)):
            return ArgValue(kind="num", text=text, value=v)
        if isinstance(v, str):
            return ArgValue(kind="str", text=text, value=v)
        return ArgValue(kind="expr", text=text)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub) and \
            isinstance(node.operand, ast.Constant) and isinstance(node.operand.value, (int, float)):
        return ArgValue(kind="num", text=text, value=-node.operand.value)
    if isinstance(node, ast.Name):
        return ArgValue(kind="name", text=text, value=node.id, names=names)
    if isinstance(node, (ast.List, ast.Tuple)):
        elems = [e.value for e in node.elts
                 if isinstance(e, ast.Constant) and isinstance(e.value, str)]
        if len(elems) == len(node.elts) and node.elts:
            return ArgValue(kind="str_list", text=text, value=tuple(elems), names=names)
        return ArgValue(kind="list", text=text, names=names)
    if isinstance(node, ast.Dict):
        pairs = {}
        for k, v in zip(node.keys, node.values):
            if isinstance(k, ast.Constant) and isinstance(k.value, str) and \
                    isinstance(v, ast.Constant) and isinstance(v.value, str):
                pairs[k.value] = v.value
        return ArgValue(kind="dict", text=text,
                        value=pairs if len(pairs) == len(node.keys) else None, names=names)
    if isinstance(node, ast.Slice):
        return ArgValue(kind="slice", text=text, names=names)
    if isinstance(node, (ast.Compare, ast.BoolOp)) or (
            isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.Invert, ast.Not))):
        return ArgValue(kind="compare", text=text, names=names)
    if isinstance(node, ast.BinOp) and _mask_operands(node):
        return ArgValue(kind="compare", text=text, names=names)
    return ArgValue(kind="expr", text=text, names=names)


def _mask_operands(node: ast.BinOp) -> bool:
    # (df.a > 0) & (df.b < 1): bitwise combinators over comparisons
    if not isinstance(node.op, (ast.BitAnd, ast.BitOr)):
        return False
    def is_masky(n):
        if isinstance(n, (ast.Compare, ast.BoolOp)):
            return True
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, ast.Invert):
            return True
        if isinstance(n, ast.BinOp):
            return _mask_operands(n)
        return False
    return is_masky(node.left) or is_masky(node.right)


def _refs_from_key(key) -> tuple[str, ...]:
    summ = _summarize(key)
    if summ.kind == "str":
        return (summ.value,)
    if summ.kind == "str_list":
        return tuple(summ.value)
    if isinstance(key, ast.Tuple):
        # loc-style (rows, cols) keys: harvest the column half
        refs = []
        for elt in key.elts:
            refs.extend(_refs_from_key(elt))
        return tuple(refs)
    return ()


def _collect_column_refs(fname, args, kwargs) -> list[str]:
    refs: list[str] = []
    if fname in _COLUMN_ARG_FUNCS:
        for arg in args:
            if arg.kind == "str":
                refs.append(arg.value)
            elif arg.kind == "str_list":
                refs.extend(arg.value)
    for key, val in kwargs:
        if key not in _COLUMN_KWARGS:
            continue
        if val.kind == "str":
            refs.append(val.value)
        elif val.kind == "str_list":
            refs.extend(val.value)
        elif val.kind == "dict" and val.value:
            refs.extend(val.value.keys())
            refs.extend(val.value.values())
    seen, out = set(), []
    for ref in refs:
        if ref not in seen:
            seen.add(ref)
            out.append(ref)
    return out


def _assigned_names(node) -> set[str]:
    names = set()
    for child in ast.walk(node):
        if isinstance(child, ast.Assign):
            for tgt in child.targets:
                names.update(_target_names(tgt))
        elif isinstance(child, (ast.AugAssign, ast.AnnAssign, ast.For)):
            tgt = child.target
            names.update(_target_names(tgt))
    return names


def _target_names(tgt) -> set[str]:
    out = set()
    if isinstance(tgt, ast.Name):
        out.add(tgt.id)
    elif isinstance(tgt, (ast.Tuple, ast.List)):
        for elt in tgt.elts:
            out.update(_target_names(elt))
    elif isinstance(tgt, ast.Starred):
        out.update(_target_names(tgt.value))
    elif isinstance(tgt, (ast.Subscript, ast.Attribute)):
        base = tgt.value
        while isinstance(base, ast.Attribute):
            base = base.value
        if isinstance(base, ast.Name):
            out.add(base.id)
    return out


def _unparse(node) -> str:
    try:
        return ast.unparse(node)
    except Exception:
        return "<expr>"
