"""Problem-file parser, expression parser and renderer.

The grammar is documented in ``docs/grammar.md``.  Expressions use shift
offsets relative to the base point (``u[1,0]``), ``(-1)^(m+n)`` for parity
signs and ``a(n-2)`` for declared coefficient functions.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import re

from . import expr as E
from .errors import DadjError, ParseError

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^()\[\],])
""", re.VERBOSE)


@dataclass
class Header:
    """Names an expression may reference."""

    lattice: tuple = ("n",)
    components: tuple = ("u",)
    adjoints: tuple = ("v",)
    parameters: tuple = ()
    functions: tuple = ()

    @property
    def dimension(self):
        return len(self.lattice)


def default_lattice_names(p):
    if p == 1:
        return ("n",)
    if p == 2:
        return ("m", "n")
    return tuple(f"n{i + 1}" for i in range(p))


def default_adjoint_names(components):
    if tuple(components) == ("u",):
        return ("v",)
    return tuple(f"v_{c}" for c in components)


@dataclass
class VerifySettings:
    steps: int = 20
    orbits: int = 5
    seed: int = 0
    low: int = -9
    high: int = 9
    origin: int = 1
    parameters: dict = field(default_factory=dict)


@dataclass
class ProblemFile:
    header: Header
    equations: list
    equation_lines: list = field(default_factory=list)
    solve_for: list = field(default_factory=list)
    symmetries: dict = field(default_factory=dict)
    substitutions: dict = field(default_factory=dict)
    laws: dict = field(default_factory=dict)
    verify: VerifySettings = field(default_factory=VerifySettings)

    @property
    def dimension(self):
        return self.header.dimension


# -- expression parser ------------------------------------------------------

def _tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", column=pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append((kind, m.group(), pos + 1))
        pos = m.end()
    toks.append(("end", "", len(text) + 1))
    return toks


class _ExprParser:
    def __init__(self, text, header):
        self.toks = _tokenize(text)
        self.i = 0
        self.h = header
        self.lattice_index = {name: i for i, name in enumerate(header.lattice)}

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, col = self.take()
        if text != value:
            shown = text or "end of input"
            raise ParseError(f"expected {value!r}, found {shown!r}", column=col)

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, column=tok[2])

    def parse(self):
        e = self.expression()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return e

    def expression(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op[1] == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    self.error("division by zero", op)
                e = e / rhs
        return e

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[1] not in ("^", "**"):
            return base
        op = self.take()
        if self.peek()[1] == "(":
            self.take()
            exponent = self.expression()
            self.expect(")")
        else:
            exponent = self.unary()
        if exponent.is_constant():
            q = exponent.as_fraction()
            if q.denominator != 1:
                self.error(f"non-integer exponent {q}", op)
            if base.is_zero() and q < 0:
                self.error("division by zero", op)
            return base ** q.numerator
        if base == E.const(-1):
            return self._parity(exponent, op)
        self.error("non-integer exponent", op)

    def _parity(self, exponent, tok):
        # exponent must be c0 + sum c_i n^i with integer coefficients
        if not exponent.is_polynomial():
            self.error("parity exponent must be linear in the lattice symbols", tok)
        coeffs = [0] * self.h.dimension
        offset = 0
        for m, c in exponent.num.items():
            if m == ():
                offset = c
            elif len(m) == 1 and m[0][1] == 1 and m[0][0][0] == E.LATTICE:
                coeffs[m[0][0][1]] = c
            else:
                self.error("parity exponent must be linear in the lattice symbols", tok)
        if exponent.den != {(): 1}:
            self.error("parity exponent must have integer coefficients", tok)
        return E.parity(coeffs, self.h.lattice, offset)

    def primary(self):
        kind, text, col = self.peek()
        if kind == "num":
            self.take()
            return E.const(Fraction(text))
        if text == "(":
            self.take()
            e = self.expression()
            self.expect(")")
            return e
        if kind == "name":
            self.take()
            return self.named(text, col)
        if kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {text!r}")

    def _shift(self):
        self.expect("[")
        vals = []
        while True:
            sign = 1
            if self.peek()[1] in ("-", "+"):
                sign = -1 if self.take()[1] == "-" else 1
            kind, text, col = self.take()
            if kind != "num" or not text.isdigit():
                raise ParseError("shift offsets must be integers", column=col)
            vals.append(sign * int(text))
            if self.peek()[1] == ",":
                self.take()
                continue
            break
        self.expect("]")
        return tuple(vals)

    def named(self, name, col):
        h = self.h
        if name in self.lattice_index:
            return E.lattice_symbol(self.lattice_index[name], name)
        if name in h.parameters:
            return E.param(name)
        if name in h.components or name in h.adjoints:
            cls = E.U if name in h.components else E.V
            if self.peek()[1] == "[":
                tok = self.peek()
                shift = self._shift()
                if len(shift) != h.dimension:
                    raise ParseError(
                        f"{name}{list(shift)} has {len(shift)} offsets but the lattice "
                        f"dimension is {h.dimension}", column=tok[2])
            else:
                shift = (0,) * h.dimension
            return E.dep(name, shift, cls)
        if name in h.functions:
            return E.func(name, self._function_args(name), h.lattice)
        raise ParseError(f"unknown name {name!r}", column=col)

    def _function_args(self, name):
        self.expect("(")
        shift = [0] * self.h.dimension
        seen = 0
        while True:
            tok = self.peek()
            arg = self.expression()
            if not arg.is_polynomial():
                raise ParseError(f"argument of {name} must be n^i + offset", column=tok[2])
            offset = arg.num.get((), 0)
            lin = [m for m in arg.num if m != ()]
            if (len(lin) != 1 or len(lin[0]) != 1 or lin[0][0][1] != 1
                    or lin[0][0][0][0] != E.LATTICE or arg.num[lin[0]] != 1
                    or lin[0][0][0][1] != seen):
                raise ParseError(
                    f"argument {seen + 1} of {name} must be {self.h.lattice[seen]} + offset",
                    column=tok[2])
            shift[seen] = offset
            seen += 1
            if self.peek()[1] == ",":
                self.take()
                continue
            break
        self.expect(")")
        if seen != self.h.dimension:
            self.error(f"{name} takes {self.h.dimension} lattice arguments")
        return tuple(shift)


def parse_expr(text, context=None):
    """Parse one expression against a :class:`Header` (or ProblemFile)."""
    header = _header_of(context)
    try:
        return _ExprParser(text, header).parse()
    except ParseError:
        raise
    except DadjError as exc:
        raise ParseError(str(exc)) from exc


def _header_of(context):
    if context is None:
        return Header()
    if isinstance(context, ProblemFile):
        return context.header
    return context


def parse_equation(text, context=None):
    """``lhs = rhs`` becomes ``lhs - rhs``; a bare expression is taken as is."""
    if text.count("=") > 1:
        raise ParseError("more than one '=' in equation")
    if "=" in text:
        lhs, rhs = text.split("=")
        left = parse_expr(lhs, context)
        try:
            right = parse_expr(rhs, context)
        except ParseError as exc:
            col = None if exc.column is None else exc.column + len(lhs) + 1
            raise ParseError(exc.message, column=col) from None
        return left - right
    return parse_expr(text, context)


# -- renderer -----------------------------------------------------------------

def _atom_str(key):
    kind = key[0]
    if kind in (E.LATTICE,):
        return key[2]
    if kind == E.PARAM:
        return key[1]
    if kind == E.DEP:
        return f"{key[2]}[{','.join(str(j) for j in key[3])}]"
    if kind == E.FUNC:
        args = []
        for name, j in zip(key[2], key[3]):
            args.append(name if j == 0 else f"{name}{j:+d}")
        return f"{key[1]}({', '.join(args)})"
    raise ValueError(key)


def _mono_parts(mono):
    signs = [k[2] for k, _ in mono if k[0] == E.SIGN]
    factors = []
    rest = sorted(((k, e) for k, e in mono if k[0] != E.SIGN), reverse=True)
    # lattice symbols and parameters read better first
    rest.sort(key=lambda ke: 0 if ke[0][0] in (E.LATTICE, E.PARAM, E.FUNC) else 1)
    if signs:
        factors.append(f"(-1)^({'+'.join(signs)})")
    for k, e in rest:
        s = _atom_str(k)
        factors.append(s if e == 1 else f"{s}^{e}")
    return factors


def _term_order(mono):
    degree = sum(e for _, e in mono)
    expanded = sorted((k for k, e in mono for _ in range(e)), reverse=True)
    return (degree, expanded)


def _poly_str(p):
    if not p:
        return "0"
    monos = sorted(p, key=_term_order, reverse=True)
    out = []
    for i, m in enumerate(monos):
        c = p[m]
        factors = _mono_parts(m)
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def _is_single_factor(p):
    if len(p) != 1:
        return False
    ((m, c),) = p.items()
    if m == ():
        return c > 0
    return c == 1 and len(_mono_parts(m)) == 1


def render(e):
    """Text form that parses back to the same canonical expression."""
    e = E.as_expr(e)
    num = _poly_str(e.num)
    if e.den == {(): 1}:
        return num
    if len(e.num) > 1 or (len(e.num) == 1 and next(iter(e.num.values())) < 0
                          and next(iter(e.num)) != ()):
        num = f"({num})"
    den = _poly_str(e.den)
    if not _is_single_factor(e.den):
        den = f"({den})"
    return f"{num}/{den}"


# -- problem files ------------------------------------------------------------

_SECTIONS = ("system", "symmetries", "substitutions", "laws", "verify")


def _logical_lines(text):
    """Yield (section, key, value, line, value_column) with continuations."""
    section = None
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace() and current is not None:
            current[2] += " " + line.strip()
            continue
        if current is not None:
            yield tuple(current)
            current = None
        stripped = line.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError("unterminated section header", line=lineno, column=1)
            section = stripped[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ParseError(f"unknown section [{section}]", line=lineno, column=1)
            continue
        if section is None:
            raise ParseError("content before the first section", line=lineno, column=1)
        m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*[=:]\s*", line)
        if not m:
            raise ParseError("expected 'key = value'", line=lineno, column=1)
        current = [section, m.group(1), line[m.end():], lineno, m.end() + 1]
    if current is not None:
        yield tuple(current)


def _names(value):
    return tuple(x.strip() for x in value.split(",") if x.strip())


def _infer_dimension(equations):
    for text, lineno, col in equations:
        m = re.search(r"[A-Za-z_][A-Za-z0-9_]*\s*\[([^\]]*)\]", text)
        if m:
            return m.group(1).count(",") + 1
    return 1


def _located(lineno, col, fn, *args):
    try:
        return fn(*args)
    except ParseError as exc:
        column = None if exc.column is None else exc.column + col - 1
        raise ParseError(exc.message, line=lineno, column=column) from None


def _split_entries(value, lineno, col):
    """Split ``a; key: b; ...`` into [(key or None, text, column)]."""
    out = []
    offset = 0
    for part in value.split(";"):
        stripped = part.strip()
        start = col + offset + (len(part) - len(part.lstrip()))
        offset += len(part) + 1
        if not stripped:
            continue
        m = re.match(r"([A-Za-z_][A-Za-z0-9_]*(?:\[[^\]]*\])?)\s*:\s*", stripped)
        if m:
            out.append((m.group(1), stripped[m.end():], start + m.end()))
        else:
            out.append((None, stripped, start))
    return out


def parse_problem(text):
    """Parse a problem file into a :class:`ProblemFile`."""
    from .symmetry import Characteristic

    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"file is not valid UTF-8 ({exc.reason})") from None
    lines = list(_logical_lines(text))
    system = {}
    equations = []
    solves = []
    for section, key, value, lineno, col in lines:
        if section != "system":
            continue
        if key == "equation" or key == "equations":
            equations.append((value, lineno, col))
        elif key == "solve":
            solves.append((value, lineno, col))
        elif key in ("dimension", "lattice", "components", "adjoint", "adjoints",
                     "parameters", "functions"):
            system[key] = (value, lineno)
        else:
            raise ParseError(f"unknown key {key!r} in [system]", line=lineno, column=1)
    if not equations:
        raise ParseError("no equations")

    if "lattice" in system:
        lattice = _names(system["lattice"][0])
    else:
        if "dimension" in system:
            value, lineno = system["dimension"]
            if not value.strip().isdigit() or int(value) < 1:
                raise ParseError("dimension must be a positive integer", line=lineno)
            p = int(value)
        else:
            p = _infer_dimension(equations)
        lattice = default_lattice_names(p)
    if "dimension" in system and int(system["dimension"][0]) != len(lattice):
        raise ParseError("dimension disagrees with lattice names", line=system["dimension"][1])
    components = _names(system["components"][0]) if "components" in system else ("u",)
    adj_entry = system.get("adjoint") or system.get("adjoints")
    adjoints = _names(adj_entry[0]) if adj_entry else default_adjoint_names(components)
    if len(adjoints) != len(components):
        raise ParseError("one adjoint name per component required", line=adj_entry[1])
    header = Header(
        lattice=lattice,
        components=components,
        adjoints=adjoints,
        parameters=_names(system["parameters"][0]) if "parameters" in system else (),
        functions=_names(system["functions"][0]) if "functions" in system else (),
    )
    _check_names(header)

    eqs = [_located(ln, col, parse_equation, txt, header) for txt, ln, col in equations]
    for (txt, ln, col), eq in zip(equations, eqs):
        bad = eq.dep_atoms(cls=E.V)
        if bad:
            raise ParseError("equations may not reference adjoint variables", line=ln)
    solve_for = []
    for txt, ln, col in solves:
        atom = _located(ln, col, parse_expr, txt, header)
        try:
            key = E.key_of(atom)
        except ValueError:
            raise ParseError("solve must name a single dependent atom", line=ln, column=col) from None
        if key[0] != E.DEP or key[1] != E.U:
            raise ParseError("solve must name a dependent atom", line=ln, column=col)
        solve_for.append(key)
    if solve_for and len(solve_for) != len(eqs):
        raise ParseError("give one 'solve' per equation", line=solves[0][1])

    problem = ProblemFile(header=header, equations=eqs,
                          equation_lines=[ln for _, ln, _ in equations],
                          solve_for=solve_for)

    for section, key, value, lineno, col in lines:
        if section == "symmetries":
            if key in problem.symmetries:
                raise ParseError(f"duplicate symmetry name {key!r}", line=lineno, column=1)
            problem.symmetries[key] = _parse_characteristic(key, value, lineno, col, header,
                                                             Characteristic)
        elif section == "substitutions":
            if key in problem.substitutions:
                raise ParseError(f"duplicate substitution name {key!r}", line=lineno, column=1)
            problem.substitutions[key] = _parse_substitution(value, lineno, col, header)
        elif section == "laws":
            if key in problem.laws:
                raise ParseError(f"duplicate law name {key!r}", line=lineno, column=1)
            entries = _split_entries(value, lineno, col)
            if len(entries) != header.dimension:
                raise ParseError(f"law {key!r} needs {header.dimension} flux components",
                                 line=lineno)
            problem.laws[key] = tuple(_located(lineno, c, parse_expr, t, header)
                                      for _, t, c in entries)
        elif section == "verify":
            _parse_verify(problem.verify, key, value, lineno, col, header)
    return problem


def _check_names(h):
    seen = {}
    for kind, names in (("lattice", h.lattice), ("component", h.components),
                        ("adjoint", h.adjoints), ("parameter", h.parameters),
                        ("function", h.functions)):
        for name in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                raise ParseError(f"invalid {kind} name {name!r}")
            if name in seen:
                raise ParseError(f"name {name!r} declared as {seen[name]} and {kind}")
            seen[name] = kind


def _parse_characteristic(name, value, lineno, col, header, Characteristic):
    entries = _split_entries(value, lineno, col)
    comps = {}
    params = {}
    for target, text, c in entries:
        e = _located(lineno, c, parse_expr, text, header)
        if target is None:
            if len(header.components) != 1:
                raise ParseError("name the component for each characteristic entry",
                                 line=lineno, column=c)
            target = header.components[0]
        if target in header.components:
            comps[target] = e
        elif target in header.parameters:
            params[target] = e
        else:
            raise ParseError(f"unknown characteristic target {target!r}", line=lineno, column=c)
    return Characteristic({k: comps.get(k, E.ZERO) for k in header.components}, params, name)


def _parse_substitution(value, lineno, col, header):
    bindings = {}
    for target, text, c in _split_entries(value, lineno, col):
        if target is None:
            raise ParseError("substitution entries read 'target: expression'",
                             line=lineno, column=c)
        atom = _located(lineno, c, parse_expr, target, header)
        try:
            key = E.key_of(atom)
        except ValueError:
            raise ParseError(f"invalid substitution target {target!r}", line=lineno, column=c) from None
        bindings[key] = _located(lineno, c, parse_expr, text, header)
    return bindings


def _parse_verify(settings, key, value, lineno, col, header):
    value = value.strip()
    try:
        if key in ("steps", "orbits", "seed", "origin"):
            setattr(settings, key, int(value))
        elif key == "range":
            lo, hi = value.split("..")
            settings.low, settings.high = int(lo), int(hi)
            if settings.low > settings.high:
                raise ValueError
        elif key == "parameters":
            for target, text, c in _split_entries(value.replace(",", ";"), lineno, col):
                if target not in header.parameters:
                    raise ParseError(f"unknown parameter {target!r}", line=lineno, column=c)
                settings.parameters[target] = parse_expr(text, Header()).as_fraction()
        else:
            raise ParseError(f"unknown key {key!r} in [verify]", line=lineno, column=1)
    except (ValueError, DadjError) as exc:
        if isinstance(exc, ParseError) and exc.line is not None:
            raise
        raise ParseError(f"invalid value for {key!r}", line=lineno, column=col) from None
