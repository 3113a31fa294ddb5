"""
Compact MILP formulations of the QBPP, written as LP-format model files.

Nothing here solves a model. `evaluate_assignment` checks a formulation
against a given item-to-bin assignment instead: it derives every auxiliary
variable from the assignment, checks each constraint and returns the model
objective.

Variable names are 1-indexed:

    x_i_k       item i in bin k
    y_k         bin k used
    xh_i_j_k    items i < j both in bin k (FGW)
    xt_i_j_k    items i < j both in bin k, one variable per unordered pair
    z_i_j       items i < j share a bin
    r_j         item j is the smallest item of its bin
    zh_i_j      r_i * z_i_j

"""
import itertools
import logging
import re

import numpy as np

from .common import InputError, ParseError


logger = logging.getLogger(__name__)

TAGS = (
    QP,
    FGW,
    FGW_SB,
    EFGW,
    TWOA,
    TWOA_SB,
    E2A,
    R,
    ER
) = (
    'QP',
    'FGW',
    'FGW_SB',
    'EFGW',
    '2A',
    '2A_SB',
    'E2A',
    'R',
    'ER'
)

TAG_ALIASES = {
    'TWOA': TWOA,
    'TWOA_SB': TWOA_SB,
}

LINEAR_TAGS = tuple(t for t in TAGS if t != QP)
SYMMETRY_BREAKING_TAGS = (FGW_SB, EFGW, TWOA_SB, E2A)

KINDS = (
    BINARY,
    CONTINUOUS
) = (
    'binary',
    'continuous'
)

SENSES = (
    LE,
    GE,
    EQ
) = (
    '<=',
    '>=',
    '='
)

FEASIBILITY_TOL = 1e-9
LINE_WIDTH = 78


def normalize_tag(tag):
    value = str(tag).strip().upper()
    value = TAG_ALIASES.get(value, value)
    if value not in TAGS:
        raise InputError("Unknown formulation tag [%s]" % tag)
    return value


class Variable(object):

    def __init__(self, name, kind, lb, ub):
        self.name = name
        self.kind = kind
        self.lb = lb
        self.ub = ub

    def __eq__(self, other):
        return (self.name, self.kind, self.lb, self.ub) == \
            (other.name, other.kind, other.lb, other.ub)

    def __repr__(self):
        return "Variable(%s, %s, [%s, %s])" % (self.name, self.kind,
                                               self.lb, self.ub)


class Constraint(object):

    def __init__(self, name, family, terms, sense, rhs):
        self.name = name
        self.family = family
        self.terms = terms
        self.sense = sense
        self.rhs = rhs

    def __eq__(self, other):
        return (self.name, self.family, self.terms, self.sense,
                self.rhs) == (other.name, other.family, other.terms,
                              other.sense, other.rhs)

    def __repr__(self):
        return "Constraint(%s: %s %s %s)" % (self.name, self.terms,
                                             self.sense, self.rhs)


class CompiledModel(object):
    """
    Dense matrix view of a ModelIR.

    """
    def __init__(self, model):
        self.names = list(model.variables)
        self.index = {name: k for k, name in enumerate(self.names)}
        size = len(self.names)

        self.c = np.zeros(size)
        for name, coef in model.objective.items():
            self.c[self.index[name]] = coef
        self.Q = None
        if model.quadratic:
            self.Q = np.zeros((size, size))
            for (a, b), coef in model.quadratic.items():
                self.Q[self.index[a], self.index[b]] += coef

        rows = len(model.constraints)
        self.A = np.zeros((rows, size))
        self.rhs = np.zeros(rows)
        self.senses = []
        self.families = []
        for r, con in enumerate(model.constraints):
            for name, coef in con.terms.items():
                self.A[r, self.index[name]] = coef
            self.rhs[r] = con.rhs
            self.senses.append(con.sense)
            self.families.append(con.family)
        senses = np.array(self.senses)
        self.le = senses == LE
        self.ge = senses == GE
        self.eq = senses == EQ

        self.parsed = [_parse_name(name) for name in self.names]


class ModelIR(object):

    def __init__(self, tag):
        self.tag = tag
        self.variables = {}
        self.objective = {}
        self.quadratic = {}
        self.constraints = []
        self._constraint_names = set()
        self._compiled = None

    def add_variable(self, name, kind, lb=0, ub=None):
        if name in self.variables:
            raise InputError("Duplicate variable [%s]" % name)
        if kind == BINARY:
            lb, ub = 0, 1
        self.variables[name] = Variable(name, kind, lb, ub)
        self._compiled = None
        return name

    def add_constraint(self, name, family, terms, sense, rhs):
        if name in self._constraint_names:
            raise InputError("Duplicate constraint [%s]" % name)
        if sense not in SENSES:
            raise InputError("Unknown sense [%s]" % sense)
        for var in terms:
            if var not in self.variables:
                raise InputError("Constraint [%s] uses undeclared variable "
                                 "[%s]" % (name, var))
        terms = {var: coef for var, coef in terms.items() if coef != 0}
        self._constraint_names.add(name)
        self.constraints.append(Constraint(name, family, terms, sense, rhs))
        self._compiled = None

    def families(self):
        seen = []
        for con in self.constraints:
            if con.family not in seen:
                seen.append(con.family)
        return seen

    def constraints_of(self, family):
        return [con for con in self.constraints if con.family == family]

    def compile(self):
        if self._compiled is None:
            self._compiled = CompiledModel(self)
        return self._compiled


def _x(i, k):
    return "x_%d_%d" % (i + 1, k + 1)


def _pair(prefix, i, j, *rest):
    a, b = min(i, j), max(i, j)
    return "_".join([prefix] + [str(v + 1) for v in (a, b) + rest])


class _Builder(object):
    """
    Shared construction steps of the assignment-based formulations.

    """
    def __init__(self, inst, tag):
        self.inst = inst
        self.n = inst.n
        self.d = inst.dissim.tolist()
        self.model = ModelIR(tag)
        self.symmetry_breaking = tag in SYMMETRY_BREAKING_TAGS

    def pairs(self):
        return itertools.combinations(range(self.n), 2)

    def assignment_core(self):
        model = self.model
        n = self.n
        for i in range(n):
            for k in range(n):
                model.add_variable(_x(i, k), BINARY)
        if self.symmetry_breaking:
            self.opened = [_x(k, k) for k in range(n)]
        else:
            self.opened = [model.add_variable("y_%d" % (k + 1), BINARY)
                           for k in range(n)]
        for k in range(n):
            model.objective[self.opened[k]] = self.inst.bin_cost

        for i in range(n):
            model.add_constraint("part_%d" % (i + 1), "part",
                                 {_x(i, k): 1 for k in range(n)}, EQ, 1)
        for k in range(n):
            terms = {_x(i, k): self.inst.weights[i] for i in range(n)}
            terms[self.opened[k]] = terms.get(self.opened[k], 0) - \
                self.inst.capacity
            model.add_constraint("cap_%d" % (k + 1), "cap", terms, LE, 0)

        if self.symmetry_breaking:
            for i, k in self.pairs():
                model.add_constraint("sb1_%d_%d" % (i + 1, k + 1), "sb1",
                                     {_x(i, k): 1}, EQ, 0)
            for i, j in self.pairs():
                model.add_constraint("sb2_%d_%d" % (i + 1, j + 1), "sb2",
                                     {_x(j, i): 1, _x(i, i): -1}, LE, 0)

    def product_links(self, prefix, i, j, k, var, d):
        """
        Link var = x_i_k * x_j_k by sign of d: upper links for d < 0, the
        forcing row for d > 0.

        """
        model = self.model
        tail = (i + 1, j + 1, k + 1)
        if d < 0:
            model.add_constraint("%slink_%d_%d_%d_1" % ((prefix,) + tail),
                                 prefix + "link", {var: 1, _x(i, k): -1},
                                 LE, 0)
            model.add_constraint("%slink_%d_%d_%d_2" % ((prefix,) + tail),
                                 prefix + "link", {var: 1, _x(j, k): -1},
                                 LE, 0)
        elif d > 0:
            model.add_constraint("%sforce_%d_%d_%d" % ((prefix,) + tail),
                                 prefix + "force",
                                 {_x(i, k): 1, _x(j, k): 1, var: -1}, LE, 1)

    def pair_links(self, i, j, var, d):
        model = self.model
        for k in range(self.n):
            tail = (i + 1, j + 1, k + 1)
            if d < 0:
                model.add_constraint(
                    "zlink_%d_%d_%d_1" % tail, "zlink",
                    {var: 1, _x(i, k): 1, _x(j, k): -1}, LE, 1)
                model.add_constraint(
                    "zlink_%d_%d_%d_2" % tail, "zlink",
                    {var: 1, _x(i, k): -1, _x(j, k): 1}, LE, 1)
            elif d > 0:
                model.add_constraint(
                    "zforce_%d_%d_%d" % tail, "zforce",
                    {var: -1, _x(i, k): 1, _x(j, k): 1}, LE, 1)


def _add(terms, var, coef):
    terms[var] = terms.get(var, 0) + coef


def _build_qp(b):
    b.assignment_core()
    for i, j in b.pairs():
        d = b.d[i][j]
        if d:
            for k in range(b.n):
                b.model.quadratic[(_x(i, k), _x(j, k))] = d


def _build_fgw(b):
    b.assignment_core()
    for i, j in b.pairs():
        d = b.d[i][j]
        if not d:
            continue
        for k in range(b.n):
            var = b.model.add_variable(_pair("xh", i, j, k), CONTINUOUS, 0,
                                       None)
            b.model.objective[var] = d
            b.product_links("xh", i, j, k, var, d)


def _build_efgw(b):
    model = b.model
    n = b.n
    b.assignment_core()
    for i, j in b.pairs():
        for k in range(n):
            model.add_variable(_pair("xt", i, j, k), CONTINUOUS, 0, 1)

    def product(i, j, k):
        return _x(i, k) if i == j else _pair("xt", i, j, k)

    W = b.inst.capacity
    w = b.inst.weights
    for j in range(n):
        for k in range(n):
            first = {}
            second = {}
            for i in range(n):
                if i == j:
                    continue
                _add(first, product(i, j, k), w[i])
                _add(second, _x(i, k), w[i])
                _add(second, product(i, j, k), -w[i])
            _add(first, product(k, j, k), -W)
            _add(first, _x(j, k), w[j])
            _add(second, _x(k, k), -W)
            _add(second, product(k, j, k), W)
            model.add_constraint("rlt1_%d_%d" % (j + 1, k + 1), "rlt1",
                                 first, LE, 0)
            model.add_constraint("rlt2_%d_%d" % (j + 1, k + 1), "rlt2",
                                 second, LE, 0)

    for i, j in b.pairs():
        d = b.d[i][j]
        if not d:
            continue
        for k in range(n):
            var = _pair("xt", i, j, k)
            model.objective[var] = d
            b.product_links("xt", i, j, k, var, d)


def _build_2a(b):
    b.assignment_core()
    for i, j in b.pairs():
        d = b.d[i][j]
        if not d:
            continue
        var = b.model.add_variable(_pair("z", i, j), CONTINUOUS, 0, 1)
        b.model.objective[var] = d
        b.pair_links(i, j, var, d)


def _build_e2a(b):
    model = b.model
    n = b.n
    W = b.inst.capacity
    w = b.inst.weights
    b.assignment_core()

    for i, j in b.pairs():
        var = model.add_variable(_pair("z", i, j), CONTINUOUS, 0, 1)
        d = b.d[i][j]
        if d:
            model.objective[var] = d
            b.pair_links(i, j, var, d)

    # Only products with the bin's own item: x_k_k * x_j_k.
    for j, k in itertools.permutations(range(n), 2):
        model.add_variable(_pair("xt", j, k, k), CONTINUOUS, 0, 1)

    def product(j, k):
        return _x(k, k) if j == k else _pair("xt", j, k, k)

    for j in range(n):
        first = {}
        second = {}
        others = 0
        for i in range(n):
            if i == j:
                continue
            others += w[i]
            _add(first, _pair("z", i, j), w[i])
            _add(second, _pair("z", i, j), -w[i])
        for k in range(n):
            _add(first, product(j, k), -W)
            if k != j:
                _add(second, _x(k, k), -W)
                _add(second, product(j, k), W)
        model.add_constraint("agg1_%d" % (j + 1), "agg1", first, LE, -w[j])
        model.add_constraint("agg2_%d" % (j + 1), "agg2", second, LE,
                             -others)

    for j, k in itertools.permutations(range(n), 2):
        d = b.d[k][j]
        var = product(j, k)
        tail = (min(j, k) + 1, max(j, k) + 1, k + 1)
        if d < 0:
            model.add_constraint("xtlink_%d_%d_%d" % tail, "xtlink",
                                 {var: 1, _x(k, k): -1}, LE, 0)
        elif d > 0:
            model.add_constraint("xtforce_%d_%d_%d" % tail, "xtforce",
                                 {_x(k, k): 1, _x(j, k): 1, var: -1}, LE, 1)


def _build_r(b):
    model = b.model
    n = b.n
    W = b.inst.capacity
    w = b.inst.weights

    for j in range(n):
        var = model.add_variable("r_%d" % (j + 1), BINARY)
        model.objective[var] = b.inst.bin_cost
    for i, j in b.pairs():
        var = model.add_variable(_pair("z", i, j), BINARY)
        if b.d[i][j]:
            model.objective[var] = b.d[i][j]

    for i in range(n):
        terms = {_pair("z", i, j): w[j] for j in range(i + 1, n)}
        model.add_constraint("cap_%d" % (i + 1), "cap", terms, LE, W - w[i])

    for i, j, k in itertools.combinations(range(n), 3):
        zij, zik, zjk = _pair("z", i, j), _pair("z", i, k), _pair("z", j, k)
        tail = (i + 1, j + 1, k + 1)
        model.add_constraint("tri1_%d_%d_%d" % tail, "tri1",
                             {zij: 1, zik: 1, zjk: -1}, LE, 1)
        model.add_constraint("tri2_%d_%d_%d" % tail, "tri2",
                             {zij: 1, zjk: 1, zik: -1}, LE, 1)
        model.add_constraint("tri3_%d_%d_%d" % tail, "tri3",
                             {zik: 1, zjk: 1, zij: -1}, LE, 1)

    for i, j in b.pairs():
        model.add_constraint("repl_%d_%d" % (i + 1, j + 1), "repl",
                             {"r_%d" % (j + 1): 1, _pair("z", i, j): 1},
                             LE, 1)
    for j in range(n):
        terms = {"r_%d" % (j + 1): 1}
        terms.update((_pair("z", i, j), 1) for i in range(j))
        model.add_constraint("repg_%d" % (j + 1), "repg", terms, GE, 1)


def _build_er(b):
    _build_r(b)
    model = b.model
    n = b.n
    for i, j in b.pairs():
        model.add_variable(_pair("zh", i, j), CONTINUOUS, 0, 1)
    for j in range(n):
        terms = {"r_%d" % (j + 1): 1}
        terms.update((_pair("zh", i, j), 1) for i in range(j))
        model.add_constraint("repe_%d" % (j + 1), "repe", terms, EQ, 1)
    for i, j in b.pairs():
        zh, z, r = _pair("zh", i, j), _pair("z", i, j), "r_%d" % (i + 1)
        tail = (i + 1, j + 1)
        model.add_constraint("zhlink_%d_%d_1" % tail, "zhlink",
                             {zh: 1, r: -1}, LE, 0)
        model.add_constraint("zhlink_%d_%d_2" % tail, "zhlink",
                             {zh: 1, z: -1}, LE, 0)
        model.add_constraint("zhforce_%d_%d" % tail, "zhforce",
                             {r: 1, z: 1, zh: -1}, LE, 1)


BUILDERS = {
    QP: _build_qp,
    FGW: _build_fgw,
    FGW_SB: _build_fgw,
    EFGW: _build_efgw,
    TWOA: _build_2a,
    TWOA_SB: _build_2a,
    E2A: _build_e2a,
    R: _build_r,
    ER: _build_er,
}


def build_model(inst, tag):
    tag = normalize_tag(tag)
    builder = _Builder(inst, tag)
    BUILDERS[tag](builder)
    model = builder.model
    logger.debug("Built %s: %d variables, %d constraints" %
                 (tag, len(model.variables), len(model.constraints)))
    return model


def _num(value):
    if float(value).is_integer():
        return "%d" % value
    return repr(float(value))


def _linear(terms):
    tokens = []
    for k, (var, coef) in enumerate(terms):
        if coef < 0:
            tokens.append("-")
        elif k:
            tokens.append("+")
        magnitude = abs(coef)
        tokens.append(var if magnitude == 1 else
                      "%s %s" % (_num(magnitude), var))
    return tokens


def _wrap(head, tokens):
    """
    Join tokens after `head`, continuing long statements on lines indented
    by four spaces.

    """
    lines = []
    current = head
    for token in tokens:
        candidate = "%s %s" % (current, token) if current else token
        if len(candidate) > LINE_WIDTH and current and current != head:
            lines.append(current)
            candidate = "    " + token
        current = candidate
    lines.append(current)
    return lines


def write_lp_file(model):
    """
    The model in LP format: Minimize, Subject To, Bounds, Binary, End.

    """
    if model.quadratic and model.tag != QP:
        raise InputError("Quadratic objective terms under tag %s" %
                         model.tag)

    lines = ["Minimize"]
    objective = sorted((v, c) for v, c in model.objective.items() if c)
    if not objective:
        objective = [(sorted(model.variables)[0], 0)]
    tokens = _linear(objective)
    if model.quadratic:
        quad = sorted(model.quadratic.items())
        inner = []
        for k, ((a, b), coef) in enumerate(quad):
            doubled = 2 * coef
            if k or doubled < 0:
                inner.append("-" if doubled < 0 else "+")
            inner.append("%s %s * %s" % (_num(abs(doubled)), a, b))
        tokens += ["+", "["] + inner + ["]", "/", "2"]
    lines.extend(_wrap(" obj:", tokens))

    lines.append("Subject To")
    for con in model.constraints:
        terms = list(con.terms.items())
        if not terms:
            terms = [(sorted(model.variables)[0], 0)]
        tokens = _linear(terms) + [con.sense, _num(con.rhs)]
        lines.extend(_wrap(" %s:" % con.name, tokens))

    bounds = []
    binaries = []
    for name in sorted(model.variables):
        var = model.variables[name]
        if var.kind == BINARY:
            binaries.append(name)
        elif var.ub is None and var.lb == 0:
            continue
        elif var.ub is None:
            bounds.append(" %s >= %s" % (name, _num(var.lb)))
        else:
            bounds.append(" %s <= %s <= %s" % (_num(var.lb), name,
                                               _num(var.ub)))
    lines.append("Bounds")
    lines.extend(bounds)
    if binaries:
        lines.append("Binary")
        lines.extend(_wrap("", binaries))
    lines.append("End")

    return "\n".join(lines) + "\n"


_TOKEN = re.compile(r"\s*(<=|>=|=<|=>|[A-Za-z_][A-Za-z0-9_.]*|"
                    r"\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+|[-+*/\[\]:=<>^])")

SECTIONS = {
    "minimize": "objective",
    "minimum": "objective",
    "min": "objective",
    "subject to": "constraints",
    "such that": "constraints",
    "st": "constraints",
    "s.t.": "constraints",
    "bounds": "bounds",
    "binary": "binary",
    "binaries": "binary",
    "bin": "binary",
    "end": "end",
}


def _tokens(text, lineno):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match:
            raise ParseError(lineno, "unexpected text [%s]" % text[pos:])
        tokens.append(match.group(1))
        pos = match.end()
    return tokens


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def _parse_expression(tokens, lineno):
    """
    Linear terms (and an optional `[ ... ] / 2` block) from `tokens`.

    """
    linear = {}
    quadratic = {}
    k = 0
    sign = 1.0
    coef = None
    in_quad = False
    pending = []
    while k < len(tokens):
        token = tokens[k]
        if token in ("+", "-"):
            sign = -1.0 if token == "-" else 1.0
        elif _is_number(token):
            coef = float(token)
        elif token == "[":
            in_quad = True
        elif token == "]":
            in_quad = False
            if tokens[k + 1:k + 3] != ["/", "2"]:
                raise ParseError(lineno, "expected ] / 2")
            for (a, b), value in pending:
                quadratic[(a, b)] = quadratic.get((a, b), 0) + value / 2
            pending = []
            k += 2
        elif token == "*":
            pass
        elif in_quad:
            if k + 2 >= len(tokens) or tokens[k + 1] != "*":
                raise ParseError(lineno, "expected a product term")
            value = sign * (1.0 if coef is None else coef)
            pending.append(((token, tokens[k + 2]), value))
            k += 2
            sign, coef = 1.0, None
        else:
            value = sign * (1.0 if coef is None else coef)
            linear[token] = linear.get(token, 0) + value
            sign, coef = 1.0, None
        k += 1
    return linear, quadratic


def _clean(value):
    return int(value) if float(value).is_integer() else value


def read_lp_file(text, tag=None):
    """
    Parse the LP subset produced by `write_lp_file`.

    """
    section = None
    statements = {"objective": [], "constraints": [], "bounds": [],
                  "binary": []}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in SECTIONS:
            section = SECTIONS[key]
            if section == "end":
                break
            continue
        if section is None:
            raise ParseError(lineno, "text before the objective section")
        if raw.startswith("    ") and statements[section]:
            statements[section][-1][1].append(line)
        else:
            statements[section].append((lineno, [line]))

    model = ModelIR(tag)
    declared = {}

    def declare(name):
        declared.setdefault(name, (CONTINUOUS, 0, None))

    objective = {}
    quadratic = {}
    for lineno, parts in statements["objective"]:
        tokens = _tokens(" ".join(parts), lineno)
        if len(tokens) > 1 and tokens[1] == ":":
            tokens = tokens[2:]
        linear, quad = _parse_expression(tokens, lineno)
        objective.update(linear)
        quadratic.update(quad)
    for name in objective:
        declare(name)
    for a, b in quadratic:
        declare(a)
        declare(b)

    rows = []
    for lineno, parts in statements["constraints"]:
        tokens = _tokens(" ".join(parts), lineno)
        if len(tokens) < 2 or tokens[1] != ":":
            raise ParseError(lineno, "constraints must be named")
        name = tokens[0]
        body = tokens[2:]
        senses = [k for k, t in enumerate(body)
                  if t in ("<=", ">=", "=", "=<", "=>", "<", ">")]
        if len(senses) != 1:
            raise ParseError(lineno, "expected one relation in [%s]" % name)
        at = senses[0]
        sense = {"=<": LE, "<": LE, "=>": GE, ">": GE}.get(body[at],
                                                          body[at])
        rhs_tokens = body[at + 1:]
        try:
            rhs = float("".join(rhs_tokens))
        except ValueError:
            raise ParseError(lineno, "bad right-hand side in [%s]" % name)
        linear, _ = _parse_expression(body[:at], lineno)
        for var in linear:
            declare(var)
        rows.append((name, linear, sense, rhs))

    for lineno, parts in statements["bounds"]:
        tokens = _tokens(" ".join(parts), lineno)
        if len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
            declared[tokens[2]] = (CONTINUOUS, _clean(float(tokens[0])),
                                   _clean(float(tokens[4])))
        elif len(tokens) == 3 and tokens[1] == ">=":
            declared[tokens[0]] = (CONTINUOUS, _clean(float(tokens[2])),
                                   None)
        elif len(tokens) == 3 and tokens[1] == "<=":
            declared[tokens[0]] = (CONTINUOUS, 0, _clean(float(tokens[2])))
        else:
            raise ParseError(lineno, "unsupported bound")
    for lineno, parts in statements["binary"]:
        for name in " ".join(parts).split():
            declared[name] = (BINARY, 0, 1)

    for name in sorted(declared):
        kind, lb, ub = declared[name]
        model.add_variable(name, kind, lb, ub)
    for name, coef in objective.items():
        if coef:
            model.objective[name] = _clean(coef)
    for pair, coef in quadratic.items():
        model.quadratic[pair] = _clean(coef)
    for name, linear, sense, rhs in rows:
        terms = {var: _clean(coef) for var, coef in linear.items()}
        model.add_constraint(name, name.split("_", 1)[0], terms, sense,
                             _clean(rhs))
    return model


def _parse_name(name):
    prefix, _, rest = name.partition("_")
    try:
        indices = tuple(int(v) - 1 for v in rest.split("_")) if rest else ()
    except ValueError:
        indices = ()
    return prefix, indices


def canonical_assignment(assignment):
    """
    Relabel bins by their smallest item.

    """
    smallest = {}
    for i, k in enumerate(assignment):
        smallest.setdefault(k, i)
    return [smallest[k] for k in assignment]


def _derive(prefix, idx, a, reps, used):
    if prefix == "x":
        return a[idx[0]] == idx[1]
    if prefix == "y":
        return idx[0] in used
    if prefix in ("xh", "xt"):
        i, j, k = idx
        return a[i] == k and a[j] == k
    if prefix == "z":
        return a[idx[0]] == a[idx[1]]
    if prefix == "r":
        return reps[a[idx[0]]] == idx[0]
    if prefix == "zh":
        i, j = idx
        return reps[a[i]] == i and a[i] == a[j]
    raise InputError("Cannot derive a value for variable kind [%s]" % prefix)


def evaluate_assignment(model, assignment, tol=FEASIBILITY_TOL):
    """
    Check `model` at the point induced by `assignment` (item -> 0-based
    bin).

    Returns `(feasible, objective)` where `feasible` maps each constraint
    family to whether all its rows hold.

    """
    a = list(assignment)
    n = len(a)
    if any(not 0 <= k < n for k in a):
        raise InputError("Bins must be numbered 0..%d" % (n - 1))
    if model.tag in SYMMETRY_BREAKING_TAGS:
        a = canonical_assignment(a)

    reps = {}
    for i, k in enumerate(a):
        reps.setdefault(k, i)
    used = set(a)

    compiled = model.compile()
    values = np.array([float(_derive(prefix, idx, a, reps, used))
                       for prefix, idx in compiled.parsed])

    lhs = compiled.A @ values
    ok = np.ones(len(lhs), dtype=bool)
    ok[compiled.le] = lhs[compiled.le] <= compiled.rhs[compiled.le] + tol
    ok[compiled.ge] = lhs[compiled.ge] >= compiled.rhs[compiled.ge] - tol
    ok[compiled.eq] = np.abs(lhs[compiled.eq] -
                             compiled.rhs[compiled.eq]) <= tol

    feasible = {}
    for family, good in zip(compiled.families, ok):
        feasible[family] = feasible.get(family, True) and bool(good)

    objective = float(compiled.c @ values)
    if compiled.Q is not None:
        objective += float(values @ compiled.Q @ values)
    if objective.is_integer():
        objective = int(objective)
    return feasible, objective


def export_filename(instance_path, tag):
    base = instance_path
    if base.endswith(".qbpp"):
        base = base[:-len(".qbpp")]
    return "%s.%s.lp" % (base, normalize_tag(tag))
