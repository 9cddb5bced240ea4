"""Finitely generated groups with canonical normal forms.

Every model exposes a fixed, ordered, symmetric generating set.  Elements are
immutable Python values (ints and tuples) so they hash and compare exactly:
two canonical forms are equal iff they denote the same group element.

Generator order per family (this order drives BFS discovery order):

* ``FreeAbelian(n)``: e1, -e1, e2, -e2, ...
* ``Heisenberg``: a, b, a^-1, b^-1 with a = (1,0,0), b = (0,1,0)
* ``FreeGroup(k)``: x1, x1^-1, x2, x2^-1, ...
* ``Lamplighter``: t, t^-1, s
* ``FiniteCyclic(m)``: 1, m-1 (deduplicated, identity dropped)
* ``DirectProduct(G, H)``: (s, e) for s in G, then (e, s) for s in H
"""

from __future__ import annotations

import string
from abc import ABC, abstractmethod

from .errors import ElementOverflowError, InvalidElementError, InvalidInputError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


def _i64(x: int) -> int:
    if x < INT64_MIN or x > INT64_MAX:
        raise ElementOverflowError(f"value {x} leaves the signed 64-bit range")
    return x


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


class GroupModel(ABC):
    """A finitely generated group with a symmetric generating set."""

    name: str
    generators: tuple

    @abstractmethod
    def identity(self): ...

    @abstractmethod
    def mul(self, a, b):
        """Unchecked product; callers guarantee canonical inputs."""

    @abstractmethod
    def inv(self, a):
        """Unchecked inverse."""

    @abstractmethod
    def is_canonical(self, a) -> bool: ...

    @abstractmethod
    def format(self, a) -> str: ...

    def validate(self, a):
        if not self.is_canonical(a):
            raise InvalidElementError(f"{a!r} is not a canonical element of {self.name}")
        return a

    def multiply(self, a, b):
        return self.mul(self.validate(a), self.validate(b))

    def inverse(self, a):
        return self.inv(self.validate(a))

    def word_length(self, a) -> int:
        """Exact word length for families with a closed form."""
        raise NotImplementedError(f"no closed-form word length for {self.name}")

    @property
    def has_word_length(self) -> bool:
        try:
            self.word_length(self.identity())
        except NotImplementedError:
            return False
        return True

    def generator_names(self) -> list[str]:
        return [self.format(s) for s in self.generators]

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.name == other.name

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.name))


class FreeAbelian(GroupModel):
    def __init__(self, n: int):
        if not _is_int(n) or n < 1:
            raise InvalidInputError(f"free abelian rank must be a positive integer, got {n!r}")
        self.n = n
        self.name = f"free-abelian:{n}"
        gens = []
        for i in range(n):
            for sign in (1, -1):
                v = [0] * n
                v[i] = sign
                gens.append(tuple(v))
        self.generators = tuple(gens)

    def identity(self):
        return (0,) * self.n

    def mul(self, a, b):
        return tuple(_i64(x + y) for x, y in zip(a, b))

    def inv(self, a):
        return tuple(_i64(-x) for x in a)

    def is_canonical(self, a) -> bool:
        return (
            isinstance(a, tuple)
            and len(a) == self.n
            and all(_is_int(x) and INT64_MIN <= x <= INT64_MAX for x in a)
        )

    def format(self, a) -> str:
        return "(" + ",".join(str(x) for x in a) + ")"

    def word_length(self, a) -> int:
        return sum(abs(x) for x in a)


class Heisenberg(GroupModel):
    """Integer Heisenberg group; (a, b, c) is [[1, a, c], [0, 1, b], [0, 0, 1]]."""

    name = "heisenberg"

    def __init__(self):
        self.generators = ((1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0))

    def identity(self):
        return (0, 0, 0)

    def mul(self, a, b):
        return (_i64(a[0] + b[0]), _i64(a[1] + b[1]), _i64(a[2] + b[2] + a[0] * b[1]))

    def inv(self, a):
        return (_i64(-a[0]), _i64(-a[1]), _i64(a[0] * a[1] - a[2]))

    def is_canonical(self, a) -> bool:
        return (
            isinstance(a, tuple)
            and len(a) == 3
            and all(_is_int(x) and INT64_MIN <= x <= INT64_MAX for x in a)
        )

    def format(self, a) -> str:
        return "(" + ",".join(str(x) for x in a) + ")"


class FreeGroup(GroupModel):
    """Free group on k letters; a word is a tuple of nonzero ints, -i meaning x_i^-1."""

    def __init__(self, k: int):
        if not _is_int(k) or k < 1:
            raise InvalidInputError(f"free group rank must be a positive integer, got {k!r}")
        self.k = k
        self.name = f"free:{k}"
        self.generators = tuple((s * i,) for i in range(1, k + 1) for s in (1, -1))

    def identity(self):
        return ()

    def mul(self, a, b):
        # cancel the longest suffix of a against the prefix of b
        i = 0
        la = len(a)
        lb = len(b)
        while i < la and i < lb and a[la - 1 - i] == -b[i]:
            i += 1
        return a[: la - i] + b[i:]

    def inv(self, a):
        return tuple(-x for x in reversed(a))

    def is_canonical(self, a) -> bool:
        if not isinstance(a, tuple):
            return False
        prev = 0
        for x in a:
            if not _is_int(x) or x == 0 or abs(x) > self.k or x == -prev:
                return False
            prev = x
        return True

    def letter(self, x: int) -> str:
        if self.k <= 26:
            c = string.ascii_lowercase[abs(x) - 1]
            return c if x > 0 else c.upper()
        return f"x{x}" if x > 0 else f"X{-x}"

    def format(self, a) -> str:
        if not a:
            return "e"
        return "".join(self.letter(x) for x in a)

    def word_length(self, a) -> int:
        return len(a)


class Lamplighter(GroupModel):
    """Z/2 wr Z; an element is (sorted lit-lamp positions, cursor)."""

    name = "lamplighter"

    def __init__(self):
        self.generators = (((), 1), ((), -1), ((0,), 0))

    def identity(self):
        return ((), 0)

    def mul(self, a, b):
        lamps_a, ca = a
        shifted = {p + ca for p in b[0]}
        lit = set(lamps_a).symmetric_difference(shifted)
        return (tuple(sorted(_i64(p) for p in lit)), _i64(ca + b[1]))

    def inv(self, a):
        lamps, c = a
        return (tuple(sorted(_i64(p - c) for p in lamps)), _i64(-c))

    def is_canonical(self, a) -> bool:
        if not (isinstance(a, tuple) and len(a) == 2):
            return False
        lamps, c = a
        if not (isinstance(lamps, tuple) and _is_int(c)):
            return False
        if not all(_is_int(p) for p in lamps):
            return False
        return all(x < y for x, y in zip(lamps, lamps[1:]))

    def format(self, a) -> str:
        lamps, c = a
        return "{" + ",".join(str(p) for p in lamps) + "}@" + str(c)

    def word_length(self, a) -> int:
        lamps, c = a
        lo = min(0, c, *lamps) if lamps else min(0, c)
        hi = max(0, c, *lamps) if lamps else max(0, c)
        # sweep left first or right first, ending at the cursor
        walk = min(-lo + (hi - lo) + (hi - c), hi + (hi - lo) + (c - lo))
        return len(lamps) + walk


class FiniteCyclic(GroupModel):
    def __init__(self, m: int):
        if not _is_int(m) or m < 1:
            raise InvalidInputError(f"cyclic order must be a positive integer, got {m!r}")
        self.m = m
        self.name = f"cyclic:{m}"
        gens = []
        for g in (1 % m, (m - 1) % m):
            if g != 0 and g not in gens:
                gens.append(g)
        self.generators = tuple(gens)

    def identity(self):
        return 0

    def mul(self, a, b):
        return (a + b) % self.m

    def inv(self, a):
        return (-a) % self.m

    def is_canonical(self, a) -> bool:
        return _is_int(a) and 0 <= a < self.m

    def format(self, a) -> str:
        return str(a)

    def word_length(self, a) -> int:
        return min(a, self.m - a)


class DirectProduct(GroupModel):
    def __init__(self, left: GroupModel, right: GroupModel):
        self.left = left
        self.right = right
        self.name = f"product({left.name},{right.name})"
        el, er = left.identity(), right.identity()
        self.generators = tuple((s, er) for s in left.generators) + tuple(
            (el, s) for s in right.generators
        )

    def identity(self):
        return (self.left.identity(), self.right.identity())

    def mul(self, a, b):
        return (self.left.mul(a[0], b[0]), self.right.mul(a[1], b[1]))

    def inv(self, a):
        return (self.left.inv(a[0]), self.right.inv(a[1]))

    def is_canonical(self, a) -> bool:
        return (
            isinstance(a, tuple)
            and len(a) == 2
            and self.left.is_canonical(a[0])
            and self.right.is_canonical(a[1])
        )

    def format(self, a) -> str:
        return f"<{self.left.format(a[0])};{self.right.format(a[1])}>"

    def word_length(self, a) -> int:
        return self.left.word_length(a[0]) + self.right.word_length(a[1])


def multiply(model: GroupModel, a, b):
    return model.multiply(a, b)


def inverse(model: GroupModel, a):
    return model.inverse(a)


def identity(model: GroupModel):
    return model.identity()


def commutator(model: GroupModel, a, b):
    """[a, b] = a b a^-1 b^-1."""
    m = model
    return m.mul(m.mul(m.mul(a, b), m.inv(a)), m.inv(b))


def _split_top_level(s: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise InvalidInputError(f"unbalanced parentheses in {s!r}")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise InvalidInputError(f"unbalanced parentheses in {s!r}")
    parts.append("".join(cur))
    return parts


def _int_param(family: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise InvalidInputError(f"{family} expects an integer parameter, got {raw!r}") from None


def parse_group(spec: str) -> GroupModel:
    """Build a model from a spec string such as ``free-abelian:2`` or
    ``product(free-abelian:2,cyclic:2)``."""
    s = spec.strip().replace(" ", "")
    for head in ("product", "free-product"):
        if s.startswith(head + "(") and s.endswith(")"):
            args = _split_top_level(s[len(head) + 1 : -1])
            if len(args) != 2:
                raise InvalidInputError(f"{head} takes exactly two groups: {spec!r}")
            left, right = parse_group(args[0]), parse_group(args[1])
            if head == "product":
                return DirectProduct(left, right)
            from .cusped import FreeProduct

            return FreeProduct(left, right)
    family, _, param = s.partition(":")
    if family == "heisenberg" and not param:
        return Heisenberg()
    if family == "lamplighter" and not param:
        return Lamplighter()
    if family in ("free-abelian", "z") and param:
        return FreeAbelian(_int_param(family, param))
    if family == "free" and param:
        return FreeGroup(_int_param(family, param))
    if family == "cyclic" and param:
        return FiniteCyclic(_int_param(family, param))
    raise InvalidInputError(f"unknown group spec {spec!r}")
