"""Group backends with exact equality via canonical words.

Every element is a :class:`GroupElement` holding a canonical word over the
backend's *base* labels.  The metric generating set ``S`` defaults to the
base labels; an explicit ``S`` may be supplied as a list of words.

Permutations compose right to left: ``(p * q)(i) = p(q(i))``.
"""

from __future__ import annotations

import hashlib
import json
import string
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DomainError, ResourceExhausted, ValidationError

KINDS = ("finite_permutation", "free", "free_product_cyclic", "free_abelian")

# 'e' is reserved for the identity when printing words.
_LETTERS = [c for c in string.ascii_lowercase if c != "e"]


@dataclass(frozen=True, slots=True)
class GroupElement:
    word: tuple[str, ...]

    def __str__(self) -> str:
        return "".join(self.word) if self.word else "e"

    def __repr__(self) -> str:
        return f"<{self}>"


@dataclass(frozen=True)
class GeneratorSet:
    items: tuple[str, ...]
    involution: dict[str, str]
    elements: dict[str, GroupElement] = field(repr=False)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def check(self, identity: GroupElement) -> None:
        if len(set(self.items)) != len(self.items):
            raise ValidationError("generating_set", "labels are not distinct")
        for s in self.items:
            t = self.involution.get(s)
            if t is None or t not in self.elements:
                raise ValidationError("generating_set", f"not symmetric: no inverse for {s!r}")
            if self.involution[t] != s:
                raise ValidationError("generating_set", f"involution is not an involution at {s!r}")
            if self.elements[s] == identity:
                raise ValidationError("generating_set", f"{s!r} is the identity")


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    parameters: dict
    generating_set: tuple[str, ...] | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "GroupSpec":
        if not isinstance(data, dict):
            raise ValidationError("spec", "must be a JSON object")
        unknown = set(data) - {"kind", "parameters", "generating_set"}
        if unknown:
            raise ValidationError(sorted(unknown)[0], "unknown field")
        kind = data.get("kind")
        if kind not in KINDS:
            raise ValidationError("kind", f"must be one of {', '.join(KINDS)}")
        params = data.get("parameters", {})
        if not isinstance(params, dict):
            raise ValidationError("parameters", "must be an object")
        gs = data.get("generating_set")
        if gs is not None:
            if not isinstance(gs, list) or not all(isinstance(w, str) for w in gs) or not gs:
                raise ValidationError("generating_set", "must be a non-empty list of words")
            gs = tuple(gs)
        return cls(kind, params, gs)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "parameters": self.parameters}
        if self.generating_set is not None:
            d["generating_set"] = list(self.generating_set)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


class GroupOracle:
    """Common interface; subclasses implement ``_decode``/``_encode``/``_mul``."""

    kind: str

    def __init__(self, spec: GroupSpec, base_labels: Sequence[str], base_inverse: dict[str, str]):
        self.spec = spec
        self.base_labels = tuple(base_labels)
        self.base_inverse = dict(base_inverse)
        self._label_index = {s: i for i, s in enumerate(self.base_labels)}
        self._tokens = sorted(self.base_labels, key=len, reverse=True)
        self._e = GroupElement(())
        self._decode_cached = lru_cache(maxsize=1 << 16)(self._decode)
        self._gens: GeneratorSet | None = None
        self.geodesic_normal_form = True

    # -- backend hooks -------------------------------------------------
    def _decode(self, word: tuple[str, ...]):
        raise NotImplementedError

    def _encode(self, value) -> tuple[str, ...]:
        raise NotImplementedError

    def _mul(self, u, v):
        raise NotImplementedError

    def _inv(self, u):
        raise NotImplementedError

    # -- public API ----------------------------------------------------
    def identity(self) -> GroupElement:
        return self._e

    def generators(self) -> GeneratorSet:
        assert self._gens is not None
        return self._gens

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if not a.word:
            return b
        if not b.word:
            return a
        return GroupElement(self._encode(self._mul(self._decode_cached(a.word), self._decode_cached(b.word))))

    def invert(self, a: GroupElement) -> GroupElement:
        if not a.word:
            return a
        return GroupElement(self._encode(self._inv(self._decode_cached(a.word))))

    def product(self, *elements: GroupElement) -> GroupElement:
        out = self._e
        for g in elements:
            out = self.multiply(out, g)
        return out

    def conjugate(self, g: GroupElement, h: GroupElement) -> GroupElement:
        """g h g^-1"""
        return self.product(g, h, self.invert(g))

    def order_of(self, a: GroupElement, guard: int) -> int | None:
        if guard < 1:
            raise ValueError("guard must be >= 1")
        p = a
        for n in range(1, guard + 1):
            if not p.word:
                return n
            p = self.multiply(p, a)
        return None

    def key(self, g: GroupElement) -> tuple:
        """Shortlex key in base-label order; the canonical tie-break everywhere."""
        return (len(g.word), tuple(self._label_index[s] for s in g.word))

    def sorted(self, elements: Iterable[GroupElement]) -> list[GroupElement]:
        return sorted(elements, key=self.key)

    def normalize(self, word: Sequence[str]) -> GroupElement:
        word = tuple(word)
        for s in word:
            if s not in self._label_index:
                raise DomainError(f"unknown label {s!r} for {self.kind} backend")
        return GroupElement(self._encode(self._decode(word)))

    def validate(self, g: GroupElement) -> GroupElement:
        if self.normalize(g.word) != g:
            raise DomainError(f"{g} is not in canonical form for {self.kind} backend")
        return g

    def tokenize(self, text: str) -> tuple[str, ...]:
        text = text.strip()
        if text in ("", "e", "1"):
            return ()
        out: list[str] = []
        for chunk in text.replace(".", " ").replace("*", " ").split():
            i = 0
            while i < len(chunk):
                for t in self._tokens:
                    if chunk.startswith(t, i):
                        out.append(t)
                        i += len(t)
                        break
                else:
                    raise DomainError(f"cannot parse {chunk[i:]!r} in word {text!r}")
        return tuple(out)

    def element(self, text: str | Sequence[str]) -> GroupElement:
        if isinstance(text, str):
            return self.normalize(self.tokenize(text))
        return self.normalize(text)

    def is_finite(self) -> bool:
        return False

    def _install_generating_set(self) -> None:
        base = {s: GroupElement(self._encode(self._decode((s,)))) for s in self.base_labels}
        if self.spec.generating_set is None:
            self._gens = GeneratorSet(self.base_labels, dict(self.base_inverse), base)
            self._gens.check(self._e)
            return
        self.geodesic_normal_form = False
        elements: dict[str, GroupElement] = {}
        items: list[str] = []
        for w in self.spec.generating_set:
            try:
                g = self.element(w)
            except DomainError as exc:
                raise ValidationError("generating_set", str(exc)) from None
            if g == self._e:
                raise ValidationError("generating_set", f"{w!r} is the identity")
            label = str(g)
            if label in elements:
                raise ValidationError("generating_set", f"duplicate generator {w!r}")
            elements[label] = g
            items.append(label)
        by_elem = {g: s for s, g in elements.items()}
        involution = {}
        for s, g in elements.items():
            t = by_elem.get(self.invert(g))
            if t is None:
                raise ValidationError("generating_set", f"not symmetric: inverse of {s!r} missing")
            involution[s] = t
        self._gens = GeneratorSet(tuple(items), involution, elements)
        self._gens.check(self._e)
        self._check_generates()

    def _check_generates(self, radius: int = 6) -> None:
        seen = {self._e}
        frontier = [self._e]
        targets = {GroupElement(self._encode(self._decode((s,)))) for s in self.base_labels}
        for _ in range(radius):
            nxt = []
            for g in frontier:
                for s in self._gens.items:
                    h = self.multiply(g, self._gens.elements[s])
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            frontier = nxt
            if targets <= seen:
                return
        raise ValidationError("generating_set", f"does not reach every base generator within {radius} steps")


class FreeProductCyclic(GroupOracle):
    """Free product of cyclic groups; order 0 means an infinite cyclic factor.

    Internal form: tuple of syllables ``(factor, power)`` in alternating
    normal form.  Finite factor syllables are single labels, so with the
    default S the canonical word is geodesic.
    """

    kind = "free_product_cyclic"

    def __init__(self, spec: GroupSpec, orders: Sequence[int]):
        if len(orders) > len(_LETTERS):
            raise ValidationError("parameters.orders", "too many factors")
        self.orders = tuple(orders)
        labels: list[str] = []
        inverse: dict[str, str] = {}
        self._label_syl: dict[str, tuple[int, int]] = {}
        self._syl_label: dict[tuple[int, int], str] = {}
        for i, n in enumerate(self.orders):
            name = _LETTERS[i]
            if n == 0:
                labels += [name, name.upper()]
                inverse[name], inverse[name.upper()] = name.upper(), name
                self._label_syl[name] = (i, 1)
                self._label_syl[name.upper()] = (i, -1)
            else:
                for k in range(1, n):
                    lab = name if k == 1 else f"{name}{k}"
                    labels.append(lab)
                    self._label_syl[lab] = (i, k)
                    self._syl_label[(i, k)] = lab
                for k in range(1, n):
                    inverse[self._syl_label[(i, k)]] = self._syl_label[(i, n - k)]
        super().__init__(spec, labels, inverse)
        self._install_generating_set()

    def _push(self, stack: list, syl: tuple[int, int]) -> None:
        f, p = syl
        n = self.orders[f]
        if stack and stack[-1][0] == f:
            p += stack.pop()[1]
        if n:
            p %= n
        if p:
            stack.append((f, p))

    def _decode(self, word):
        stack: list[tuple[int, int]] = []
        for s in word:
            try:
                self._push(stack, self._label_syl[s])
            except KeyError:
                raise DomainError(f"unknown label {s!r}") from None
        return tuple(stack)

    def _encode(self, value):
        out: list[str] = []
        for f, p in value:
            if self.orders[f]:
                out.append(self._syl_label[(f, p)])
            else:
                name = _LETTERS[f]
                out.extend([name] * p if p > 0 else [name.upper()] * (-p))
        return tuple(out)

    def _mul(self, u, v):
        stack = list(u)
        for syl in v:
            self._push(stack, syl)
        return tuple(stack)

    def _inv(self, u):
        return tuple((f, (-p) % self.orders[f] if self.orders[f] else -p) for f, p in reversed(u))

    def is_finite(self) -> bool:
        return len(self.orders) == 1 and self.orders[0] > 0


class FreeGroup(FreeProductCyclic):
    kind = "free"

    def __init__(self, spec: GroupSpec, rank: int):
        super().__init__(spec, [0] * rank)


class FreeAbelian(GroupOracle):
    kind = "free_abelian"

    def __init__(self, spec: GroupSpec, rank: int):
        if rank > len(_LETTERS):
            raise ValidationError("parameters.rank", "rank too large")
        self.rank = rank
        labels, inverse = [], {}
        self._label_vec = {}
        for i in range(rank):
            a, A = _LETTERS[i], _LETTERS[i].upper()
            labels += [a, A]
            inverse[a], inverse[A] = A, a
            self._label_vec[a] = (i, 1)
            self._label_vec[A] = (i, -1)
        super().__init__(spec, labels, inverse)
        self._install_generating_set()

    def _decode(self, word):
        v = [0] * self.rank
        for s in word:
            try:
                i, p = self._label_vec[s]
            except KeyError:
                raise DomainError(f"unknown label {s!r}") from None
            v[i] += p
        return tuple(v)

    def _encode(self, value):
        out: list[str] = []
        for i, p in enumerate(value):
            out.extend([_LETTERS[i]] * p if p > 0 else [_LETTERS[i].upper()] * (-p))
        return tuple(out)

    def _mul(self, u, v):
        return tuple(x + y for x, y in zip(u, v))

    def _inv(self, u):
        return tuple(-x for x in u)

    def coordinates(self, g: GroupElement) -> tuple[int, ...]:
        return self._decode_cached(g.word)

    def from_coordinates(self, v: Sequence[int]) -> GroupElement:
        return GroupElement(self._encode(tuple(v)))


class PermutationGroup(GroupOracle):
    """Finite permutation group on ``range(degree)``; fully enumerated at load.

    Canonical words are the shortlex-least words over the base labels, found
    by breadth-first search with right multiplication.
    """

    kind = "finite_permutation"

    def __init__(self, spec: GroupSpec, generators: Sequence[Sequence[int]], names: Sequence[str] | None, order_guard: int):
        if not generators:
            raise ValidationError("parameters.generators", "need at least one generator")
        degree = len(generators[0])
        perms = []
        for k, p in enumerate(generators):
            p = tuple(p)
            if len(p) != degree or sorted(p) != list(range(degree)):
                raise ValidationError(f"parameters.generators[{k}]", "not a permutation of 0..n-1")
            perms.append(p)
        if names is None:
            names = _LETTERS[: len(perms)]
        if len(names) != len(perms) or len(set(names)) != len(names):
            raise ValidationError("parameters.names", "need one distinct name per generator")
        ident = tuple(range(degree))
        self.degree = degree
        labels, inverse, perm_of = [], {}, {}
        for name, p in zip(names, perms):
            if p == ident:
                raise ValidationError("parameters.generators", f"generator {name!r} is the identity")
            q = _perm_inv(p)
            labels.append(name)
            perm_of[name] = p
            if q == p:
                inverse[name] = name
            else:
                inv_name = name.upper() if name.upper() != name else name + "'"
                labels.append(inv_name)
                perm_of[inv_name] = q
                inverse[name], inverse[inv_name] = inv_name, name
        self._perm_of = perm_of
        self._word_of: dict[tuple, tuple[str, ...]] = {ident: ()}
        queue = deque([ident])
        while queue:
            g = queue.popleft()
            for s in labels:
                h = _perm_mul(g, perm_of[s])
                if h not in self._word_of:
                    self._word_of[h] = self._word_of[g] + (s,)
                    if len(self._word_of) > order_guard:
                        raise ResourceExhausted(f"group order exceeds guard {order_guard}", len(self._word_of))
                    queue.append(h)
        self._ident = ident
        super().__init__(spec, labels, inverse)
        self._install_generating_set()

    def _decode(self, word):
        g = self._ident
        for s in word:
            try:
                g = _perm_mul(g, self._perm_of[s])
            except KeyError:
                raise DomainError(f"unknown label {s!r}") from None
        return g

    def _encode(self, value):
        return self._word_of[value]

    def _mul(self, u, v):
        return _perm_mul(u, v)

    def _inv(self, u):
        return _perm_inv(u)

    def permutation(self, g: GroupElement) -> tuple[int, ...]:
        return self._decode_cached(g.word)

    def from_permutation(self, p: Sequence[int]) -> GroupElement:
        try:
            return GroupElement(self._word_of[tuple(p)])
        except KeyError:
            raise DomainError(f"{tuple(p)} is not in the group") from None

    def elements(self) -> list[GroupElement]:
        return self.sorted(GroupElement(w) for w in self._word_of.values())

    def order(self) -> int:
        return len(self._word_of)

    def is_finite(self) -> bool:
        return True


def _perm_mul(p, q):
    return tuple(p[i] for i in q)


def _perm_inv(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def _int_param(params: dict, name: str, lo: int) -> int:
    v = params.get(name)
    if not isinstance(v, int) or isinstance(v, bool) or v < lo:
        raise ValidationError(f"parameters.{name}", f"must be an integer >= {lo}")
    return v


def load_group(spec: GroupSpec | dict, order_guard: int = 100_000) -> GroupOracle:
    if isinstance(spec, dict):
        spec = GroupSpec.from_dict(spec)
    p = spec.parameters
    if spec.kind == "free":
        return FreeGroup(spec, _int_param(p, "rank", 1))
    if spec.kind == "free_abelian":
        return FreeAbelian(spec, _int_param(p, "rank", 1))
    if spec.kind == "free_product_cyclic":
        orders = p.get("orders")
        if not isinstance(orders, list) or not orders:
            raise ValidationError("parameters.orders", "must be a non-empty list")
        for k, n in enumerate(orders):
            if not isinstance(n, int) or isinstance(n, bool) or n < 0 or n == 1:
                raise ValidationError(f"parameters.orders[{k}]", "must be 0 or an integer >= 2")
        return FreeProductCyclic(spec, orders)
    gens = p.get("generators")
    if not isinstance(gens, list) or not all(isinstance(g, list) for g in gens):
        raise ValidationError("parameters.generators", "must be a list of permutations (image lists)")
    for k, g in enumerate(gens):
        if not all(isinstance(i, int) and not isinstance(i, bool) for i in g):
            raise ValidationError(f"parameters.generators[{k}]", "entries must be integers")
    return PermutationGroup(spec, gens, p.get("names"), order_guard)


def free_group(rank: int = 2) -> GroupOracle:
    return load_group({"kind": "free", "parameters": {"rank": rank}})


def free_product(*orders: int) -> GroupOracle:
    return load_group({"kind": "free_product_cyclic", "parameters": {"orders": list(orders)}})


def infinite_dihedral() -> GroupOracle:
    return free_product(2, 2)


def free_abelian(rank: int = 2) -> GroupOracle:
    return load_group({"kind": "free_abelian", "parameters": {"rank": rank}})


def symmetric_group(n: int = 3) -> GroupOracle:
    """S_n generated by adjacent transpositions a=(0 1), b=(1 2), ..."""
    gens = []
    for i in range(n - 1):
        p = list(range(n))
        p[i], p[i + 1] = p[i + 1], p[i]
        gens.append(p)
    return load_group({"kind": "finite_permutation", "parameters": {"generators": gens}})
