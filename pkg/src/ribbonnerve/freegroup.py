"""Words, conjugacy classes and automorphisms of the free group F_n.

Letters are nonzero integers: ``k`` is the k-th basis element and ``-k`` its
inverse.  Every value here is immutable; reduction and canonicalisation
happen at construction time so equality is structural.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

ALPHABET = "abcdefghijklmnopqrstuvwxyz"


class RankError(ValueError):
    """Letters or operands do not fit the ambient rank."""


class WordSyntaxError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


def letter_key(x: int) -> tuple[int, int]:
    """Order letters by generator index, the positive letter first."""
    return (abs(x), 0 if x > 0 else 1)


def letters_of_rank(n: int) -> list[int]:
    """``[1, -1, 2, -2, ..., n, -n]``, the generator order used everywhere."""
    out = []
    for i in range(1, n + 1):
        out += [i, -i]
    return out


def _check_letters(letters: Sequence[int], rank: int) -> None:
    for x in letters:
        if not isinstance(x, int) or x == 0 or abs(x) > rank:
            raise RankError(f"letter {x!r} out of range for rank {rank}")


def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    w = free_reduce(letters)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


def inverse_letters(letters: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(letters))


def least_rotation(letters: tuple[int, ...]) -> tuple[int, ...]:
    if not letters:
        return letters
    keyed = [letter_key(x) for x in letters]
    k = len(letters)
    best = min(range(k), key=lambda i: keyed[i:] + keyed[:i])
    return letters[best:] + letters[:best]


@dataclass(frozen=True)
class Word:
    """A freely reduced word in F_n."""

    letters: tuple[int, ...]
    rank: int

    def __post_init__(self):
        _check_letters(self.letters, self.rank)
        object.__setattr__(self, "letters", free_reduce(self.letters))

    @classmethod
    def identity(cls, rank: int) -> Word:
        return cls((), rank)

    @classmethod
    def generator(cls, x: int, rank: int) -> Word:
        return cls((x,), rank)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __mul__(self, other: Word) -> Word:
        if other.rank != self.rank:
            raise RankError("rank mismatch")
        return Word(self.letters + other.letters, self.rank)

    def inverse(self) -> Word:
        return Word(inverse_letters(self.letters), self.rank)

    def __str__(self) -> str:
        return format_letters(self.letters, self.rank)


@dataclass(frozen=True)
class CyclicWord:
    """A conjugacy class, stored cyclically reduced in its least rotation."""

    letters: tuple[int, ...]
    rank: int

    def __post_init__(self):
        _check_letters(self.letters, self.rank)
        object.__setattr__(self, "letters", least_rotation(cyclic_reduce(self.letters)))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def inverse(self) -> CyclicWord:
        return CyclicWord(inverse_letters(self.letters), self.rank)

    @cached_property
    def _sort_key(self) -> tuple:
        return (len(self.letters), tuple(letter_key(x) for x in self.letters))

    def sort_key(self) -> tuple:
        return self._sort_key

    def __str__(self) -> str:
        return format_letters(self.letters, self.rank)


def reduce(letters: Iterable[int], rank: int) -> Word:
    return Word(tuple(letters), rank)


def cyclic_class(w: Word | Sequence[int], rank: int | None = None) -> CyclicWord:
    if isinstance(w, Word):
        return CyclicWord(w.letters, w.rank)
    if rank is None:
        raise TypeError("rank is required for raw letter sequences")
    return CyclicWord(tuple(w), rank)


@dataclass(frozen=True)
class ClassMultiset:
    """A finite multiset of conjugacy classes of a common rank.

    ``entries`` holds ``(class, multiplicity)`` pairs sorted by
    :meth:`CyclicWord.sort_key`, so two multisets with the same contents are
    equal and hash alike.
    """

    entries: tuple[tuple[CyclicWord, int], ...]
    rank: int

    def __post_init__(self):
        counts: Counter = Counter()
        for cls, mult in self.entries:
            if cls.rank != self.rank:
                raise RankError("all classes must share the multiset's rank")
            if mult < 0:
                raise ValueError("negative multiplicity")
            counts[cls] += mult
        entries = tuple(sorted(((c, m) for c, m in counts.items() if m > 0),
                               key=lambda cm: cm[0].sort_key()))
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, classes: Iterable[CyclicWord | Word | Sequence[int]], rank: int) -> ClassMultiset:
        items = []
        for c in classes:
            if not isinstance(c, CyclicWord):
                c = cyclic_class(c, rank) if not isinstance(c, Word) else cyclic_class(c)
            items.append((c, 1))
        return cls(tuple(items), rank)

    @classmethod
    def empty(cls, rank: int) -> ClassMultiset:
        return cls((), rank)

    def __iter__(self) -> Iterator[CyclicWord]:
        """Iterate with multiplicity."""
        for c, m in self.entries:
            for _ in range(m):
                yield c

    def __len__(self) -> int:
        return sum(m for _, m in self.entries)

    def __add__(self, other: ClassMultiset) -> ClassMultiset:
        if other.rank != self.rank:
            raise RankError("rank mismatch")
        return ClassMultiset(self.entries + other.entries, self.rank)

    def multiplicity(self, c: CyclicWord) -> int:
        for d, m in self.entries:
            if d == c:
                return m
        return 0

    def distinct(self) -> tuple[CyclicWord, ...]:
        return tuple(c for c, _ in self.entries)

    def total_length(self) -> int:
        return sum(len(c) * m for c, m in self.entries)

    def inverse(self) -> ClassMultiset:
        return ClassMultiset(tuple((c.inverse(), m) for c, m in self.entries), self.rank)

    def sort_key(self) -> tuple:
        return tuple((c.sort_key(), m) for c, m in self.entries)

    def __str__(self) -> str:
        return "{" + ", ".join(str(c) for c in self) + "}"


# ---------------------------------------------------------------------------
# Automorphisms
# ---------------------------------------------------------------------------

def substitute(images: Sequence[Sequence[int]], letters: Iterable[int]) -> tuple[int, ...]:
    """Replace each letter by its image (inverse image for negative letters), unreduced."""
    out: list[int] = []
    for x in letters:
        img = images[abs(x) - 1]
        out.extend(img if x > 0 else inverse_letters(img))
    return tuple(out)


@dataclass(frozen=True)
class SignedPermutation:
    """The automorphism ``x_i -> images[i-1]`` where each image is a single letter."""

    rank: int
    perm: tuple[int, ...]

    def __post_init__(self):
        _check_letters(self.perm, self.rank)
        if len(self.perm) != self.rank or sorted(abs(x) for x in self.perm) != list(range(1, self.rank + 1)):
            raise ValueError(f"{self.perm} is not a signed permutation of rank {self.rank}")

    def images(self) -> tuple[Word, ...]:
        return tuple(Word((x,), self.rank) for x in self.perm)

    def inverse(self) -> SignedPermutation:
        inv = [0] * self.rank
        for i, x in enumerate(self.perm, start=1):
            inv[abs(x) - 1] = i if x > 0 else -i
        return SignedPermutation(self.rank, tuple(inv))

    def is_identity(self) -> bool:
        return self.perm == tuple(range(1, self.rank + 1))


def _images_from_factors(rank: int, factors: Sequence) -> tuple[Word, ...]:
    # phi = f1 o f2 o ... o fk, so phi(x) = (f1 o ... o f_{k-1})(fk(x))
    images: tuple[tuple[int, ...], ...] = tuple((i,) for i in range(1, rank + 1))
    for f in factors:
        images = tuple(free_reduce(substitute(images, w.letters)) for w in f.images())
    return tuple(Word(w, rank) for w in images)


@dataclass(frozen=True)
class Automorphism:
    """An automorphism of F_n kept as a product of elementary factors.

    ``factors = (f1, ..., fk)`` means ``f1 o f2 o ... o fk`` (``fk`` acts
    first).  Each factor is a :class:`SignedPermutation` or a Whitehead move;
    both expose ``images()`` and ``inverse()``.  ``images`` caches the basis
    images of the product.
    """

    rank: int
    factors: tuple = ()
    images: tuple[Word, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for f in self.factors:
            if f.rank != self.rank:
                raise RankError("factor rank differs from automorphism rank")
        if not self.images:
            object.__setattr__(self, "images", _images_from_factors(self.rank, self.factors))
        elif len(self.images) != self.rank:
            raise RankError("need one image per generator")

    # equality is by the map, not by the factorisation
    def __eq__(self, other):
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self.rank == other.rank and self.images == other.images

    def __hash__(self):
        return hash((self.rank, self.images))

    @classmethod
    def identity(cls, rank: int) -> Automorphism:
        return cls(rank, ())

    @classmethod
    def from_images(cls, images: Sequence[Word | Sequence[int]], rank: int | None = None) -> Automorphism:
        """Build the automorphism ``x_i -> images[i-1]``.

        The image tuple is Whitehead-reduced to a signed permutation; this
        both certifies that it is a basis and yields the factorisation.
        Raises ``ValueError`` when the images do not form a basis.
        """
        from .whitehead import factor_basis

        if rank is None:
            rank = len(images)
        words = tuple(w if isinstance(w, Word) else Word(tuple(w), rank) for w in images)
        if len(words) != rank or any(w.rank != rank for w in words):
            raise RankError("need exactly one image of matching rank per generator")
        factors = factor_basis(words)
        phi = cls(rank, tuple(factors))
        if phi.images != words:  # pragma: no cover - guards the factorisation
            raise AssertionError("factorisation does not reproduce the images")
        return phi

    @classmethod
    def conjugation(cls, w: Word) -> Automorphism:
        """Inner automorphism ``x -> w x w^-1``."""
        n = w.rank
        return cls.from_images([w * Word((i,), n) * w.inverse() for i in range(1, n + 1)], n)

    def __call__(self, obj):
        return apply(self, obj)

    def __str__(self) -> str:
        parts = [f"{format_letters((i,), self.rank)}->{w}" for i, w in enumerate(self.images, 1)]
        return "[" + ", ".join(parts) + "]"


def _apply_letters(phi: Automorphism, letters: Sequence[int]) -> tuple[int, ...]:
    return substitute([w.letters for w in phi.images], letters)


Applicable = Union[Word, CyclicWord, ClassMultiset]


def apply(phi: Automorphism, w: Applicable) -> Applicable:
    """Apply ``phi`` to a word, a conjugacy class or a multiset of classes."""
    if w.rank != phi.rank:
        raise RankError(f"automorphism of rank {phi.rank} applied to rank {w.rank}")
    if isinstance(w, Word):
        return Word(_apply_letters(phi, w.letters), w.rank)
    if isinstance(w, CyclicWord):
        return CyclicWord(_apply_letters(phi, w.letters), w.rank)
    if isinstance(w, ClassMultiset):
        return ClassMultiset(tuple((apply(phi, c), m) for c, m in w.entries), w.rank)
    raise TypeError(f"cannot apply an automorphism to {type(w).__name__}")


def compose(phi: Automorphism, psi: Automorphism) -> Automorphism:
    """``phi o psi``: apply ``psi`` first."""
    if phi.rank != psi.rank:
        raise RankError("rank mismatch")
    images = tuple(apply(phi, w) for w in psi.images)
    return Automorphism(phi.rank, phi.factors + psi.factors, images)


def invert(phi: Automorphism) -> Automorphism:
    return Automorphism(phi.rank, tuple(f.inverse() for f in reversed(phi.factors)))


# ---------------------------------------------------------------------------
# Inner automorphisms
# ---------------------------------------------------------------------------

def _split_conjugate(w: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Write a reduced word as ``p c p^-1`` with ``c`` cyclically reduced."""
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[:i], w[i:j]


def _primitive_root(c: tuple[int, ...]) -> tuple[int, ...]:
    k = len(c)
    for d in range(1, k + 1):
        if k % d == 0 and c[:d] * (k // d) == c:
            return c[:d]
    return c


def find_conjugator(sources: Sequence[Word], targets: Sequence[Word]) -> Word | None:
    """Return ``w`` with ``w s_i w^-1 = t_i`` for every ``i``, or ``None``.

    The first nontrivial source pins ``w`` down to a coset of its
    centraliser, a cyclic group; the remaining pairs select the power.
    """
    if len(sources) != len(targets):
        raise ValueError("length mismatch")
    if not sources:
        return None
    rank = sources[0].rank
    if any(len(s) == 0 and len(t) != 0 for s, t in zip(sources, targets)):
        return None
    nontrivial = [i for i, s in enumerate(sources) if len(s)]
    if not nontrivial:
        return Word.identity(rank) if all(len(t) == 0 for t in targets) else None
    j = nontrivial[0]
    b, u = sources[j].letters, targets[j].letters
    p, c = _split_conjugate(b)
    q, d = _split_conjugate(u)
    if len(c) != len(d):
        return None
    z = _primitive_root(c)
    bound = (max(len(t) for t in targets) + max(len(s) for s in sources) + len(p) + len(q)) // len(z) + 3

    def works(w: tuple[int, ...]) -> bool:
        winv = inverse_letters(w)
        return all(free_reduce(w + s.letters + winv) == t.letters for s, t in zip(sources, targets))

    seen = set()
    for k in range(len(c)):
        if c[k:] + c[:k] != d:
            continue
        r = c[:k]
        w0 = q + inverse_letters(r) + inverse_letters(p)
        for m in sorted(range(-bound, bound + 1), key=abs):
            zm = z * m if m >= 0 else inverse_letters(z) * (-m)
            w = free_reduce(w0 + p + zm + inverse_letters(p))
            if w in seen:
                continue
            seen.add(w)
            if works(w):
                return Word(w, rank)
    return None


def is_inner(phi: Automorphism) -> tuple[bool, Word | None]:
    basis = [Word((i,), phi.rank) for i in range(1, phi.rank + 1)]
    w = find_conjugator(basis, phi.images)
    return (w is not None, w)


def outer_equal(phi: Automorphism, psi: Automorphism) -> bool:
    """True iff ``phi`` and ``psi`` differ by an inner automorphism.

    ``psi^-1 o phi`` is inner exactly when ``phi(x_i) = psi(w) psi(x_i) psi(w)^-1``
    for all ``i``, so no inversion is needed.
    """
    if phi.rank != psi.rank:
        raise RankError("rank mismatch")
    return find_conjugator(psi.images, phi.images) is not None


def abelianization(phi: Automorphism) -> tuple[tuple[int, ...], ...]:
    """Integer matrix of ``phi`` on H_1; column ``i`` is the image of ``x_i``."""
    n = phi.rank
    cols = []
    for w in phi.images:
        v = [0] * n
        for x in w:
            v[abs(x) - 1] += 1 if x > 0 else -1
        cols.append(v)
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))


# ---------------------------------------------------------------------------
# Text and JSON formats
# ---------------------------------------------------------------------------

def format_letter(x: int, rank: int) -> str:
    if rank <= len(ALPHABET):
        s = ALPHABET[abs(x) - 1]
    else:
        s = f"a{abs(x)}"
    return s if x > 0 else s.upper()


def format_letters(letters: Iterable[int], rank: int) -> str:
    return " ".join(format_letter(x, rank) for x in letters)


_TOKEN = re.compile(r"\S+")


def parse_word_text(text: str, rank: int) -> tuple[int, ...]:
    """Parse ``"a b A B"`` or ``"a1 a2 A1"``; lowercase is +1, uppercase -1.

    A token made only of letters (``"abAB"``) is read letter by letter.
    """
    out: list[int] = []
    for m in _TOKEN.finditer(text):
        tok, pos = m.group(), m.start()
        if re.fullmatch(r"[aA]\d+", tok):
            k = int(tok[1:])
            sign = 1 if tok[0] == "a" else -1
            if not 1 <= k <= rank:
                raise WordSyntaxError(f"generator {tok!r} out of range for rank {rank}", pos)
            out.append(sign * k)
        elif tok.isalpha():
            for off, ch in enumerate(tok):
                k = ALPHABET.index(ch.lower()) + 1
                if k > rank:
                    raise WordSyntaxError(f"letter {ch!r} out of range for rank {rank}", pos + off)
                out.append(k if ch.islower() else -k)
        elif tok == "1":
            continue
        else:
            raise WordSyntaxError(f"unrecognised token {tok!r}", pos)
    return tuple(out)


def parse_word(obj, rank: int) -> tuple[int, ...]:
    """Accept a text word or a JSON-style list of signed integers."""
    if isinstance(obj, str):
        return parse_word_text(obj, rank)
    if isinstance(obj, (list, tuple)):
        letters = tuple(obj)
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in letters):
            raise WordSyntaxError("word arrays must hold signed integers")
        _check_letters(letters, rank)
        return letters
    raise WordSyntaxError(f"cannot read a word from {type(obj).__name__}")


def parse_classes(text: str, rank: int) -> ClassMultiset:
    """Comma-separated words, e.g. ``"a b A B c, C"``."""
    parts = [p for p in text.split(",")]
    if len(parts) == 1 and not parts[0].strip():
        return ClassMultiset.empty(rank)
    classes = []
    offset = 0
    for part in parts:
        try:
            classes.append(CyclicWord(parse_word_text(part, rank), rank))
        except WordSyntaxError as exc:
            pos = None if exc.position is None else exc.position + offset
            raise WordSyntaxError(str(exc).split(" (at position")[0], pos) from None
        offset += len(part) + 1
    return ClassMultiset.of(classes, rank)
