"""Exact real root counting with Sturm sequences."""

from __future__ import annotations

from fractions import Fraction

from .poly import deg, derivative, divmod_q, evaluate, is_squarefree, trim


def sturm_sequence(f) -> list:
    f = trim([Fraction(c) for c in f])
    seq = [f, derivative(f)]
    while seq[-1]:
        r = divmod_q(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append(tuple(-c for c in r))
    return [s for s in seq if s]


def _changes(signs) -> int:
    signs = [s for s in signs if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def real_root_count(f) -> int:
    """Number of distinct real roots of a squarefree integer polynomial."""
    if not f or not is_squarefree(f):
        raise ValueError("real_root_count needs a nonzero squarefree polynomial")
    seq = sturm_sequence(f)
    at_pos = [_sign(s[-1]) for s in seq]
    at_neg = [_sign(s[-1]) * (-1) ** deg(s) for s in seq]
    return _changes(at_neg) - _changes(at_pos)


def roots_in_interval(f, a, b) -> int:
    """Distinct roots in (a, b] for squarefree f."""
    seq = sturm_sequence(f)
    va = _changes([_sign(evaluate(s, Fraction(a))) for s in seq])
    vb = _changes([_sign(evaluate(s, Fraction(b))) for s in seq])
    return va - vb
