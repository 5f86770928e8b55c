"""Cycle-weight sequences alpha_ell with parametric tail rules.

A weight sequence assigns a real penalty alpha_ell to every cycle length
ell >= 1.  The first few values can be listed explicitly; beyond that a tail
rule takes over.  The optional linear shift alpha_ell -> alpha_ell + c*ell is
kept as a separate field because the permutation measure is covariant under
it (the normalization picks up a factor e^{-cn}).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = ["Tail", "WeightSequence"]

_TAIL_KINDS = ("zero", "power", "logdecay")


@dataclass(frozen=True)
class Tail:
    """Rule for alpha_ell beyond the explicit head.

    zero:      alpha_ell = 0
    power:     alpha_ell = c * ell**(-p)
    logdecay:  alpha_ell = c / log(ell)**p
    """

    kind: str = "zero"
    c: float = 0.0
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in _TAIL_KINDS:
            raise ValueError(f"unknown tail kind {self.kind!r}")
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "p", float(self.p))

    def value(self, ell):
        ell = np.asarray(ell, dtype=float)
        if self.kind == "zero" or self.c == 0.0:
            return np.zeros_like(ell)
        if self.kind == "power":
            return self.c * ell ** (-self.p)
        return self.c / np.log(ell) ** self.p


@dataclass(frozen=True)
class WeightSequence:
    explicit: tuple = ()
    tail: Tail = field(default_factory=Tail)
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "explicit", tuple(float(a) for a in self.explicit))
        object.__setattr__(self, "shift", float(self.shift))
        if self.tail.kind == "logdecay" and self.tail.c != 0.0 and not self.explicit:
            raise ValueError("logdecay tail is undefined at ell=1; give alpha_1 explicitly")

    # -- constructors ---------------------------------------------------
    @classmethod
    def uniform(cls):
        """alpha == 0: the uniform permutation measure."""
        return cls()

    @classmethod
    def single(cls, alpha1):
        """Only alpha_1 nonzero (fixed-point penalty)."""
        return cls(explicit=(float(alpha1),))

    @classmethod
    def power(cls, c, p):
        return cls(tail=Tail("power", c, p))

    @classmethod
    def logdecay(cls, c, p, alpha1=0.0):
        return cls(explicit=(float(alpha1),), tail=Tail("logdecay", c, p))

    # -- evaluation -----------------------------------------------------
    def alpha(self, ell):
        """alpha_ell for integer ell >= 1; scalar in, scalar out."""
        arr = np.asarray(ell)
        scalar = arr.ndim == 0
        ellf = np.atleast_1d(arr).astype(float)
        if ellf.size and ellf.min() < 1:
            raise ValueError("cycle lengths start at ell = 1")
        # tail evaluated everywhere (clamped away from log(1)=0), head overwrites
        safe = np.maximum(ellf, 2.0) if self.tail.kind == "logdecay" else ellf
        out = self.tail.value(safe)
        n0 = len(self.explicit)
        if n0:
            head = ellf <= n0
            if head.any():
                out[head] = np.asarray(self.explicit)[ellf[head].astype(int) - 1]
        if self.shift:
            out = out + self.shift * ellf
        return float(out[0]) if scalar else out

    def alpha_array(self, n_max):
        """Vector (alpha_1, ..., alpha_{n_max})."""
        if n_max <= 0:
            return np.empty(0)
        return self.alpha(np.arange(1, n_max + 1))

    def shifted(self, c):
        """The sequence alpha_ell + c*ell."""
        return replace(self, shift=self.shift + float(c))

    # -- structural predicates -------------------------------------------
    def is_summable(self):
        """Truth of sum_ell |1 - e^{-alpha_ell}| / ell < infinity.

        Decidable from the tail rule: zero tails always, power tails for
        p > 0, logdecay tails for p > 1; any nonzero shift breaks it.
        """
        if self.shift != 0.0:
            return False
        t = self.tail
        if t.kind == "zero" or t.c == 0.0:
            return True
        if t.kind == "power":
            return t.p > 0
        return t.p > 1

    def growth(self):
        """Asymptotic shape of alpha_ell as (kind, lam, c, q).

        kind "linear":  alpha_ell = lam*ell + O(1)
        kind "power":   alpha_ell = lam*ell + c*ell**q with q > 0, q != 1
        kind "log":     alpha_ell = lam*ell + c*log(ell)**q with q > 0
        """
        t = self.tail
        lam = self.shift
        if t.kind == "power" and t.c != 0.0:
            q = -t.p
            if q == 1.0:
                return ("linear", lam + t.c, 0.0, 0.0)
            if q > 0:
                return ("power", lam, t.c, q)
            return ("linear", lam, 0.0, 0.0)
        if t.kind == "logdecay" and t.c != 0.0 and t.p < 0:
            return ("log", lam, t.c, -t.p)
        return ("linear", lam, 0.0, 0.0)

    def linear_rate(self):
        """lam with alpha_ell = lam*ell + o(ell) (sub/superlinear parts aside)."""
        return self.growth()[1]

    def min_g_beyond(self, n_start):
        """Lower bound on g(n) = alpha_n - lam*n over integer n > n_start.

        Used for truncation envelopes e^{-alpha_n} <= e^{-min g} e^{-lam n}.
        Relies on the tail part of g being monotone beyond the explicit head,
        which holds for all three tail families.  Returns -inf when g is
        unbounded below (growing negative weights); callers must branch.
        """
        kind, lam, c, q = self.growth()
        n0 = len(self.explicit)
        cands = []
        # explicit head beyond n_start
        for n in range(n_start + 1, n0 + 1):
            cands.append(self.alpha(n) - lam * n)
        # tail region: monotone, so endpoints suffice
        m = max(n_start + 1, n0 + 1, 2)
        tail_g = float(self.alpha(m)) - lam * m
        cands.append(tail_g)
        if kind == "linear":
            t = self.tail
            if t.kind == "zero" or t.c == 0.0 or (t.kind == "power" and -t.p == 1.0):
                limit = 0.0
            elif t.kind == "power" and t.p > 0:
                limit = 0.0
            elif t.kind == "power" and t.p == 0.0:
                limit = t.c
            else:  # logdecay with p > 0: decays to 0
                limit = 0.0
            cands.append(limit)
        elif (kind == "power" or kind == "log") and c < 0:
            return float("-inf")
        # growing positive tails: minimum sits at the left endpoint, already listed
        return min(cands)

    # -- serialization ----------------------------------------------------
    def to_dict(self):
        d = {"explicit": list(self.explicit),
             "tail": {"kind": self.tail.kind, "c": self.tail.c, "p": self.tail.p}}
        if self.shift:
            d["shift"] = self.shift
        return d

    @classmethod
    def from_dict(cls, d):
        tail = d.get("tail", {}) or {}
        return cls(explicit=tuple(d.get("explicit", ()) or ()),
                   tail=Tail(tail.get("kind", "zero"), tail.get("c", 0.0), tail.get("p", 0.0)),
                   shift=d.get("shift", 0.0))
