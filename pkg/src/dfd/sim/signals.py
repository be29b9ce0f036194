"""Sums of sinusoids with exact derivatives of any order."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

KINDS = {"sin": 0, "cos": 1}


@dataclass(frozen=True)
class Term:
    amplitude: float
    frequency: float
    kind: str = "sin"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be 'sin' or 'cos', got {self.kind!r}")
        if self.frequency < 0:
            raise ValueError("frequency must be nonnegative")


@dataclass(frozen=True)
class Signal:
    """``sum_k a_k * trig_k(w_k t)``. A ``cos`` term with zero frequency is a constant."""
    terms: tuple[Term, ...] = ()

    @classmethod
    def of(cls, *terms) -> "Signal":
        return cls(tuple(t if isinstance(t, Term) else Term(*t) for t in terms))

    @classmethod
    def constant(cls, c: float) -> "Signal":
        return cls((Term(float(c), 0.0, "cos"),)) if c != 0 else cls()

    def __call__(self, t, order: int = 0):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            w = term.frequency
            phase = (KINDS[term.kind] + order) % 4
            trig = (np.sin, np.cos, np.sin, np.cos)[phase](w * t)
            sign = -1.0 if phase >= 2 else 1.0
            out = out + sign * term.amplitude * w ** order * trig
        return float(out) if out.ndim == 0 else out

    def derivative(self, order: int = 1) -> "Signal":
        """The ``order``-th derivative as another signal."""
        terms = []
        for term in self.terms:
            phase = (KINDS[term.kind] + order) % 4
            amp = term.amplitude * term.frequency ** order * (-1.0 if phase >= 2 else 1.0)
            if amp != 0.0:
                terms.append(Term(amp, term.frequency, ("sin", "cos")[phase % 2]))
        return Signal(tuple(terms))

    def scaled(self, c: float) -> "Signal":
        return Signal(tuple(Term(c * t.amplitude, t.frequency, t.kind) for t in self.terms))

    def bound(self, order: int = 0) -> float:
        """Triangle-inequality bound on ``sup_t |d^order/dt^order signal|``."""
        return float(sum(abs(t.amplitude) * t.frequency ** order for t in self.terms))

    @property
    def l_bound(self) -> float:
        return self.bound(2)

    def to_list(self) -> list[dict]:
        return [{"amplitude": t.amplitude, "frequency": t.frequency, "kind": t.kind}
                for t in self.terms]


LeaderSignal = Signal


def pack(signals) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pad a list of signals into ``(amp, freq, kind)`` arrays for the compiled kernels."""
    width = max([1] + [len(s.terms) for s in signals])
    rows = max(1, len(signals))
    amp = np.zeros((rows, width))
    freq = np.zeros((rows, width))
    kind = np.zeros((rows, width), dtype=np.int64)
    for r, s in enumerate(signals):
        for c, term in enumerate(s.terms):
            amp[r, c] = term.amplitude
            freq[r, c] = term.frequency
            kind[r, c] = KINDS[term.kind]
    return amp, freq, kind


@njit(cache=True)
def eval_packed(amp, freq, kind, row, t, order):
    acc = 0.0
    for c in range(amp.shape[1]):
        a = amp[row, c]
        if a == 0.0:
            continue
        w = freq[row, c]
        phase = (kind[row, c] + order) % 4
        arg = w * t
        if phase == 0:
            val = np.sin(arg)
        elif phase == 1:
            val = np.cos(arg)
        elif phase == 2:
            val = -np.sin(arg)
        else:
            val = -np.cos(arg)
        acc += a * w ** order * val
    return acc
