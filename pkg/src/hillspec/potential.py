"""Complex pi-periodic potentials represented as finite Fourier series."""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["Potential", "model_potential", "classify_symmetry"]


@dataclass(frozen=True)
class Potential:
    """V(x) = sum_n v_n exp(2 i n x), a finite Fourier series of period pi.

    ``items`` is a sorted tuple of (n, v_n) pairs with v_n != 0, which keeps
    the type hashable and makes the symmetry classification exact: the
    coefficients are the input data, there is nothing to estimate.
    """

    items: tuple

    def __init__(self, coeffs):
        cleaned = {}
        for n, v in dict(coeffs).items():
            n = int(n)
            v = complex(v)
            if v != 0:
                cleaned[n] = v
        object.__setattr__(self, "items", tuple(sorted(cleaned.items())))

    @property
    def coeffs(self) -> dict:
        return dict(self.items)

    @property
    def max_index(self) -> int:
        return max((abs(n) for n, _ in self.items), default=0)

    def coeff_arrays(self):
        """(n, v_n) as numpy arrays, the form consumed by the integrator."""
        ns = np.array([n for n, _ in self.items], dtype=np.int64)
        vs = np.array([v for _, v in self.items], dtype=np.complex128)
        return ns, vs

    def sum_abs(self) -> float:
        return float(sum(abs(v) for _, v in self.items))

    def is_constant(self) -> bool:
        return all(n == 0 for n, _ in self.items)

    def constant_value(self) -> complex:
        if not self.is_constant():
            raise DomainError("potential is not constant")
        return dict(self.items).get(0, 0j)

    def to_json(self) -> str:
        payload = {
            "coeffs": [
                {"n": n, "re": v.real, "im": v.imag} for n, v in self.items
            ]
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "Potential":
        try:
            payload = json.loads(text)
            entries = payload["coeffs"]
            coeffs = {int(e["n"]): complex(e["re"], e.get("im", 0.0)) for e in entries}
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise DomainError(f"malformed potential JSON: {exc}") from exc
        return cls(coeffs)


def eval_potential(p: Potential, x):
    """Evaluate V(x); x may be a scalar or a numpy array."""
    if isinstance(x, np.ndarray):
        out = np.zeros(x.shape, dtype=np.complex128)
        for n, v in p.items:
            out += v * np.exp(2j * n * x)
        return out
    out = 0j
    for n, v in p.items:
        out += v * cmath.exp(2j * n * x)
    return out


# `eval` mirrors the operation name used by the CLI and the docs; the module
# function shadows the builtin only under its qualified name.
eval = eval_potential


def model_potential(K: complex) -> Potential:
    """The one-mode potential V(x) = K exp(2ix)."""
    return Potential({1: complex(K)})


def classify_symmetry(p: Potential) -> dict:
    """Exact coefficient tests for the two symmetries that matter here.

    real_valued  <=>  v_{-n} == conj(v_n) for every n
    pt_symmetric <=>  conj(V(-x)) == V(x)  <=>  every v_n is real
    """
    coeffs = p.coeffs
    real_valued = all(
        coeffs.get(-n, 0j) == v.conjugate() for n, v in coeffs.items()
    )
    pt_symmetric = all(v.imag == 0.0 for v in coeffs.values())
    return {"real_valued": real_valued, "pt_symmetric": pt_symmetric}
