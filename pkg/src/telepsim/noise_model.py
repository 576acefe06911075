"""Samplers and statistical verifiers for locally-bounded stochastic Pauli noise.

A sampler is p-locally-bounded when every fixed qubit subset F lands
inside the error support with probability at most p^|F|.  Two samplers
are provided:

* iid: each qubit enters the support independently with probability p.
  The subset bound holds with equality, which makes this the reference
  calibration case.
* clustered: qubits are paired into size-2 blocks; each block is fully
  corrupted with probability p**2/2 (independently per block) on top of
  iid singles at rate p/2.  Per block the two-qubit probability is
  p**2/2 + (1 - p**2/2)(p/2)**2 <= p**2 and the single-qubit probability
  is p**2/2 + p/2 - p**3/4 <= p, and blocks are independent, so the
  product structure gives Pr[F subset supp] <= p^|F| for every F while
  the joint distribution is genuinely correlated.

Conditional on the realized support, Pauli types are uniform over
{X, Y, Z} per qubit; only the support law is constrained, so this choice
is documented here for reproducibility.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .stabilizer_sim import PauliFrame

_KINDS = ("iid", "clustered", "none")


@dataclass(frozen=True)
class NoiseModel:
    """Noise kind, strength, and which circuit stages receive a fresh frame.

    plan: "all" (stages 0..depth), "input" (stage 0 only), "final" (stage
    depth only), or an explicit list of stage indices.  Stage 0 precedes
    the first layer; stage j follows layer j.
    """

    kind: str
    p: float
    plan: object = "all"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError("p must lie in [0, 1]")
        if self.kind == "clustered" and self.p > 0.5:
            raise ValueError("clustered model is certified only for p <= 0.5")

    def layer_plan(self, depth: int) -> list:
        if self.plan == "all":
            return list(range(depth + 1))
        if self.plan == "input":
            return [0]
        if self.plan == "final":
            return [depth]
        return [int(s) for s in self.plan]

    def sample(self, n_qubits: int, rng: np.random.Generator) -> PauliFrame:
        if self.kind == "none" or self.p == 0.0:
            return PauliFrame.identity(n_qubits)
        if self.kind == "iid":
            supp = rng.random(n_qubits) < self.p
        else:
            supp = np.zeros(n_qubits, dtype=bool)
            n_blocks = n_qubits // 2
            hit = rng.random(n_blocks) < self.p * self.p / 2.0
            supp[0 : 2 * n_blocks : 2] = hit
            supp[1 : 2 * n_blocks : 2] |= hit
            supp |= rng.random(n_qubits) < self.p / 2.0
        return _uniform_types(supp, rng)

    def sample_supports(self, n_qubits: int, trials: int, rng: np.random.Generator) -> np.ndarray:
        """(trials, n_qubits) boolean support matrix, vectorized."""
        if self.kind == "none" or self.p == 0.0:
            return np.zeros((trials, n_qubits), dtype=bool)
        if self.kind == "iid":
            return rng.random((trials, n_qubits)) < self.p
        supp = np.zeros((trials, n_qubits), dtype=bool)
        n_blocks = n_qubits // 2
        hit = rng.random((trials, n_blocks)) < self.p * self.p / 2.0
        supp[:, 0 : 2 * n_blocks : 2] = hit
        supp[:, 1 : 2 * n_blocks : 2] |= hit
        supp |= rng.random((trials, n_qubits)) < self.p / 2.0
        return supp

    def sample_frames(
        self, n_qubits: int, trials: int, rng: np.random.Generator
    ) -> tuple:
        """Vectorized frames: (trials, n_qubits) x and z uint8 arrays."""
        supp = self.sample_supports(n_qubits, trials, rng)
        t = rng.integers(0, 3, size=supp.shape, dtype=np.uint8)
        fx = (supp & (t <= 1)).astype(np.uint8)
        fz = (supp & (t >= 1)).astype(np.uint8)
        return fx, fz

    def to_json(self) -> str:
        plan = self.plan if isinstance(self.plan, str) else list(self.plan)
        return json.dumps({"kind": self.kind, "p": self.p, "plan": plan})

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        d = json.loads(text)
        plan = d["plan"]
        if not isinstance(plan, str):
            plan = tuple(int(s) for s in plan)
        return cls(d["kind"], float(d["p"]), plan)


def _uniform_types(supp: np.ndarray, rng: np.random.Generator) -> PauliFrame:
    n = supp.shape[0]
    frame = PauliFrame.identity(n)
    idx = np.flatnonzero(supp)
    if len(idx):
        # 0 -> X, 1 -> Y, 2 -> Z
        t = rng.integers(0, 3, size=len(idx))
        frame.x[idx[t <= 1]] = 1
        frame.z[idx[t >= 1]] = 1
    return frame


# ---------------------------------------------------------------------------
# statistical verification


@dataclass
class SubsetCheck:
    subset: tuple
    empirical: float
    bound: float
    sigma: float
    violated: bool


@dataclass
class LocalStochasticReport:
    n_samples: int
    p: float
    checks: list
    violations: list = field(init=False)

    def __post_init__(self):
        self.violations = [c for c in self.checks if c.violated]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_samples": self.n_samples,
                "p": self.p,
                "ok": self.ok,
                "violations": [
                    {"subset": list(c.subset), "empirical": c.empirical, "bound": c.bound}
                    for c in self.violations
                ],
            }
        )


def verify_local_stochastic(
    samples: np.ndarray,
    p: float,
    subsets: Sequence[Sequence[int]],
) -> LocalStochasticReport:
    """Check empirical subset-support rates against the p^|F| bound.

    samples: (T, n) boolean support matrix (or a list of PauliFrames).
    A subset F is flagged when its empirical rate exceeds p^|F| plus three
    binomial standard deviations computed at the bound.
    """
    supp = _as_support_matrix(samples)
    t = supp.shape[0]
    if t < 10_000:
        raise ValueError("need at least 10^4 samples for stable rates")
    checks = []
    for f in subsets:
        f = tuple(sorted(int(q) for q in f))
        emp = float(supp[:, f].all(axis=1).mean()) if f else 1.0
        bound = p ** len(f)
        sigma = math.sqrt(max(bound * (1.0 - bound), 0.0) / t)
        checks.append(SubsetCheck(f, emp, bound, sigma, emp > bound + 3.0 * sigma))
    return LocalStochasticReport(t, p, checks)


def _as_support_matrix(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray) and samples.dtype == bool:
        return samples
    if isinstance(samples, np.ndarray):
        return samples.astype(bool)
    rows = [(s.x | s.z).astype(bool) for s in samples]
    return np.array(rows)


def subsets_up_to(n_qubits: int, max_size: int) -> list:
    out = []
    for k in range(1, max_size + 1):
        out.extend(itertools.combinations(range(n_qubits), k))
    return out


def nested_chain(n_qubits: int, length: Optional[int] = None) -> list:
    length = n_qubits if length is None else min(length, n_qubits)
    return [tuple(range(k)) for k in range(1, length + 1)]
