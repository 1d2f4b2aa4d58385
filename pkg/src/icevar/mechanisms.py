"""The four synthetic causal mechanisms and their closed-form evaluation.

Each mechanism maps the lagged source value to its additive effect on the
target. All four are odd functions with comparable overall strength but
qualitatively different shapes: clipped-linear, dead-zone step, early
saturation, and a sign flip between the origin region and the tails.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError

KINDS = ("linear", "threshold", "saturating", "sign_changing")

# Default clip bounds per clipping mechanism.
_CLIP_DEFAULTS = {"linear": (-1.2, 1.2), "saturating": (-1.0, 1.0)}


@dataclass(frozen=True)
class MechanismSpec:
    """One causal mechanism g(.) with its parameters.

    ``threshold_c`` is used by the threshold and sign_changing kinds,
    ``amplitude_a`` by threshold only, and the clip bounds by linear and
    saturating. Unused fields are ignored by ``evaluate``.
    """

    kind: str
    threshold_c: float = 0.6
    amplitude_a: float = 1.6
    clip_lo: float | None = None
    clip_hi: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown mechanism kind {self.kind!r}; expected one of {KINDS}")
        lo, hi = _CLIP_DEFAULTS.get(self.kind, (-1.0, 1.0))
        if self.clip_lo is None:
            object.__setattr__(self, "clip_lo", lo)
        if self.clip_hi is None:
            object.__setattr__(self, "clip_hi", hi)
        if not self.threshold_c > 0:
            raise ConfigError(f"threshold_c must be > 0, got {self.threshold_c}")
        if not self.amplitude_a > 0:
            raise ConfigError(f"amplitude_a must be > 0, got {self.amplitude_a}")
        if not self.clip_lo < self.clip_hi:
            raise ConfigError(f"clip bounds must satisfy lo < hi, got [{self.clip_lo}, {self.clip_hi}]")


def eval_mechanism(spec: MechanismSpec, x):
    """Evaluate g(x). Accepts a scalar or an ndarray; total on all reals.

    Closed forms:
      linear         clip(x, clip_lo, clip_hi)
      threshold      a * sign(x) where |x| > c, else 0
      saturating     clip(x, clip_lo, clip_hi)
      sign_changing  -x where |x| < c, +x where |x| >= c
    """
    arr = np.asarray(x, dtype=float)
    if spec.kind in ("linear", "saturating"):
        out = np.clip(arr, spec.clip_lo, spec.clip_hi)
    elif spec.kind == "threshold":
        out = np.where(np.abs(arr) > spec.threshold_c, spec.amplitude_a * np.sign(arr), 0.0)
    else:  # sign_changing
        out = np.where(np.abs(arr) < spec.threshold_c, -arr, arr)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out
