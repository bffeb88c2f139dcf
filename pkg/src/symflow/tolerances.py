"""Numerical tolerance ledger.

The identities being checked are exact, so every threshold here is
implementation policy.  ``SYMFLOW_TOL`` overrides the ledger: either a bare
float (sets ``membership``) or a JSON object with any of the field names.
"""

from __future__ import annotations

import dataclasses
import json
import os


@dataclasses.dataclass
class Tolerances:
    membership: float = 1e-9     # Frobenius residual for set membership / equality
    singular: float = 1e-12      # relative smallest singular value, times |A|
    critical: float = 1e-8       # gradient-equation residual, times |Xhat|
    kernel_gap: float = 1e-6     # Hessian eigenvalue |lambda| < gap * max|lambda|
    kernel_floor: float = 1e-12
    cluster_gap: float = 1e-8    # relative gap separating singular-value blocks
    cluster_radius: float = 1e-4
    series: float = 1e-16        # Taylor cutoff, relative term size

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def update(self, **kw) -> None:
        for k, v in kw.items():
            if not hasattr(self, k):
                raise KeyError(f"unknown tolerance {k!r}")
            setattr(self, k, float(v))


def _from_env() -> Tolerances:
    tol = Tolerances()
    raw = os.environ.get("SYMFLOW_TOL")
    if raw:
        raw = raw.strip()
        if raw.startswith("{"):
            tol.update(**json.loads(raw))
        else:
            tol.update(membership=float(raw))
    return tol


TOL = _from_env()
