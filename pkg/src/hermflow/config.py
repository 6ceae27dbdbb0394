"""Global tolerance record.

All structural checks in the package read their thresholds from ``TOL``.
Use :func:`with_overrides` to get a modified copy; the default record is
never mutated.
"""

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    structure: float = 1e-10      # symmetry, skewness, J^2 = -I, tangency membership
    compat: float = 1e-10         # ||g^-1 w + w^-1 g||_F
    volume: float = 1e-9          # det(g) vs det(w), relative
    spd_floor: float = 1e-12      # smallest admissible eigenvalue
    frame_det: float = 1e-10      # det(f) floor for frame jets
    drift: float = 1e-8           # monitored residuals during integration
    drift_abort: float = 1e-6     # step_rk4 raises beyond this

    def with_overrides(self, **overrides):
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance keys: {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})


TOL = Tolerances()


def with_overrides(**overrides):
    return TOL.with_overrides(**overrides)
