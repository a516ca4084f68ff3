"""Built-in scenarios fig1 to fig6.

All share nu = 0.02, L = 1, 12 elements and the winding-one initial field
``(sin 2 pi x, cos 2 pi x, 0)``. Field-control presets use the lumped mass
matrix: with consistent mass the semi-discrete field-control flow does not
keep ``k ||m - r||^2 + ||m_x||^2`` monotone, with lumped mass it does.
"""
import math

from .config import InitialCondition, OutputConfig, PhaseSpec, ScenarioConfig
from .core import PhysicalParams

__all__ = ["R1", "R2", "R3", "R4", "REFERENCE_SETTLE_STATE", "PRESETS", "get_preset", "describe"]

_S = 1.0 / math.sqrt(2.0)
R1 = (-_S, 0.0, _S)
R2 = (1.0, 0.0, 0.0)
R3 = (0.0, 0.0, 1.0)
R4 = (0.0, 1.0, 0.0)

# settle state drawn in the published uncontrolled figure; its norm is 0.6,
# so it cannot be a saturated equilibrium and is shown for comparison only
REFERENCE_SETTLE_STATE = (0.0, -0.6, 0.0)

AFFINE_GAIN = 0.5
FIELD_GAIN = 10.0


def _settle():
    return PhaseSpec("none")


def _affine(target):
    return PhaseSpec("affine", AFFINE_GAIN, target)


def _field(target):
    return PhaseSpec("field", FIELD_GAIN, target)


def _preset(name, description, phases, mass="consistent"):
    return ScenarioConfig(
        name=name,
        description=description,
        physical=PhysicalParams(nu=0.02, length=1.0),
        n_elements=12,
        mass=mass,
        initial=InitialCondition("trig", 1),
        phases=tuple(phases),
        record_every=200,
        outputs=OutputConfig(directory=f"out/{name}"),
    )


PRESETS = {
    "fig1": _preset("fig1", "uncontrolled settle", [_settle()]),
    "fig2": _preset("fig2", "affine -> r1, k=0.5", [_affine(R1)]),
    "fig3": _preset("fig3", "settle, then affine -> r2=(1,0,0), then -> r3=(0,0,1), k=0.5",
                    [_settle(), _affine(R2), _affine(R3)]),
    "fig4": _preset("fig4", "field -> r1, k=10", [_field(R1)], mass="lumped"),
    "fig5": _preset("fig5", "settle, then field -> r1, k=10", [_settle(), _field(R1)], mass="lumped"),
    "fig6": _preset("fig6", "settle, then field -> r1, then field -> r4=(0,1,0), k=10",
                    [_settle(), _field(R1), _field(R4)], mass="lumped"),
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def describe():
    """One line per preset."""
    return [f"{name}: {cfg.description} ({cfg.n_elements} elements, {cfg.mass} mass)"
            for name, cfg in PRESETS.items()]
