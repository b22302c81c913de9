"""Bundled reference systems."""

from __future__ import annotations

from dataclasses import dataclass

from .qfield import QuadInt
from .substitution import SubstitutionSystem, parse

__all__ = ["Preset", "PRESETS", "get_preset", "load_system"]


@dataclass(frozen=True)
class Preset:
    name: str
    rule_text: str
    seed: str
    patch_level: int
    # explicit self-consistent cutoff; None means the generic default
    core_radius_coords: tuple[int, int] | None = None
    sample_cap: int = 2_000_000

    def system(self) -> SubstitutionSystem:
        return parse(self.rule_text)

    def core_radius(self, system: SubstitutionSystem) -> QuadInt | None:
        if self.core_radius_coords is None:
            return None
        a, b = self.core_radius_coords
        return system.ring.int2(a, b)


PRESETS = {
    "ssm": Preset(
        name="ssm",
        rule_text="a -> bba; b -> ab",
        seed="a|a",
        patch_level=9,
    ),
    "sigma": Preset(
        name="sigma",
        rule_text="a -> aaaaabb; b -> baa",
        seed="a|a",
        patch_level=6,
        # the tight cutoff 3+2*sqrt2 keeps the self-consistent table at its
        # minimal presentation; the generic default also closes but is larger
        core_radius_coords=(3, 2),
        sample_cap=200_000,
    ),
    "fibonacci": Preset(
        name="fibonacci",
        rule_text="a -> ab; b -> a",
        seed="a|a",
        patch_level=12,
    ),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


def load_system(spec: str) -> tuple[SubstitutionSystem, Preset | None]:
    """A preset name or a raw rule text."""
    if spec in PRESETS:
        preset = PRESETS[spec]
        return preset.system(), preset
    return parse(spec), None
