"""
Bergman Toolkit - Random Polynomial Model
Seeded random polynomials with exact rationalized coefficients, and per-trial seeding
"""

from fractions import Fraction
from typing import List, Literal

import numpy as np
import structlog
from pydantic import BaseModel, Field

from bergman_toolkit.config import config
from bergman_toolkit.polycore import ExactComplex, HoloPoly, MultiIndex, multiindex_enumerate

logger = structlog.get_logger(__name__)


class RandomPolyModel(BaseModel):
    """Support pattern and size of a random polynomial"""

    n: int = Field(ge=1)
    degree: int = Field(ge=0)
    sparsity: Literal["dense", "sparse"] = "dense"
    density: float = Field(default=0.5, gt=0.0, le=1.0)
    homogeneous: bool = False


def rationalize(x: float, bits: int = None) -> Fraction:
    """Round x to the nearest multiple of 2^-bits"""
    bits = config.COEFF_DENOMINATOR_BITS if bits is None else bits
    scale = 1 << bits
    return Fraction(int(round(x * scale)), scale)


def _unit_disk_coefficient(rng: np.random.Generator, bits: int) -> ExactComplex:
    # Resample the (measure-zero) draws that round to exactly zero.
    while True:
        radius = np.sqrt(rng.random())
        angle = 2.0 * np.pi * rng.random()
        coeff = ExactComplex(
            rationalize(radius * np.cos(angle), bits), rationalize(radius * np.sin(angle), bits)
        )
        if not coeff.is_zero():
            return coeff


def support_for(model: RandomPolyModel) -> List[MultiIndex]:
    """Monomials a random polynomial of this model may populate"""
    support = multiindex_enumerate(model.n, model.degree)
    if model.homogeneous:
        support = [alpha for alpha in support if alpha.degree == model.degree]
    return support


def generate_polynomial(model: RandomPolyModel, seed: int) -> HoloPoly:
    """
    Draw a polynomial of exact degree model.degree

    Coefficients are uniform on the complex unit disk, rounded to the fixed
    2^-COEFF_DENOMINATOR_BITS grid so that downstream checks can stay exact.

    Args:
        model (RandomPolyModel): Support pattern
        seed (int): Seed for numpy's default_rng

    Returns:
        HoloPoly with exact coefficients
    """
    rng = np.random.default_rng(seed)
    bits = config.COEFF_DENOMINATOR_BITS
    support = support_for(model)
    top = [alpha for alpha in support if alpha.degree == model.degree]

    if model.sparsity == "dense":
        chosen = support
    else:
        mask = rng.random(len(support)) < model.density
        chosen = [alpha for alpha, keep in zip(support, mask) if keep]
        if not any(alpha.degree == model.degree for alpha in chosen):
            chosen.append(top[int(rng.integers(len(top)))])

    terms = {alpha: _unit_disk_coefficient(rng, bits) for alpha in chosen}
    return HoloPoly(model.n, terms)


def trial_seeds(master_seed: int, count: int) -> List[int]:
    """Independent per-trial seeds spawned from one master seed"""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint32)[0]) for child in children]
