"""Named observables and roofs used by the CLI and the acceptance corpus."""
from __future__ import annotations

from .cohomology import coboundary
from .errors import DomainError
from .observables import FourierObservable
from .specialflow import RoofFunction

# |u| <= 0.2 for the trivial roof, so 2 max |u| = 0.4 < 0.9
TRIVIAL_TRANSFER_AMPLITUDE = 0.2

OBSERVABLE_PRESETS = ("weyl11", "coboundary", "one", "cosx")
ROOF_PRESETS = ("nontrivial", "trivial", "constant")


def weyl11():
    """2 cos 2 pi (x + y) = e_{1,1} + e_{-1,-1}; each H_{m,n} part has |D| = 1."""
    return FourierObservable({(1, 1): 1.0, (-1, -1): 1.0}, name="weyl11")


def cos11(amplitude):
    return FourierObservable.cos_mode(1, 1, amplitude)


def observable(name, params):
    if name == "weyl11":
        return weyl11()
    if name == "coboundary":
        return FourierObservable(coboundary(cos11(2.0), params).coefficients, name="coboundary")
    if name == "one":
        return FourierObservable({(0, 0): 1.0}, name="one")
    if name == "cosx":
        return FourierObservable({(1, 0): 0.5, (-1, 0): 0.5}, name="cosx")
    raise DomainError(f"unknown observable preset {name!r}")


def roof_observable(name, params):
    if name == "nontrivial":
        return FourierObservable({(0, 0): 1.0, (1, 1): 0.1, (-1, -1): 0.1}, name="nontrivial")
    if name == "trivial":
        g = coboundary(cos11(TRIVIAL_TRANSFER_AMPLITUDE), params) + 1.0
        return FourierObservable(g.coefficients, name="trivial")
    if name == "constant":
        return FourierObservable({(0, 0): 1.0}, name="constant")
    raise DomainError(f"unknown roof preset {name!r}")


def roof(name, params):
    return RoofFunction.from_observable(roof_observable(name, params))
