"""Named desk-scale fixture circuits shipped with the package.

ts-stuck : 1 latch, next = self, init 0, bad = l0.  Safe, diameter 0.
ts-sat3  : 2 latches, next l0 = l0 | ~l1, next l1 = l1 | l0, init 00,
           bad = l1 & ~l0.  Safe, reachable {00, 01, 11}, diameter 2.
ts-cnt4  : 2-latch mod-4 counter, bad = l0 & l1.  Unsafe at depth 3.
"""

from importlib import resources

from .aiger import TransitionSystem, encode, parse_aag

FIXTURE_NAMES = ("ts-stuck", "ts-sat3", "ts-cnt4")


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")
    return resources.files("ic4mc.circuits").joinpath(f"{name}.aag").read_text()


def fixture_system(name: str) -> TransitionSystem:
    return encode(parse_aag(fixture_text(name)), name=name)
