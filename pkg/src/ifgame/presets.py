"""Ready-made 3-user games used across the demos and tests.

All three draw every link gain uniformly from a two-element alphabet
(512 channel states).  ``example1`` satisfies the contraction condition
(rho = 2/3), so iterative water-filling converges to the unique NE.
``example2`` violates it (rho = 4/3) and simultaneous water-filling
cycles at the default budget, but the quadratic form of I + Hhat stays
positive definite, so the regularized projection solver still finds the
unique NE.  ``pd_not_contractive`` is a second instance of that same
regime with an even smaller direct-gain spread.
"""

from .game import GameSpec


def example1(pbar=1.0) -> GameSpec:
    return GameSpec.symmetric(3, [3.0, 1.5], [0.1, 0.5], pbar=pbar)


def example2(pbar=2.0) -> GameSpec:
    return GameSpec.symmetric(3, [0.3, 1.0], [0.2, 0.1], pbar=pbar)


def pd_not_contractive(pbar=1.0) -> GameSpec:
    return GameSpec.symmetric(3, [0.3, 0.6], [0.2, 0.1], pbar=pbar)
