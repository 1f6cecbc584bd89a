from enum import Enum


class DescentDirection(str, Enum):
    Gradient = "gradient"
    # damped Gauss-Newton preconditioned gradient
    GaussNewton = "gauss-newton"
