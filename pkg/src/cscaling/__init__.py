"""Numerical toolkit for the complex scaling method on domains in C^d.

Submodules
----------
geometry   defining functions, model-domain catalog, Levi form, finite type
scaling    Pinchuk / Frankel scaling, Cayley transform, set convergence
invmetrics Kobayashi / Caratheodory metrics and boundary asymptotics
bergman    Bergman kernel, metric and holomorphic sectional curvature
wu         Wu metric through the minimum-volume Hermitian ellipsoid
harmonic   Poisson kernel of the ball and its two-sided bound
cli        command-line front end
"""

__version__ = "0.1.0"
