"""Nematic liquid-crystal equilibria on a two-dimensional annulus.

Library + CLI computing defect-free, spiral and boundary-defect director
configurations, their elastic energies and local-stability diagnostics,
in both the director-angle (Oseen-Frank) and tensor order-parameter
(Landau-de Gennes) descriptions.
"""

__version__ = "0.1.0"
