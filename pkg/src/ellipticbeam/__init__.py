"""Elliptic-beam model of fading in atmospheric quantum optical channels.

Submodules
----------
specfun
    Lambert W, modified Bessel functions and adaptive quadrature.
beam_geometry
    Aperture transmittance of an elliptic Gaussian beam.
turbulence_params
    Gaussian statistics of beam centroid and shape in weak and strong turbulence.
channel_models
    Monte Carlo transmittance distributions and estimators.
quantum_optics
    Gaussian quadrature propagation and postselected squeezing.
cli
    Command-line interface.
"""

__version__ = "0.1.0"
