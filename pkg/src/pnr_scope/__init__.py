"""
pnr_scope: photon-number-resolved imaging of diffraction-limited beams.

Profiles of slit, Airy and Gaussian beams, the photon statistics seen by a
number-resolving detector scanning them, a seeded Monte Carlo of the scan,
and the width/contrast analysis built on top.
"""
__version__ = "0.1.0"

from .errors import ConfigurationError, DomainError, NoPeakError, NumericalError, PnrScopeError
from .bessel import bessel_j1
from .profiles import (AiryProfile, GaussianProfile, IrradianceProfile, PinholeGeometry,
                       SlitGeometry, SlitProfile, TabulatedProfile, TwoBeamProfile, airy,
                       gaussian, rayleigh_separation, slit_sinc2, two_beam)
from .photon_stats import (DetectionModel, PhotonNumberDistribution, SourceStatistics,
                           beamsplitter_transform, classical_mean_profile, conditional_profile,
                           detected_distribution, source_pmf, spd_click_profile)
from .simulate import (CountTable, ScanPlan, per_k_profiles, reconstruct_classical,
                       reconstruct_spd, run_scan)
from .analysis import (ContrastReport, FitResult, FwhmResult, compression_factor, contrast,
                       contrast_sweep, fit_profile, fwhm, sparrow_limit)
