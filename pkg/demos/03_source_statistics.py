"""
How the light's photon statistics set the narrowing
===================================================

On a Gaussian beam with detected peak mean 10, condition on k=10 photons.
Sub-Poissonian light narrows most: a Fock state with N=10 only gives ten
counts where the transmission is one.  Thermal light is so broad in photon
number that conditioning on k=10 widens the profile beyond the irradiance.
"""
from pnr_scope import GaussianProfile, SourceStatistics, fwhm
from pnr_scope.photon_stats import conditional_profile

prof = GaussianProfile(waist=1.0)
dom = (-4.0, 4.0)
print(f"classical   FWHM = {fwhm(prof, domain=dom).fwhm:.4f} w")
for src in (SourceStatistics.fock(10), SourceStatistics.coherent(10), SourceStatistics.thermal(10)):
    w = fwhm(lambda x: conditional_profile(src, prof, 10, x, 10.0), domain=dom).fwhm
    print(f"{src.family:10s}  FWHM = {w:.4f} w")
