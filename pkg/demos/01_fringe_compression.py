"""
Fringe compression behind a single slit
=======================================

A coherent beam diffracts through a 250 um slit and is scanned by a
photon-number-resolving detector.  Conditioning on k detected photons
narrows the central lobe: the profile ``P_k(x)`` peaks where the local
mean equals k, so large k only survives near the centre.

This script prints the FWHM of each conditional profile relative to the
classical irradiance and to a click detector.
"""
import numpy as np

from pnr_scope import SlitGeometry, SlitProfile, SourceStatistics, fwhm
from pnr_scope.photon_stats import conditional_profile, spd_click_profile

MU = 3.6
geom = SlitGeometry(slit_width=250e-6, wavelength=1550e-9, screen_distance=0.23)
prof = SlitProfile(geom)
src = SourceStatistics.coherent(MU)

classical = fwhm(prof).fwhm
spd = fwhm(lambda x: spd_click_profile(src, prof, MU, x), domain=prof.domain).fwhm
print(f"classical FWHM {classical * 1e3:.3f} mm, click detector {spd * 1e3:.3f} mm")

print(" k   FWHM (mm)   vs classical   vs click   multimodal")
for k in range(1, 10):
    w = fwhm(lambda x, k=k: conditional_profile(src, prof, k, x, MU), domain=prof.domain)
    print(f"{k:2d}   {w.fwhm * 1e3:8.3f}   {classical / w.fwhm:11.3f}   {spd / w.fwhm:8.3f}   {w.multimodal}")

# k below the peak mean peaks off axis, where the local mean equals k
x = np.linspace(-geom.first_null, geom.first_null, 2001)
p1 = conditional_profile(src, prof, 1, x, MU)
print(f"k=1 peaks at x = +/-{abs(x[np.argmax(p1)]) * 1e3:.3f} mm, not on axis")
