"""Day-of-week submission effect analysis for journal article metadata.

Turns article submission records (received dates, authors, countries) into
weekly concentration ratios, normality-transformed dependent variables,
dummy-variable regressions (OLS / robust / random-effects panel), and
per-country localization quotients with natural-breaks classification.
"""

__version__ = "0.1.0"

from . import corpus, diststat, geo, harvest, linmod, panel, rud, synth  # noqa: F401
