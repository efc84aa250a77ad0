"""Published benchmark values for the standard pod configuration.

Two independent solutions of the same model are embedded: a commercial
finite-element groundwater simulator (``*_FE``) and a prior RBF
collocation run (``*_RBF``), both reported at six equally spaced depths.
The ``compare`` command measures a fresh run against both columns.
"""

import numpy as np

#: Elevations of the six slice planes, cm (x3 <= 0).
DEPTHS = np.array([0.0, -0.2776, -0.5552, -0.8328, -1.1104, -1.388])

#: Final hydraulic head, cm.
HEAD_FE = np.array([6118.39, 5125.76, 4133.13, 3140.5, 2147.87, 1155.24])
HEAD_RBF = np.array([6118.29, 5127.11, 4135.92, 3144.73, 2153.54, 1162.36])
#: Reported per-depth relative differences between the two columns, %.
HEAD_ERROR_PCT = np.array([0.00016, 0.0263, 0.0675, 0.13, 0.26, 0.62])

#: Final temperature, degC.
TEMPERATURE_FE = np.array([88.0, 87.933, 87.866, 87.798, 87.73, 87.66])
TEMPERATURE_RBF = np.full(6, 88.0)
TEMPERATURE_ERROR_PCT = np.array([0.0, 0.076, 0.15, 0.23, 0.31, 0.39])

#: Final solid caffeine concentration, Kg/L.
SOLID_CAFFEINE_FE = 4.32814e-3
SOLID_CAFFEINE_RBF = 4.3888e-3
SOLID_CAFFEINE_ERROR_PCT = 1.4

#: Node-count bookkeeping of the standard 6-slice cloud.
NODE_COUNTS = {"interior": 292, "top": 73, "lateral": 96, "bottom": 73}
