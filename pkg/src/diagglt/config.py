"""Default resolutions, caps, schedules and pass thresholds.

Every function that uses one of these accepts an override; the values here
are only what gets used when nothing is passed.
"""

#: grid / quadrature resolution for closures (number of sample points)
DEFAULT_RESOLUTION = 2**16

#: largest dense matrix handled by the Jacobi solvers
DENSE_CAP = 512
#: largest diagonal generated by default
DIAGONAL_CAP = 2**13

DEFAULT_SCHEDULE = (64, 128, 256, 512, 1024, 2048, 4096)
DEFAULT_TAIL_WINDOW = 3

DISCREPANCY_THRESHOLD = 0.02
ZERO_FRACTION_THRESHOLD = 0.01
PIECEWISE_THRESHOLD = 0.02

#: a tail that does not sit below its threshold still passes when it shrinks at
#: least like size**(-DECAY_EXPONENT) across the tail window
DECAY_EXPONENT = 0.25

DEFAULT_EPSILONS = (0.5, 0.1, 0.05, 0.01)

#: test-function family defaults
HAT_STEP = 0.1
HAT_WIDTH = 0.1
MAX_HATS_PER_AXIS = 201
