"""Physical constants and receiver defaults shared across the package."""

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0        # m/s
CARRIER_FREQ = 1_575.42e6             # GPS L1, Hz
WAVELENGTH = SPEED_OF_LIGHT / CARRIER_FREQ   # ~0.1903 m
EARTH_RADIUS = 6_371_000.0            # spherical Earth model, m

CHIP_RATE = 1.023e6                   # chips/s
CODE_CHIPS = 1023                     # chips per C/A period
OVERSAMPLE = 4                        # samples per chip
CODE_SAMPLES = CODE_CHIPS * OVERSAMPLE       # L_c = 4092
SAMPLE_RATE = CHIP_RATE * OVERSAMPLE         # 4.092 MHz
T_SAMPLE = 1.0 / SAMPLE_RATE                 # s

# Doppler search grid: +/-4 kHz in 250 Hz steps (33 bins).
DOPPLER_STEP = 250.0
DOPPLER_MAX = 4000.0
DOPPLER_GRID = np.arange(-DOPPLER_MAX, DOPPLER_MAX + DOPPLER_STEP, DOPPLER_STEP)

# Reference satellite distance used to anchor the free-space gain model.
RANGE_REF = 23_000e3                  # m

# Receiver defaults.
NUM_ANTENNAS = 8
ACQ_THRESHOLD = 11.2                  # baseline CAF threshold tau
ACQ_THRESHOLD_NULLED = 7.5            # nulled-CAF threshold tau_J
NULL_DIM = 4                          # nulled interference dimensions I-hat
MUSIC_THRESHOLD = 10.0                # LoS screening threshold tau_M
MUSIC_WINDOW = 10                     # covariance snapshot count Z
RANGE_MIN = 18_000e3                  # pairwise-consistency bounds, m
RANGE_MAX = 28_000e3
IRLS_SIGMA = SPEED_OF_LIGHT * T_SAMPLE / 6.0   # pseudorange imprecision floor, m
SOLVER_MAX_ITER = 20
SOLVER_TOL = 1e-4                     # position-update convergence, m

# Simulation defaults.
SIM_CODES = 150                       # code periods per trial (150 ms)
DATA_STEP_INDEX = 30                  # transmitter-side data step K0
ACQ_OFFSET_CODES = 5                  # CAF window offset, keeps step out of window
CLOCK_OFFSET_MAX = 1e-3               # receiver clock offset upper bound, s
SPOOF_RANGE_MIN = 20_000e3            # apparent spoofed distance bounds, m
SPOOF_RANGE_MAX = 29_000e3
ATTACKER_RANGE = 10e3                 # attacker standoff from receiver, m
JAMMER_SWITCH_PROB = 0.05             # per-sample beam-pattern redraw probability
