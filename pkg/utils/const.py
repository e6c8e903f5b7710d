import math

# quadrature defaults
DEFAULT_TARGET_ABS_ERROR = 1e-12
DEFAULT_MAX_PANELS = 200_000
DEFAULT_TAIL_BOUND = 1e-14
DEFAULT_PANEL_ORDER = 15
DEFAULT_PHASE_PER_PANEL = 2.0 * math.pi
DEFAULT_MAX_PANEL_WIDTH = 0.5

ORACLE_TARGET_ABS_ERROR = 1e-13
ORACLE_TAIL_BOUND = 1e-16
ORACLE_PANEL_ORDER = 30
ORACLE_PHASE_PER_PANEL = math.pi
ORACLE_MAX_PANEL_WIDTH = 0.25

# multiple of machine epsilon times the L1 mass of a panel below which the
# order-n / order-2n difference is treated as rounding noise
ROUNDING_FACTOR = 50.0

# tanh-sinh endpoint rule: trapezoid steps in t and truncation of |t|
TANH_SINH_STEPS = (1.0 / 8.0, 1.0 / 16.0)
TANH_SINH_T_MAX = 3.5

# algebraically decaying tails are cut where this much mass remains and the
# rest is integrated with a Fourier-weighted rule
HEAVY_TAIL_CUT_MASS = 1e-3

# sentinel for MassDistribution.tail_decay_exponent
SUPER_POLYNOMIAL = math.inf

# observables
CONDITIONING_FACTOR = 10.0
MOMENT_TOL = 1e-12
NORMALIZATION_TOL = 1e-10
ENDPOINT_STEPS = (1e-3, 1e-4, 1e-5)
NONNEGATIVITY_SAMPLES = 2000

# long-time windows and verification tolerances
LONG_TIME_WINDOW = (50.0, 200.0)
SCALING_WINDOW = (80.0, 200.0)
KAPPA_REL_TOL = 0.15
SLOPE_REL_TOL = 0.02
ASYMPTOTE_REL_TOL = 0.03
ZETA_REL_TOL = 0.10
ZETA_ABS_FLOOR = 0.10
MASS_LIMIT_REL_TOL = 0.01
RATE_REL_TOL = 0.05
RATE_SPREAD_TOL = 0.05
SHORT_TIME_REL_TOL = 1e-3
SHORT_TIME_MASS_REL_TOL = 1e-2
DERIVATIVE_REL_TOL = 1e-6
DERIVATIVE_STEP = 1e-4
ORACLE_AGREEMENT = 1e-11
MIN_FIT_POINTS = 5
# |P / P_long_time - 1| must fall off as tau^-2 within this exponent tolerance
ASYMPTOTIC_EXPONENT = -2.0
ASYMPTOTIC_EXPONENT_TOL = 0.3
FIT_POINTS = 16

# output
CSV_FLOAT_FORMAT = ".17g"
CURVE_HEADER = ("tau", "re_A", "im_A", "abs_err", "P", "M", "Gamma", "flag")

# figure datasets; every caption uses the toy density with xi0 = 1
FIGURE_XI0 = 1.0
LINEAR_FIGURE_POINTS = 201
LOG_FIGURE_POINTS = 121

FIGURES = {
    1: {"quantity": "survival", "tau": (0.0, 20.0), "log_time": False,
        "curves": [("a", 0, 0), ("b", 0, 1), ("c", 0, 2), ("d", 0, 3), ("e", 0, 4)]},
    2: {"quantity": "survival", "tau": (0.0, 15.0), "log_time": False,
        "curves": [("a", 1, 0), ("b", 1, 1), ("c", 1, 2), ("d", 1, 3), ("e", 1, 4)]},
    3: {"quantity": "abs_log_survival", "tau": (-1.0, 5.0), "log_time": True,
        "curves": [("a", 0, 5), ("b", 0, 3), ("c", 0, 0), ("d", 1, 5), ("e", 1, 2),
                   ("f", 2, 4), ("g", 2, 2), ("h", 1, 0), ("i", 2, 0)]},
    4: {"quantity": "momentum_ratio", "tau": (0.0, 50.0), "log_time": False,
        "curves": [("a", 0, 1), ("b", 0, 2), ("c", 0, 3), ("d", 0, 4), ("e", 0, 5)]},
    5: {"quantity": "momentum_ratio", "tau": (0.0, 50.0), "log_time": False,
        "curves": [("a", 1, 2), ("b", 1, 3), ("c", 2, 2), ("d", 1, 4)]},
    6: {"quantity": "scaling_ratio", "tau": (0.0, 50.0), "log_time": False,
        "curves": [("a", 0, 5), ("b", 0, 4), ("c", 0, 3), ("d", 0, 2), ("e", 0, 1)]},
    7: {"quantity": "scaling_ratio", "tau": (0.0, 60.0), "log_time": False,
        "curves": [("a", 2, 4), ("b", 1, 5), ("c", 2, 3), ("d", 1, 2), ("e", 1, 1)]},
    8: {"quantity": "mass", "tau": (0.0, 15.0), "log_time": False,
        "curves": [("a", 1, 0), ("b", 1, 1), ("c", 1, 2), ("d", 1, 3), ("e", 1, 4)]},
    9: {"quantity": "mass", "tau": (0.0, 15.0), "log_time": False,
        "curves": [("a", 2, 0), ("b", 2, 1), ("c", 2, 2), ("d", 2, 3), ("e", 2, 4)]},
    10: {"quantity": "rate", "tau": (0.0, 30.0), "log_time": False,
         "curves": [("a", 1, 4), ("b", 1, 3), ("c", 1, 2), ("d", 1, 1), ("e", 1, 0)]},
    11: {"quantity": "rate", "tau": (0.0, 30.0), "log_time": False,
         "curves": [("a", 2, 4), ("b", 2, 3), ("c", 2, 2), ("d", 2, 1), ("e", 2, 0)]},
    12: {"quantity": "abs_log_mass_deviation", "tau": (1.0, 3.3), "log_time": True,
         "curves": [("a", 2, 4), ("b", 2, 2), ("c", 1, 2), ("d", 2, 1), ("e", 0, 3),
                    ("f", 0, 5)]},
    13: {"quantity": "mass_ratio", "tau": (0.0, 10.0), "log_time": False,
         "curves": [("a", 1, 1), ("b", 0, 1), ("c", 1, 2), ("d", 0, 2), ("e", 2, 3),
                    ("f", 1, 3), ("g", 1, 4), ("h", 0, 4)]},
    14: {"quantity": "abs_log_rate", "tau": (1.5, 3.8), "log_time": True,
         "curves": [("a", 2, 0), ("b", 2, 2), ("c", 2, 4), ("d", 1, 0), ("e", 1, 2),
                    ("f", 1, 5), ("g", 0, 0), ("h", 0, 3), ("i", 0, 5)]},
    15: {"quantity": "rate_ratio", "tau": (0.0, 30.0), "log_time": False,
         "curves": [("a", 1, 4), ("b", 2, 3), ("c", 2, 2), ("d", 0, 2), ("e", 0, 1)]},
}
