import os


NAME_OF_PROJECT = "fgattack"
AUTHOR = "fgattack"
VERSION = "1.0.0"

DATA_DIR_ENV_VAR = "FGA_DATA_DIR"
DEFAULT_OUT_DIR = "results"


# fga solver
FGA_MAX_ITERATIONS = 100
FGA_RESIDUAL_TOLERANCE = 1e-8

# used wherever scores get compared against closed forms or bounds
VERIFY_MAX_ITERATIONS = 400
VERIFY_TOLERANCE = 1e-12

AXIOM_TOLERANCE = 1e-9
BOUND_SLACK = 1e-9


# target / attacker selection (Simulations section)
TARGET_MIN_INDEG_EXCLUSIVE = 0
TARGET_INDEG_BELOW = 10
TARGET_MIN_GOODNESS = 0.5

ESTABLISHED_OUTDEG_ABOVE = 5
ESTABLISHED_FAIRNESS_ABOVE = 0.7

FRESH_MIN_INDEG_EXCLUSIVE = 0
FRESH_INDEG_BELOW = 10

ESTABLISHED = "established"
FRESH = "fresh"
SYBIL = "sybil"
ATTACKER_CLASSES = (ESTABLISHED, FRESH, SYBIL)


# modified indirect attack
SCALE = 5
MAX_EDGES = 10

# weights tried by the greedy attacks, +1 first (tie-break order)
GREEDY_WEIGHTS = (1.0, -1.0)

EXHAUSTIVE_MAX_CANDIDATES = 10 ** 6

# weights swept by the indirect sybil bound trials
SYBIL_TRIAL_WEIGHTS = (-1.0, -0.5, 0.5, 1.0)


# pinned-fairness gadgets (see src/gadgets.py)
GADGET_RATERS = 2
GADGET_AUX_SINKS = 6
GADGET_ANCHORS = 12
GADGET_MAX_AUX_SINKS = 192
GADGET_MAX_ANCHORS = 384

# repair passes over the permutations of a random minimum-k-neighbour network
MIN_K_REPAIR_PASSES = 100


# dataset name -> (file name, rating half-width)
DATASETS = {
    "otc": ("soc-sign-bitcoinotc.csv", 10.0),
    "alpha": ("soc-sign-bitcoinalpha.csv", 10.0),
    "rfa": ("rfa-net.csv", 1.0),
}

# parameters used to search weak targets for the modified indirect attack
WEAK_TARGET_PARAMS = {
    "otc": {"max_indeg": 10, "min_goodness": 0.8, "samples": 20, "edges": 20},
    "alpha": {"max_indeg": 13, "min_goodness": 0.5, "samples": 30, "edges": 20},
    "rfa": {"max_indeg": 10, "min_goodness": 0.5, "samples": 27, "edges": 20},
}

# smallest per-k sample count for each dataset
SAMPLES_PER_K = {"otc": 21, "alpha": 24, "rfa": 25}
MIXED_SAMPLES = {"otc": 26, "alpha": 12, "rfa": 17}

CAMPAIGN_K_VALUES = tuple(range(1, 8))
MIXED_K_VALUES = tuple(range(1, 7))

# dataset statistics table thresholds
STATS_SMALL_INDEG = 10
STATS_FAIRNESS_AT = (0.95, 0.7)
STATS_GOODNESS_GE = (0.0, 0.5)
STATS_GOODNESS_LE = (-0.3,)


CI_Z = 1.96
CSV_FLOAT_FORMAT = "%.12g"
UNDEFINED_MARKER = "NA"


# debug stuff
IS_DEV = os.path.exists(".gitignore") and False
IS_DEBUG = IS_DEV and False


def get_storage_mode():
    import src.userdata as ud
    if IS_DEV:
        return ud.CURRENT_WORKING_DIR
    else:
        return ud.BEST
