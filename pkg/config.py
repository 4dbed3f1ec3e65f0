"""
Shipped defaults for gapscope.
Override them with a JSON config file (see gapscope.example.json),
GAPSCOPE_* environment variables, or command-line flags.
"""

TOOL_VERSION = '0.3.0'

# Run defaults used by every subcommand
GAPSCOPE_DEFAULTS = {
    'lambda': 0.5,
    'alpha': 'golden',
    'E': 0.0,
    'epsilon': 0.0,
    'grid': 1e-3,
    'n': 2000,             # truncation size for Sturm / IDS
    'iters': 20000,        # cocycle iterations for Lyapunov / rotation / dry-check
    'scan_iters': 2000,    # UH iterations per grid point in spectrum scans
    'phases': 8,
    'seed': 0,
    'kmax': 5,
    'max_q': 30,           # butterfly denominator bound
    'norm': 1e-4,          # kam-step perturbation size
    'qnext': 8,
    'workers': 1,
    'output': 'gapscope_out',
    'cache_dir': '.gapscope_cache',
}

# Frequency presets: partial quotients plus the closed-form value
ALPHA_PRESETS = {
    'golden': {
        'quotients': [1] * 30,
        'value': 0.6180339887498949,   # (sqrt(5) - 1) / 2
    },
    'silver': {
        'quotients': [2] * 18,    # float value stays faithful up to q_18
        'value': 0.41421356237309515,  # sqrt(2) - 1
    },
}

# Numerical tolerances shared across modules
TOLERANCES = {
    'cf_remainder': 1e-10,     # continued-fraction remainder treated as zero
    'det': 1e-8,               # SL(2) determinant drift
    'cone_floor': 1e-6,        # minimal stable/unstable transversality
    'degree_step': 0.125,      # max projective step (turns) when counting degree
    'singular_det': 1e-10,     # conjugation map invertibility
    'parabolic_trace': 1e-8,   # ||trace| - 2| below this routes to the parabolic solver
    'ids_plateau': 1e-3,       # IDS variation allowed across a detected gap
    'ids_growth': 1e-3,        # IDS increase across a grid cell that marks it as spectrum
}

# Upper bound for label searches
MAX_LABEL = 30

# Butterfly sweeps refuse larger denominators
MAX_BUTTERFLY_Q = 200

# kam-step demo: parabolic constant [[1, d], [0, 1]] and perturbation modes
KAM_DEMO = {
    'd': 0.2,
    'modes': (1, 2, 3),
    'target_exponent': 1.8,
}

# phases unioned per rational frequency in butterfly sweeps
BUTTERFLY_PHASES = 4
