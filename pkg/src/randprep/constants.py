"""Fixed constants shared by the amplitude, ensemble, metric, and bound modules.

Categories: numerical tolerances (normalization, exact identities, subspace
dependence, eigenvalue clamping); size limits (dense oracle, observables,
TFIM chain lengths, Lanczos Krylov space); model constants (T-count price,
slack regime for the a-bound check, decay-fit defaults); and CLI exit codes.
"""

# Tolerances
NORM_TOL = 1e-10  # unit-norm check on AmplitudeVector
IDENTITY_TOL = 1e-12  # exact algebraic identities (sum p_m, shared gamma, residuals)
DEPENDENCE_TOL = 1e-10  # numerically dependent spanning vectors are dropped
EIGEN_CLAMP = 1e-14  # |lambda| below this counts as zero in trace norms
SYMMETRY_TOL = 1e-12  # observable symmetry check
BOUND_TOL = 1e-10  # slack when asserting an inequality against an exact distance
ZETA_TOL = 1e-12  # Euler-Maclaurin remainder bound for zeta

# Size limits
ORACLE_MAX_QUBITS = 10
MAX_OBSERVABLE_QUBITS = 10
TFIM_MIN_SITES = 3
TFIM_MAX_SITES = 14
TFIM_DENSE_MAX_SITES = 12
MAX_STATE_QUBITS = 24

# Lanczos / ground state
LANCZOS_KRYLOV_DIM = 200
LANCZOS_TOL = 1e-10
GROUND_RESIDUAL_TOL = 1e-8
DEGENERACY_GAP = 1e-10

# Model constants
DEFAULT_T_PER_BIT = 3.0
DEFAULT_MAX_DENSE_MEMBERS = 4096
SLACK_A_COEFF = 5.0  # a_max <= (c+2) eps + 5 eps^2 ...
SLACK_MAX_C = 4.0  # ... checked only for c <= 4 ...
SLACK_MAX_EPS = 0.2  # ... and eps <= 0.2
FIT_SKIP_FRACTION = 0.1
FIT_MIN_NONZERO = 8
DEGENERATE_RATE_MARGIN = 1e-9

# Sampler
SAMPLER_MIN_CHECKED_SHOTS = 10_000
SAMPLER_TV_SIGMAS = 5.0

# Output
CSV_SIGNIFICANT_DIGITS = 17

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
