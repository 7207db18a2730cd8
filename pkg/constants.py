LOG_FORMAT = '%(asctime)-15s %(message)s'
DEFAULT_LAMBDA = 100.0
DEFAULT_T = 3
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100000      # coordinate sweeps
LAMBDA_INFINITY = 1e6          # stands in for the equality-constrained problem
SNAP_THRESHOLD = 1e-12
LARS_MIN_STEPS = 500
LARS_STEPS_PER_ATOM = 10
ZERO_COLUMN_NORM = 1e-14
ZERO_CODE_NORM = 1e-12
UNIT_NORM_TOL = 1e-10
KKT_SLACK = 1e-12
KMEANS_N_INIT = 10
KMEANS_MAX_ITER = 300
KMEANS_TOL = 1e-9
BRIDGE_WEIGHT = 1e-3
GRID_RESOLUTION_S1 = 1e-3      # radians
GRID_RESOLUTION_S2 = 1e-2
GRID_CHUNK_SIZE = 65536
SPAN_TOL = 1e-9
LP_TOLERANCE = 1e-10
CSV_FLOAT_FORMAT = '.17g'
LABEL_COLUMN = 'label'
CHECK_ALIASES = {'eq15': 'gauge'}
