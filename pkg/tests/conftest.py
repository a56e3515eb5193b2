# Pin BLAS threading before numpy loads anywhere in the test process: the
# complexity/timing assertions compare single-threaded costs, and thread
# startup jitter would poison the log-log fits.
import os

for _var in (
    "OPENBLAS_NUM_THREADS",
    "OMP_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
):
    os.environ.setdefault(_var, "1")
