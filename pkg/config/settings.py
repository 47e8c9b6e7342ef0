from dotenv import load_dotenv

import os
from pathlib import Path

# ---------- Paths ----------
PROJECT_ROOT = Path(__file__).resolve().parents[1]
load_dotenv(PROJECT_ROOT / ".env")

DATA_DIR = Path(os.getenv("CUBOIDNET_DATA_DIR", PROJECT_ROOT / "data"))
RUN_DEFAULTS_PATH = PROJECT_ROOT / "config" / "run_defaults.yaml"

# ---------- Threads ----------
# Must be exported before numpy is first imported; BLAS reads these once.
THREADS = int(os.getenv("CUBOIDNET_THREADS", "1"))

if THREADS < 1:
    raise RuntimeError("CUBOIDNET_THREADS must be >= 1")

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, str(THREADS))

# ---------- Logging ----------
LOG_LEVEL = os.getenv("CUBOIDNET_LOG_LEVEL", "INFO").upper()
