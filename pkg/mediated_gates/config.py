import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# Reports land here unless --output points elsewhere.
OUTPUT_DIR = Path(os.getenv("MEDIATED_OUTPUT_DIR", "./storage/reports"))

LOG_LEVEL = os.getenv("MEDIATED_LOG_LEVEL", "INFO")

SEED = int(os.getenv("MEDIATED_SEED", "7"))
WORKERS = int(os.getenv("MEDIATED_WORKERS", "1"))
RESTARTS = int(os.getenv("MEDIATED_RESTARTS", "64"))

# Invariant checks (unitarity, factorization) vs. optimizer acceptance.
TOLERANCE = float(os.getenv("MEDIATED_TOLERANCE", "1e-10"))
CONVERGENCE_THRESHOLD = float(os.getenv("MEDIATED_CONVERGENCE", "1e-14"))

SCAN_GRID = int(os.getenv("MEDIATED_SCAN_GRID", "2048"))

# Wall-clock cap for one synthesis target; unset with MEDIATED_TARGET_BUDGET=none.
_target_budget = os.getenv("MEDIATED_TARGET_BUDGET", "600")
TARGET_BUDGET = None if _target_budget.lower() == "none" else float(_target_budget)

# Polished angles of the caption-seeded replays.
FIXTURES_PATH = Path(os.getenv("MEDIATED_FIXTURES", "./storage/fixtures/replays.json"))
