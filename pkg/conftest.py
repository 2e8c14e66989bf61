import sys
from pathlib import Path

# allow running pytest from the repo root without installing
src = Path(__file__).parent / "src"
if str(src) not in sys.path:
    sys.path.insert(0, str(src))
