import sys
from pathlib import Path

# Make the oracle helpers importable as `oracles.*` from any test.
sys.path.insert(0, str(Path(__file__).parent))
