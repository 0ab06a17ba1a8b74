import sys
from pathlib import Path

# Make the sibling helper modules (synth, oracles, mockendpoint) importable.
sys.path.insert(0, str(Path(__file__).parent))
