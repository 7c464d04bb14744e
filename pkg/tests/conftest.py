import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))
sys.path.insert(0, str(Path(__file__).resolve().parent))

settings.register_profile("ci", deadline=None, print_blob=True)
settings.load_profile("ci")
