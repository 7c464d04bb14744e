"""
Configuration for the subword toolkit
Set these environment variables or edit subword_config.yaml

Lookup order for every setting: environment variable, then the YAML settings
file (subword_config.yaml next to this file, or the path in SUBWORD_CONFIG),
then the built-in default.
"""

import os
import logging
from pathlib import Path

import yaml

HERE = Path(__file__).parent

# Load settings from yaml file if exists
SETTINGS_FILE = Path(os.getenv("SUBWORD_CONFIG", HERE / "subword_config.yaml"))
settings = {}
if SETTINGS_FILE.exists():
    with open(SETTINGS_FILE, encoding="utf-8") as f:
        settings = yaml.safe_load(f) or {}

# Setup logging (respect LOG_LEVEL env for CLI scripts)
_log_level = str(os.getenv("LOG_LEVEL") or settings.get("log_level", "INFO")).upper()
_level = getattr(logging, _log_level, logging.INFO)
logging.basicConfig(
    level=_level,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)
if settings:
    logger.debug(f"Settings loaded from {SETTINGS_FILE}")


def get_setting(key, default=''):
    """Get setting from env var or settings file"""
    # Uppercase env vars (e.g. SUBWORD_WORKERS) win over yaml keys (e.g. workers).
    return os.getenv(f"SUBWORD_{key.upper()}") or settings.get(key, default)


# Segmentation markers
EOW = str(get_setting('eow', '</w>'))
CONTINUATION = str(get_setting('continuation', '@@'))

# Learning
MIN_FREQUENCY = int(get_setting('min_frequency', 2))
LOG_EVERY = int(get_setting('log_every', 1000))

# Application
WORKERS = max(1, int(get_setting('workers', 1)))
VOCAB_THRESHOLD = int(get_setting('vocab_threshold', 0))

# Transliteration table (cyrillic<TAB>latin, NFC); relative paths are taken from this directory
ISO9_TABLE = HERE / get_setting('iso9_table', "iso9.tsv")

# Evaluation
CHRF_BETA = float(get_setting('chrf_beta', 3.0))
CHRF_MAX_N = int(get_setting('chrf_max_n', 6))
RARE_RANK = int(get_setting('rare_rank', 50000))

# Merge file header version
MERGE_FILE_VERSION = "v1"
