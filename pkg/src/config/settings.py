"""Configuration settings for the fair pain-status pipeline"""
import os
from pathlib import Path

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent.parent

# Output configuration
RESULTS_DIR = Path(os.getenv("RESULTS_DIR", PROJECT_ROOT / "results"))
DATA_DIR = PROJECT_ROOT / "data"

# Logging configuration
LOGS_DIR = Path(os.getenv("LOGS_DIR", PROJECT_ROOT / "logs"))
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_TO_FILE = os.getenv("LOG_TO_FILE", "1") not in ("0", "false", "False")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Wearable day layout
MINUTES_PER_DAY = 1440
SAMPLE_RATE_HZ = 1.0 / 60.0  # minute resolution
HUMAN_RANGE_HZ = (0.6, 2.5)

# Inclusion rules
MAX_MISSING_FRACTION = 0.10
MIN_ASSESSMENTS_PER_YEAR = 2
VAS_MIN, VAS_MAX = 0, 10

# Protected attributes and privileged categories
PROTECTED_ATTRIBUTES = ("gender", "race", "ethnicity", "age", "dementia")
PRIVILEGED_GENDER = "male"
PRIVILEGED_RACE = "asian"
PRIVILEGED_ETHNICITY = "not_hispanic"
ELDERLY_AGE_CUTOFF = 65
PRIVILEGED_DEMENTIA = "absent"

# Fairness verdict ranges (inclusive)
DIFFERENCE_FAIR_RANGE = (-0.1, 0.1)
DISPARATE_IMPACT_FAIR_RANGE = (0.8, 1.25)
THEIL_FAIR_RANGE = (0.0, 0.1)

# Feature extraction
LOG_DEVIANCE_EPSILON = 1e-8
FEATURE_CATALOG_VERSION = "1.0"
COHORT_SCHEMA_VERSION = "1.0"
PARAMETER_FORMAT_VERSION = "1.0"

# Network training defaults
FAIRNESS_LAMBDA = 1.0
REGULARIZATION_COEF = 0.01
EPOCHS = 20
LEARNING_RATE = 0.01
BATCH_SIZE = 32
DROPOUT_RATE = 0.2
VALIDATION_FRACTION = 0.2
PROBABILITY_CLIP = 1e-7

# Baselines
LOGISTIC_MAX_ITER = 50000
LOGISTIC_TOLERANCE = 1e-8
LOGISTIC_LEARNING_RATE = 0.5
NB_BINARIZE_THRESHOLD = 0.5
TREE_MAX_DEPTH = 4

# Post-processing
ROC_THRESHOLD = 0.5
ROC_MARGIN = 0.1

# Experiment harness
SPLIT_RATIO = 0.8
DEFAULT_REPETITIONS = int(os.getenv("DEFAULT_REPETITIONS", 5))


class Settings:
    """Application settings"""

    def __init__(self):
        self.results_dir = str(RESULTS_DIR)
        self.logs_dir = str(LOGS_DIR)
        self.log_level = LOG_LEVEL
        self.log_to_file = LOG_TO_FILE
        self.log_format = LOG_FORMAT
        self.log_date_format = LOG_DATE_FORMAT
        self.minutes_per_day = MINUTES_PER_DAY
        self.sample_rate_hz = SAMPLE_RATE_HZ
        self.human_range_hz = HUMAN_RANGE_HZ
        self.max_missing_fraction = MAX_MISSING_FRACTION
        self.min_assessments_per_year = MIN_ASSESSMENTS_PER_YEAR
        self.protected_attributes = PROTECTED_ATTRIBUTES
        self.elderly_age_cutoff = ELDERLY_AGE_CUTOFF
        self.log_deviance_epsilon = LOG_DEVIANCE_EPSILON
        self.probability_clip = PROBABILITY_CLIP
        self.split_ratio = SPLIT_RATIO
        self.default_repetitions = DEFAULT_REPETITIONS

    def ensure_directories(self):
        """Ensure required directories exist"""
        LOGS_DIR.mkdir(parents=True, exist_ok=True)
        RESULTS_DIR.mkdir(parents=True, exist_ok=True)


# Global settings instance
settings = Settings()
