import os

class ProductionConfig():
    """Default configuration for the qcskit command line."""
    TESTING = False
    TOL = float(os.getenv("QCSKIT_TOL", "1e-9"))
    SEED = int(os.getenv("QCSKIT_SEED", "0"))
    SAMPLES = int(os.getenv("QCSKIT_SAMPLES", "500"))
    BUDGET = int(os.getenv("QCSKIT_BUDGET", "40"))  # Cutting-plane rounds for tensor membership
    LAMBDA = 1.0
    FORMAT = "json"
    SCHEMA = "qcskit/1"
    MAX_TERM_BYTES = 65536

class TestConfig(ProductionConfig):
    """Testing configuration: small sample counts and budgets keep the suite fast."""
    TESTING = True
    TOL = 1e-9
    SEED = 0
    SAMPLES = 20
    BUDGET = 25
