import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    # Logging
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('LOG_FILE', 'logs/coalgebra_engine.log')

    # Reports
    REPORT_OUTPUT_DIR = os.getenv('REPORT_OUTPUT_DIR', './reports')
    TOOL_VERSION = os.getenv('TOOL_VERSION', '1.0.0')

    # Regression corpus
    CORPUS_DB = os.getenv('CORPUS_DB', 'data/regression_corpus.db')

    # Scenarios
    SCENARIO_DIR = os.getenv('SCENARIO_DIR', './scenarios')

    # Run defaults
    DEFAULT_SEED = int(os.getenv('DEFAULT_SEED', '1'))
    DEFAULT_COUNT = int(os.getenv('DEFAULT_COUNT', '100'))
    DEFAULT_CAP = int(os.getenv('DEFAULT_CAP', '4'))
    DEFAULT_DEPTH = int(os.getenv('DEFAULT_DEPTH', '6'))

    # Fuzzing
    MAX_SHRINK_STEPS = 50
    MAX_GROUP_ORDER = 12
    MAX_INSTANCE_DIM = 6

    # Conventions recorded in every report header
    CONVENTIONS = {
        'indexing': 'cohomological',
        'currying': 'Hom(V, Hom(U, W)) = Hom(U (x) V, W)',
        'integral_orientation': 'x g^{-1}',
        'group_action': 'rho(h) read as operator(h^{-1})',
    }
