"""
Application configuration and environment variable management.
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ('1', 'true', 'yes')


class Config:
    """Base configuration class with environment variable management."""

    # Logging
    LOG_LEVEL: str = os.getenv('T2DMED_LOG_LEVEL', 'INFO')

    # Output
    OUTPUT_DIR: str = os.getenv('T2DMED_OUTPUT_DIR', 'results')

    # Reproducibility: report timestamps come from SOURCE_DATE_EPOCH instead of the clock
    REPRODUCIBLE_TIMESTAMPS: bool = _env_bool('T2DMED_REPRODUCIBLE_TIMESTAMPS', 'true')
    SOURCE_DATE_EPOCH: int = int(os.getenv('SOURCE_DATE_EPOCH', '0'))

    # Application Configuration
    DEBUG: bool = _env_bool('DEBUG', 'false')
    ENVIRONMENT: str = os.getenv('T2DMED_ENVIRONMENT', 'development')


class DevelopmentConfig(Config):
    """Development environment configuration."""
    LOG_LEVEL = os.getenv('T2DMED_LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Production environment configuration."""
    DEBUG = False


class TestingConfig(Config):
    """Testing environment configuration."""
    DEBUG = True
    LOG_LEVEL = 'WARNING'
    REPRODUCIBLE_TIMESTAMPS = True
    SOURCE_DATE_EPOCH = 0


# Configuration mapping
config_map = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig
}


def get_config() -> Config:
    """Get configuration based on environment."""
    env = os.getenv('T2DMED_ENVIRONMENT', 'development')
    return config_map.get(env, DevelopmentConfig)()
