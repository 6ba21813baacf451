import logging

from dotenv import load_dotenv

from qsw_app.config.settings import get_env_settings

__version__ = "0.1.0"

load_dotenv()

# Package settings (read from environment)
settings = get_env_settings()

LOG_FORMAT = '[%(levelname)s] %(message)s'


def configure_logging(level=None):
	"""Configure root logging once, with the level from settings unless given."""
	level = (level or settings['log_level']).upper()
	logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)
