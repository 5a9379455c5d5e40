import logging
import os

from dotenv import load_dotenv

from eiolib.errors import InputValidationError

logger = logging.getLogger("eio")


def load_eio_env() -> bool:
    """Load the dotenv file named by EIO_ENV_FILE, if any, using python-dotenv"""
    env_file_path = os.getenv("EIO_ENV_FILE")
    if not env_file_path:
        return False
    if not os.path.isfile(env_file_path):
        raise InputValidationError(f"EIO_ENV_FILE points to {env_file_path}, which is not a file")
    if os.getenv("EIO_ENV_OVERRIDE", "false").lower() == "true":
        logger.info("Loading env from %s, which may override existing environment variables", env_file_path)
        return load_dotenv(env_file_path, override=True)
    logger.info("Loading env from %s, but not overriding existing environment variables", env_file_path)
    return load_dotenv(env_file_path, override=False)
