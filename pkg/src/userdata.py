import os
import string
import typing

import configs
import src.utils as utils


_HAS_APPDIRS = False
try:
    import appdirs  # 3rd party module: https://pypi.org/project/appdirs/
    _HAS_APPDIRS = True
except ImportError:
    utils.warn("appdirs module couldn't be imported. userdata.USER_DATA_DIR mode will not be available.")


# Storage Modes
USER_DATA_DIR = "USER_DATA_DIR"
CURRENT_WORKING_DIR = "CURRENT_WORKING_DIR"
BEST = "BEST"

_MODE: typing.Optional[str] = None


def initialize(mode: str = BEST):
    """Sets where datasets are looked up when neither --data-dir nor the environment variable names a directory.

    Args:
        mode (str): Must be one of the following:
            userdata.CURRENT_WORKING_DIR: look in ./data
            userdata.USER_DATA_DIR: look in the per-user data directory for this OS.
            userdata.BEST (default): Choose the best option automatically.
    """
    global _MODE
    if mode == BEST:
        mode = USER_DATA_DIR if _HAS_APPDIRS else CURRENT_WORKING_DIR

    if mode == USER_DATA_DIR and not _HAS_APPDIRS:
        raise ValueError(f"Cannot use storage mode \"{mode}\" without appdirs module.")
    elif mode in (USER_DATA_DIR, CURRENT_WORKING_DIR):
        _MODE = mode
    else:
        raise ValueError(f"Unrecognized storage mode: \"{mode}\"")


def get_mode() -> str:
    if _MODE is None:
        initialize(configs.get_storage_mode())
    return _MODE


def get_data_dir(data_dir=None) -> str:
    """The directory holding dataset files: the explicit argument, else $FGA_DATA_DIR, else the storage mode's default."""
    if data_dir:
        return data_dir
    from_env = os.environ.get(configs.DATA_DIR_ENV_VAR)
    if from_env:
        return from_env
    if get_mode() == USER_DATA_DIR:
        return appdirs.user_data_dir(appname=_clean_for_fp(configs.NAME_OF_PROJECT),
                                     appauthor=_clean_for_fp(configs.AUTHOR))
    return os.path.join(os.getcwd(), "data")


def find_dataset(filename, data_dir=None) -> typing.Optional[str]:
    path = os.path.join(get_data_dir(data_dir), filename)
    if os.path.exists(path):
        return path
    utils.info(f"no dataset found at {path}")
    return None


def get_out_dir(out_dir=None, mkdirs_if_necessary=True) -> str:
    directory = out_dir or configs.DEFAULT_OUT_DIR
    if mkdirs_if_necessary and not os.path.exists(directory):
        utils.info(f"creating {directory}")
        os.makedirs(directory, exist_ok=True)
    return directory


_VALID_CHARS_FOR_FP = set(s for s in string.ascii_letters + "0123456789_()")


def _clean_for_fp(text, replacewith=""):
    if text is None:
        return None
    else:
        return "".join((t if t in _VALID_CHARS_FOR_FP else replacewith) for t in text)
