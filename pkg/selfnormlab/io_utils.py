# Authors: selfnormlab contributors
#
# License: 3-clause BSD
import json
import os
import sys
import tempfile
from collections.abc import Mapping
from logging import getLogger, StreamHandler, INFO

try:  # python 3.5+
    from typing import Any, Dict, Union
    from logging import Logger
except ImportError:
    pass

import numpy as np
import pandas as pd


# default logger that may be used by all modules
default_logger = getLogger('selfnormlab')
ch = StreamHandler(sys.stdout)
default_logger.addHandler(ch)
default_logger.setLevel(INFO)


def _atomic_write_text(contents,  # type: str
                       path       # type: str
                       ):
    """
    Writes `contents` to a temporary file in the destination folder, then moves it to `path`. Readers never see a
    partially written file.

    :param contents:
    :param path:
    :return:
    """
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=folder, prefix='.tmp_', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode='wt', newline='') as f:
            f.write(contents)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def _to_jsonable(obj):
    """Converts numpy scalars and arrays (possibly nested in dicts/lists) into plain python objects"""
    if isinstance(obj, Mapping):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    elif isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, (float, np.floating)):
        obj = float(obj)
        # json has no representation for nan/inf
        return obj if np.isfinite(obj) else None
    else:
        return obj


def dumps_json(obj  # type: Any
               ):
    # type: (...) -> str
    """
    Deterministic json representation: sorted keys, fixed indentation, trailing newline. Non-finite floats are
    written as `null`.

    >>> dumps_json({'b': np.float64(1.5), 'a': [np.int64(2), float('nan')]})
    '{\\n  "a": [\\n    2,\\n    null\\n  ],\\n  "b": 1.5\\n}\\n'
    """
    return json.dumps(_to_jsonable(obj), sort_keys=True, indent=2) + '\n'


def write_json(obj,   # type: Any
               path,  # type: str
               logger=default_logger  # type: Logger
               ):
    """
    Writes `obj` as json to `path`, atomically.

    :param obj:
    :param path:
    :param logger:
    :return:
    """
    _atomic_write_text(dumps_json(obj), path)
    logger.debug("wrote %s" % path)


def read_json(path  # type: str
              ):
    # type: (...) -> Dict[str, Any]
    with open(path, mode='rt') as f:
        return json.load(f)


def write_csv(df,    # type: pd.DataFrame
              path,  # type: str
              logger=default_logger  # type: Logger
              ):
    """
    Writes a dataframe as csv with a header row, no index, '.' decimal separator and '\\n' line endings.
    The file is written atomically.

    :param df:
    :param path:
    :param logger:
    :return:
    """
    contents = df.to_csv(index=False, sep=',', decimal='.', lineterminator='\n', float_format='%.17g')
    _atomic_write_text(contents, path)
    logger.debug("wrote %s" % path)


def read_csv(path  # type: str
             ):
    # type: (...) -> pd.DataFrame
    return pd.read_csv(path, sep=',', decimal='.')


def render_table(rows,  # type: Union[pd.DataFrame, list]
                 ):
    # type: (...) -> str
    """
    Renders a list of records (or a dataframe) as a fixed-width text table.
    """
    df = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame.from_records(rows)
    return df.to_string(index=False)
