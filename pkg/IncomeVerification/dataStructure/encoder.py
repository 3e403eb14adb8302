import json

import numpy as np


__all__ = ['NumpyArrayEncoder', 'dumps']


class NumpyArrayEncoder(json.JSONEncoder):
    """JSON encoder for numpy scalars and arrays and objects with ``to_dict``."""

    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.bool_):
            return bool(obj)
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif hasattr(obj, 'to_dict'):
            return obj.to_dict()
        else:
            return super().default(obj)


def dumps(obj, indent=None):
    """Serialize ``obj`` deterministically (sorted keys)."""
    return json.dumps(obj, cls=NumpyArrayEncoder, sort_keys=True, indent=indent)
