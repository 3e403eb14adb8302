import hashlib
from pathlib import Path

from IncomeVerification import log
from IncomeVerification.dataStructure import dumps


__all__ = ['MANIFEST_FORMAT', 'sha256_file', 'build_manifest', 'write_manifest']


logger = log.get_logger('pipeline')

MANIFEST_FORMAT = 'run-manifest'
MANIFEST_VERSION = 1

_CHUNK = 1 << 20


def sha256_file(path):
    """SHA-256 hex digest of a file or of a directory tree.

    Directories are hashed over the relative path and content of every file
    in sorted order.
    """
    path = Path(path)
    hasher = hashlib.sha256()

    if path.is_dir():
        for file in sorted(p for p in path.rglob('*') if p.is_file()):
            hasher.update(file.relative_to(path).as_posix().encode('utf-8'))
            hasher.update(b'\0')
            hasher.update(sha256_file(file).encode('ascii'))
        return hasher.hexdigest()

    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(_CHUNK), b''):
            hasher.update(chunk)
    return hasher.hexdigest()


def build_manifest(config, command, extra=None):
    """Everything needed to reproduce a run.

    Parameters
    ----------
    config : RunConfig
    command : str
        CLI subcommand.
    extra : dict, optional
        Additional inputs, e.g. files that are not part of the configuration.

    Returns
    -------
    dict
        No timestamps, so equal runs give equal manifests.
    """
    from IncomeVerification import __version__

    inputs = {}
    for field, value in config.input_paths().items():
        if Path(value).exists():
            inputs[field] = {'path': str(value), 'sha256': sha256_file(value)}
        else:
            inputs[field] = {'path': str(value), 'sha256': None}

    return {
        'format': MANIFEST_FORMAT,
        'version': MANIFEST_VERSION,
        'package_version': __version__,
        'command': command,
        'seed': config.seed,
        'config': config.to_dict(),
        'inputs': inputs,
        'extra': extra or {},
    }


def write_manifest(out_dir, config, command, extra=None):
    """Write ``<out_dir>/manifest.json`` and return its path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / 'manifest.json'
    manifest = build_manifest(config, command, extra)
    path.write_text(dumps(manifest, indent=2) + '\n', encoding='utf-8')
    logger.debug(f'Wrote run manifest to {path}.')
    return path
