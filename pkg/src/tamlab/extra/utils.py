"""
Functions support other modules.
"""
import hashlib
import json
import uuid

import numpy as np


def gen_id(type_, name):
    """Generate a random name if name isn't given.

    Returns:
        string
    """
    if name is None:
        rand_id = uuid.uuid4()
        rand_id = str(rand_id)[:8]
        name = type_ + '_' + rand_id

    return name


def isnotebook():
    """Return True if tamlab is running on Jupyter Notebook."""
    try:
        shell = get_ipython().__class__.__name__
        if shell == 'ZMQInteractiveShell':
            return True   # Jupyter notebook or qtconsole

        return False
    except NameError:
        return False


def progress(iterable=None, total=None, desc=None, disable=False):
    """Wrap an iterable in a tqdm bar, the notebook flavour inside Jupyter."""
    if isnotebook():
        from tqdm.notebook import tqdm
    else:
        from tqdm import tqdm
    return tqdm(
        iterable, total=total, desc=desc, leave=False, disable=disable,
        bar_format='{l_bar}{bar}| {n_fmt}/{total_fmt}')


def child_rng(seed, *stream):
    """Return a numpy Generator for the child stream ``stream`` of ``seed``.

    Children of the same seed are independent of each other and depend only
    on ``(seed, stream)``, never on the order in which they are requested.

    Args:
        seed (int): Root seed.
        stream (int): Path of non-negative integers naming the child.

    Returns:
        :class:`numpy.random.Generator`
    """
    entropy = [int(seed)] + [int(part) for part in stream]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def child_seed(seed, *stream):
    """Return an integer seed for the child stream ``stream`` of ``seed``."""
    return int(child_rng(seed, *stream).integers(0, 2 ** 31 - 1))


def canonical_json(obj):
    """Dump ``obj`` with sorted keys and no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':'))


def sha256_bytes(data):
    """Hex SHA-256 digest of ``data`` (bytes or str)."""
    if isinstance(data, str):
        data = data.encode('utf-8')
    return hashlib.sha256(data).hexdigest()


def sha256_file(path):
    """Hex SHA-256 digest of the file at ``path``."""
    digest = hashlib.sha256()
    with open(path, 'rb') as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()
