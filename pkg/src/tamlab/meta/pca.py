"""Two-dimensional projections of task embeddings."""
import numpy as np


class Projection:
    """Principal-component projection of a set of embeddings.

    Attributes:
        coords (numpy.ndarray): (n, dims) coordinates.
        explained_variance_ratio (numpy.ndarray): (dims,) share of the total
            variance along each direction.
        components (numpy.ndarray): (dims, d) unit directions.
        mean (numpy.ndarray): (d,) centre of the embeddings.
    """
    def __init__(self, coords, explained_variance_ratio, components, mean):
        self.coords = coords
        self.explained_variance_ratio = explained_variance_ratio
        self.components = components
        self.mean = mean


def pca_project(embeddings, dims=2):
    """Project embeddings on their top ``dims`` principal directions.

    Each direction is flipped so its largest-magnitude coordinate is
    positive. Directions beyond the rank of the data are zero and explain
    no variance, so identical embeddings all project to the origin.

    Args:
        embeddings (array-like): n vectors of equal length, n >= 3.
        dims (int): Output dimensions.

    Returns:
        :class:`Projection`

    Raises:
        ValueError: On fewer than 3 embeddings or ragged input.
    """
    try:
        data = np.asarray([np.ravel(e) for e in embeddings], dtype=np.float64)
    except ValueError:
        raise ValueError('[PCA] embeddings differ in length') from None
    if data.ndim != 2 or data.shape[0] < 3:
        raise ValueError('[PCA] need at least 3 embeddings, got %s'
                         % data.shape[0])
    mean = data.mean(axis=0)
    centred = data - mean
    _, singular, vt = np.linalg.svd(centred, full_matrices=False)
    variance = singular ** 2
    total = variance.sum()
    tol = max(data.shape) * np.finfo(np.float64).eps * \
        (singular[0] if singular.size else 0.0)

    components = np.zeros((dims, data.shape[1]))
    ratio = np.zeros(dims)
    for i in range(min(dims, singular.size)):
        if singular[i] <= tol or total == 0.0:
            break
        direction = vt[i]
        if direction[np.argmax(np.abs(direction))] < 0:
            direction = -direction
        components[i] = direction
        ratio[i] = variance[i] / total
    return Projection(centred @ components.T, ratio, components, mean)
