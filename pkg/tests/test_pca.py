"""Test principal-component projections of task embeddings."""
import numpy as np
import pytest

from tamlab.meta import pca_project


def test_planar_points():
    """Points in a plane are fully explained by two directions."""
    rng = np.random.default_rng(0)
    basis = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.6, 0.8, 0.0]])
    points = rng.normal(size=(20, 2)) * [3.0, 1.0] @ basis + 5.0
    projection = pca_project(points)
    assert projection.coords.shape == (20, 2)
    assert projection.explained_variance_ratio.sum() == pytest.approx(1.0)
    assert projection.explained_variance_ratio[0] > \
        projection.explained_variance_ratio[1]
    np.testing.assert_allclose(projection.mean, points.mean(axis=0))


def test_distances_are_kept():
    """Projecting planar points keeps their pairwise distances."""
    points = np.array([[0.0, 0.0, 1.0], [2.0, 0.0, 1.0], [0.0, 1.0, 1.0],
                       [3.0, 4.0, 1.0]])
    coords = pca_project(points).coords
    for i in range(4):
        for j in range(4):
            assert np.linalg.norm(coords[i] - coords[j]) == pytest.approx(
                np.linalg.norm(points[i] - points[j]))


def test_sign_convention():
    """The largest coordinate of every direction is positive."""
    rng = np.random.default_rng(1)
    points = rng.normal(size=(10, 5))
    for data in (points, -points):
        components = pca_project(data).components
        for direction in components:
            assert direction[np.argmax(np.abs(direction))] > 0


def test_identical_embeddings():
    """Identical embeddings all land on the origin."""
    projection = pca_project([np.ones(4)] * 5)
    np.testing.assert_array_equal(projection.coords, np.zeros((5, 2)))
    np.testing.assert_array_equal(projection.explained_variance_ratio,
                                  np.zeros(2))


def test_rank_one():
    """Collinear embeddings have no second direction."""
    points = np.outer([1.0, 2.0, 3.0, 4.0], [1.0, -1.0, 2.0])
    projection = pca_project(points)
    np.testing.assert_array_equal(projection.coords[:, 1], np.zeros(4))
    assert projection.explained_variance_ratio[0] == pytest.approx(1.0)
    assert projection.explained_variance_ratio[1] == 0.0


def test_matrix_embeddings_are_flattened():
    """Adapter-shaped embeddings are compared as flat vectors."""
    rng = np.random.default_rng(2)
    projection = pca_project(rng.normal(size=(6, 3, 4)))
    assert projection.components.shape == (2, 12)


@pytest.mark.parametrize('embeddings', [
    [[1.0, 2.0], [3.0, 4.0]],
    [[1.0, 2.0], [3.0], [4.0, 5.0]],
])
def test_invalid_input(embeddings):
    """Fewer than three or ragged embeddings raise ValueError."""
    with pytest.raises(ValueError):
        pca_project(embeddings)
