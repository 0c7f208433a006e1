import numpy as np
import pytest

from acgl.synthetic import generate_synthetic, intra_class_fraction


def test_pure_homophily_yields_only_intra_class_edges():
    g = generate_synthetic(2, 4, 3, 1.0, seed=7)
    assert g.num_edges > 0
    assert intra_class_fraction(g) == 1.0


def test_zero_homophily_yields_only_inter_class_edges():
    g = generate_synthetic(3, 10, 4, 0.0, seed=3)
    assert g.num_edges > 0
    assert intra_class_fraction(g) == 0.0


def test_deterministic_for_fixed_seed():
    a = generate_synthetic(2, 4, 3, 1.0, seed=7)
    b = generate_synthetic(2, 4, 3, 1.0, seed=7)
    np.testing.assert_array_equal(a.edges, b.edges)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
    np.testing.assert_array_equal(a.train_mask, b.train_mask)


def test_different_seeds_differ():
    a = generate_synthetic(3, 20, 4, 0.7, seed=1)
    b = generate_synthetic(3, 20, 4, 0.7, seed=2)
    assert not np.array_equal(a.features, b.features)


def test_intra_fraction_tracks_homophily():
    # Monte-Carlo over 10 seeds; the edge-level sampling targets 0.5 exactly.
    fractions = [
        intra_class_fraction(generate_synthetic(4, 25, 4, 0.5, seed=s))
        for s in range(10)
    ]
    assert abs(np.mean(fractions) - 0.5) < 0.1


def test_masks_cover_every_class():
    g = generate_synthetic(5, 10, 3, 0.8, seed=11)
    for c in range(5):
        members = g.labels == c
        assert (g.train_mask & members).sum() >= 1
        assert (g.test_mask & members).sum() >= 1


def test_minimum_sizes_still_split():
    g = generate_synthetic(2, 2, 1, 0.5, seed=0)
    assert g.train_mask.sum() == 2  # one per class
    assert g.test_mask.sum() == 2


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        generate_synthetic(1, 4, 3, 0.5, seed=0)
    with pytest.raises(ValueError):
        generate_synthetic(2, 1, 3, 0.5, seed=0)
    with pytest.raises(ValueError):
        generate_synthetic(2, 4, 3, 1.5, seed=0)
    with pytest.raises(ValueError):
        generate_synthetic(2, 4, 0, 0.5, seed=0)


def test_no_self_loops_and_canonical_edges():
    g = generate_synthetic(3, 30, 4, 0.9, seed=5)
    assert (g.edges[:, 0] < g.edges[:, 1]).all()
    assert len(np.unique(g.edges, axis=0)) == g.num_edges
