"""Prototype-guided projection set and the kNN exploration reward."""

from __future__ import annotations

import numpy as np
import pytest

from protolab.exceptions import EmptyBatchError, InsufficientNeighborsError, ShapeMismatchError
from protolab.intrinsic import (
    ProjectionSet,
    augment_reward,
    knn_reward,
    knn_rewards,
    select_candidates,
    update_Q,
)
from protolab.protolearn import PrototypeBank


def _filled(values: np.ndarray, tokens: np.ndarray | None = None) -> ProjectionSet:
    q_set = ProjectionSet(64)
    q_set.extend(values, tokens)
    return q_set


class TestUpdateQ:
    def test_single_candidate_picked_by_every_prototype(self, rng: np.random.Generator) -> None:
        bank = PrototypeBank.random(5, 3, rng, dtype=np.float64)
        q_set = update_Q(ProjectionSet(16), np.array([[0.3, -0.2, 0.9]]), bank)
        assert len(q_set) == 5
        np.testing.assert_array_equal(q_set.members, np.tile([0.3, -0.2, 0.9], (5, 1)))

    def test_prototypes_select_themselves(self) -> None:
        protos = np.array([[1.0, 0.0, 0.0], [0.6, 0.8, 0.0], [0.0, 0.6, 0.8], [0.0, 0.0, 1.0]])
        np.testing.assert_array_equal(select_candidates(protos, protos), [0, 1, 2, 3])
        q_set = update_Q(ProjectionSet(8), protos, protos)
        np.testing.assert_array_equal(q_set.members, protos)

    def test_fifo_eviction(self) -> None:
        q_set = ProjectionSet(4)
        q_set.extend(np.arange(6, dtype=np.float64)[:, None], np.arange(6))
        np.testing.assert_array_equal(q_set.members[:, 0], [2.0, 3.0, 4.0, 5.0])
        np.testing.assert_array_equal(q_set.tokens, [2, 3, 4, 5])

    def test_tokens_follow_picks(self) -> None:
        protos = np.eye(2)
        candidates = np.array([[0.1, 1.0], [1.0, 0.1]])
        q_set = update_Q(ProjectionSet(4), candidates, protos, tokens=np.array([10, 11]))
        np.testing.assert_array_equal(q_set.tokens, [11, 10])

    def test_permutation_invariant(self, rng: np.random.Generator) -> None:
        bank = PrototypeBank.random(6, 4, rng, dtype=np.float64)
        candidates = rng.standard_normal((10, 4))
        order = rng.permutation(10)
        a = update_Q(ProjectionSet(16), candidates, bank).members
        b = update_Q(ProjectionSet(16), candidates[order], bank).members
        np.testing.assert_array_equal(np.sort(a, axis=0), np.sort(b, axis=0))

    def test_empty_batch(self) -> None:
        with pytest.raises(EmptyBatchError):
            update_Q(ProjectionSet(4), np.zeros((0, 2)), np.eye(2))

    def test_dimension_checked(self) -> None:
        q_set = ProjectionSet(4, dim=2)
        with pytest.raises(ShapeMismatchError):
            q_set.extend(np.ones((1, 3)))


class TestKnnReward:
    def test_scalar_latents(self) -> None:
        q_set = _filled(np.array([[1.0], [2.0], [4.0]]))
        assert knn_reward(np.array([0.0]), q_set, k=3) == 4.0

    def test_single_neighbour(self) -> None:
        q_set = _filled(np.array([[3.0, 4.0]]))
        assert knn_reward(np.zeros(2), q_set, k=1) == pytest.approx(5.0)

    def test_self_match_excluded(self) -> None:
        z, y = np.array([1.0, 1.0]), np.array([4.0, 5.0])
        q_set = _filled(np.stack([z, y]), np.array([7, 8]))
        assert knn_reward(z, q_set, k=1, token=7) == pytest.approx(5.0)
        # without identity the duplicate counts at distance zero
        assert knn_reward(z, q_set, k=1) == 0.0

    def test_too_few_neighbours(self) -> None:
        q_set = _filled(np.array([[1.0], [2.0]]), np.array([0, 1]))
        with pytest.raises(InsufficientNeighborsError):
            knn_reward(np.array([0.0]), q_set, k=3)
        with pytest.raises(InsufficientNeighborsError):
            knn_reward(np.array([0.0]), q_set, k=2, token=0)
        rewards = knn_rewards(
            np.array([[0.0], [5.0]]), q_set, k=2, tokens=np.array([0, 9]), missing=0.0,
        )
        np.testing.assert_allclose(rewards, [0.0, 4.0])

    def test_empty_set_with_missing(self) -> None:
        rewards = knn_rewards(np.zeros((3, 2)), ProjectionSet(4, dim=2), k=1, missing=0.0)
        np.testing.assert_array_equal(rewards, np.zeros(3))

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_brute_force(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        members = rng.standard_normal((12, 5))
        latents = rng.standard_normal((7, 5))
        k = int(rng.integers(1, 6))
        expected = [np.sort(np.linalg.norm(members - z, axis=1))[k - 1] for z in latents]
        np.testing.assert_allclose(knn_rewards(latents, _filled(members), k), expected, atol=1e-12)

    def test_translation_invariant(self, rng: np.random.Generator) -> None:
        members = rng.standard_normal((9, 4))
        latents = rng.standard_normal((5, 4))
        shift = rng.standard_normal(4) * 3.0
        base = knn_rewards(latents, _filled(members), 3)
        moved = knn_rewards(latents + shift, _filled(members + shift), 3)
        np.testing.assert_allclose(moved, base, atol=1e-9)


class TestAugmentReward:
    def test_mix(self) -> None:
        assert augment_reward(1.0, 0.5, 0.2) == pytest.approx(1.1)

    def test_identities(self) -> None:
        assert augment_reward(0.7, 3.0, 0.0) == 0.7
        assert augment_reward(0.7, 0.0, 0.2) == 0.7

    def test_vectorized(self) -> None:
        out = augment_reward(np.array([1.0, 0.0]), np.array([0.5, 2.0]), 0.5)
        np.testing.assert_allclose(out, [1.25, 1.0])
