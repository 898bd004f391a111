import numpy as np
import pytest

from nessbench.data import SbmParams, generate_sbm
from nessbench.splitter import partition_k, res_split
from nessbench.trainer import (
    AdamState,
    ConfigError,
    TrainConfig,
    TrainingDiverged,
    adamw_step,
    train,
)


@pytest.fixture(scope="module")
def sbm():
    graph = generate_sbm(SbmParams((40, 40, 40), 0.15, 0.01, feature_dim=8, feature_noise=1.0, seed=1)).graph
    return graph, res_split(graph, seed=0)


def quick(**kw):
    kw.setdefault("max_epochs", 25)
    return TrainConfig(**kw)


class TestAdamW:
    def test_first_step_is_sign_times_lr(self):
        p = [np.array([1.0, -2.0, 3.0])]
        g = [np.array([0.5, -4.0, 2.0])]
        adamw_step(p, g, AdamState(), lr=0.1, eps=0.0)
        # bias-corrected m / sqrt(v) equals sign(g) on the first step
        np.testing.assert_allclose(p[0], [0.9, -1.9, 2.9], rtol=0, atol=1e-12)

    def test_two_step_hand_oracle(self):
        lr, b1, b2, eps = 0.01, 0.9, 0.999, 1e-7
        p = [np.array([0.2])]
        state = AdamState()
        grads = [0.3, -0.1]
        m = v = 0.0
        expected = 0.2
        for t, gt in enumerate(grads, start=1):
            adamw_step(p, [np.array([gt])], state, lr, (b1, b2), eps)
            m = b1 * m + (1 - b1) * gt
            v = b2 * v + (1 - b2) * gt * gt
            expected -= lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
        assert p[0][0] == pytest.approx(expected, rel=1e-12)
        assert state.step == 2

    def test_decoupled_weight_decay(self):
        p = [np.array([2.0, -4.0])]
        adamw_step(p, [np.zeros(2)], AdamState(), lr=0.1, weight_decay=0.5)
        np.testing.assert_allclose(p[0], [2.0 * 0.95, -4.0 * 0.95], rtol=0, atol=1e-15)

    def test_rejects_nonfinite_gradient(self):
        from nessbench.objective import NumericalError

        with pytest.raises(NumericalError):
            adamw_step([np.zeros(2)], [np.array([1.0, np.nan])], AdamState())

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            adamw_step([np.zeros(2)], [np.zeros(3)], AdamState())


class TestConfig:
    def test_defaults(self):
        c = TrainConfig()
        assert (c.lr, c.eps, c.max_epochs, c.patience, c.drop_p, c.alpha) == (0.01, 1e-7, 500, 10, 0.2, 0)
        assert c.label == "NESS4"

    @pytest.mark.parametrize(
        "kw",
        [
            {"mode": "bogus"},
            {"encoder": "gat"},
            {"alpha": 2},
            {"k": 0},
            {"mode": "dres", "k": 1},
            {"mode": "sgae", "alpha": 1},
            {"mode": "ness", "k": 1, "alpha": 1},
            {"ds_fraction": 0.0},
            {"drop_p": 1.0},
            {"select_on": "ap"},
            {"tau": 0.0},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            TrainConfig(**kw)

    def test_from_dict_rejects_unknown(self):
        with pytest.raises(ConfigError, match="learning_rate"):
            TrainConfig.from_dict({"learning_rate": 0.1})

    def test_round_trip(self):
        c = TrainConfig(mode="ds", ds_fraction=0.75, seed=4)
        assert TrainConfig.from_dict(c.to_dict()) == c
        assert c.label == "DS75"

    def test_partition_k_mismatch(self, sbm):
        graph, split = sbm
        with pytest.raises(ConfigError):
            train(quick(k=4), graph, split, partition_k(split.train, 2, 0, graph.num_nodes))


class TestTraining:
    def test_ness_k1_equals_sgae(self, sbm):
        graph, split = sbm
        for drop_p in (0.0, 0.2):
            a = train(quick(mode="ness", k=1, drop_p=drop_p, seed=5), graph, split)
            b = train(quick(mode="sgae", drop_p=drop_p, seed=5), graph, split)
            assert [r.loss.total for r in a.history] == [r.loss.total for r in b.history]
            assert np.array_equal(a.embedding, b.embedding)

    def test_deterministic(self, sbm):
        graph, split = sbm
        a = train(quick(k=3, seed=2), graph, split)
        b = train(quick(k=3, seed=2), graph, split)
        assert a.loss_history == b.loss_history
        assert np.array_equal(a.embedding, b.embedding)
        c = train(quick(k=3, seed=3), graph, split)
        assert not np.array_equal(a.embedding, c.embedding)

    def test_early_stopping_invariant(self, sbm):
        graph, split = sbm
        res = train(TrainConfig(k=2, patience=3, max_epochs=200, lr=0.05, seed=1), graph, split)
        vals = res.validation_history
        assert vals[res.best_epoch] == min(vals)
        if res.stopped_early:
            assert res.epochs_run - 1 - res.best_epoch == 3
        else:
            assert res.epochs_run == 200

    @pytest.mark.parametrize(
        "kw",
        [
            {"mode": "ness", "k": 2},
            {"mode": "ness", "k": 3, "alpha": 1},
            {"mode": "sgae"},
            {"mode": "fgae"},
            {"mode": "ds", "ds_fraction": 0.75},
            {"mode": "dres", "k": 2},
            {"mode": "dres", "k": 2, "alpha": 1},
            {"mode": "ness", "k": 2, "encoder": "gcn"},
            {"mode": "ness", "k": 2, "encoder": "lin", "select_on": "auc"},
        ],
    )
    def test_every_mode_runs(self, sbm, kw):
        graph, split = sbm
        res = train(quick(max_epochs=8, **kw), graph, split)
        assert res.embedding.shape == (graph.num_nodes, 32)
        assert 0 <= res.best_epoch < res.epochs_run <= 8
        assert all(np.isfinite(r.loss.total) for r in res.history)
        if kw.get("alpha"):
            assert res.projection is not None
            assert all(r.loss.contrastive >= 0 for r in res.history)
        if kw["mode"] in ("ness", "dres"):
            assert len(res.subgraph_embeddings) == kw["k"]

    def test_ness_embedding_is_mean_of_views(self, sbm):
        graph, split = sbm
        res = train(quick(k=3, max_epochs=5), graph, split)
        np.testing.assert_allclose(res.embedding, np.mean(res.subgraph_embeddings, axis=0), atol=1e-14)

    def test_learns_something(self, sbm):
        from nessbench.evaluation import evaluate_embedding

        graph, split = sbm
        res = train(TrainConfig(k=2, seed=0), graph, split)
        assert evaluate_embedding(res.embedding, split.test_pos, split.test_neg).auc > 0.7

    def test_divergence_reported(self, sbm):
        graph, split = sbm
        with pytest.raises(TrainingDiverged):
            train(quick(mode="sgae", encoder="lin", lr=1e200, max_epochs=10), graph, split)

    def test_wall_clock_off_by_default(self, sbm):
        graph, split = sbm
        res = train(quick(max_epochs=3), graph, split)
        assert all(r.wall_ms == 0.0 for r in res.history)
