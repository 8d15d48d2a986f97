import numpy as np
import pytest
import scipy.sparse as sp
from conftest import as_sets
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from dynleiden import BatchUpdate, DynamicLeiden
from dynleiden.batch import BatchSpec, generate_batch
from dynleiden.datasets import planted_partition
from dynleiden.graph import GraphError
from dynleiden.quality import modularity

TRI = [0, 0, 0, 1, 1, 1]


class TestDynamicLeiden:
    def test_fit_barbell(self, barbell):
        est = DynamicLeiden().fit(barbell)
        assert as_sets(est.labels_) == as_sets(TRI)
        assert est.modularity_ == pytest.approx(5 / 14)
        assert est.n_communities_ == 2
        assert est.score() == est.modularity_

    def test_fit_predict_on_dense_and_sparse(self, barbell):
        dense = barbell.to_scipy().toarray()
        a = DynamicLeiden().fit_predict(dense)
        b = DynamicLeiden().fit_predict(sp.csr_matrix(dense))
        assert as_sets(a) == as_sets(b) == as_sets(TRI)

    def test_params_and_clone(self):
        est = DynamicLeiden(strategy="ds", tolerance=1e-3, threads=2)
        assert est.get_params()["strategy"] == "ds"
        c = clone(est)
        assert c.get_params() == est.get_params()
        assert not hasattr(c, "labels_")
        est.set_params(strategy="nd")
        assert est.strategy == "nd"

    @pytest.mark.parametrize("strategy", ["nd", "ds", "df"])
    def test_update(self, strategy):
        g, _ = planted_partition(600, 6, seed=3)
        est = DynamicLeiden(strategy=strategy).fit(g)
        b = generate_batch(g, BatchSpec(0.01, seed=1))
        est.update(b)
        assert est.report_.algorithm == strategy
        assert est.modularity_ == pytest.approx(modularity(est.graph_, est.labels_))
        est.context_.check_consistency(est.graph_)

    def test_update_counts_skips(self, barbell):
        est = DynamicLeiden().fit(barbell)
        est.update(BatchUpdate.from_edges(deletions=[(0, 5)]))
        assert est.report_.skipped_updates == 2

    def test_init_membership(self, barbell):
        est = DynamicLeiden().fit(barbell, init=["a", "a", "a", "b", "b", "b"])
        assert as_sets(est.labels_) == as_sets(TRI)

    def test_errors(self, barbell):
        with pytest.raises(NotFittedError):
            DynamicLeiden().update(BatchUpdate.empty())
        with pytest.raises(ValueError):
            DynamicLeiden(strategy="louvain").fit(barbell)
        with pytest.raises(GraphError):
            DynamicLeiden().fit(np.ones((2, 3)))
        with pytest.raises(GraphError):
            DynamicLeiden().fit(-np.ones((3, 3)))
        with pytest.raises(ValueError):
            DynamicLeiden().fit(barbell, init=[0, 1])
