import numpy as np
import pytest

from aquaduct.attacks import AttackKind
from aquaduct.dataset import Dataset
from aquaduct.flows import (
    LABEL_ATTACK,
    LABEL_NORMAL,
    FeatureVector,
    FlowRecord,
    FlowState,
    LabeledFlow,
)
from aquaduct.ids import OnlineDetector, train
from aquaduct.ids.metrics import confusion_from_predictions
from aquaduct.network import Endpoint

from test_models import synthetic_dataset


def labeled(features, label, kind=None, ts=1.0):
    record = FlowRecord(
        src=Endpoint("10.0.0.60", features[5]),
        dst=Endpoint("10.0.0.10", 502),
        proto="tcp",
        first_ts=ts - 0.5,
        last_ts=ts,
        src_pkts=features[2],
        dst_pkts=features[3],
        src_bytes=features[4],
        dst_bytes=features[1] - features[4],
        state=FlowState.CLOSED_FIN,
    )
    return LabeledFlow(FeatureVector(*features), label, kind, record)


@pytest.fixture(scope="module")
def model():
    return train("decision_tree", synthetic_dataset())


def test_alert_emitted_only_for_attack_predictions(model):
    detector = OnlineDetector(model)
    benign = labeled((25, 150, 12, 13, 70, 51000), LABEL_NORMAL)
    hostile = labeled((230, 1380, 115, 115, 690, 50123), LABEL_ATTACK, AttackKind.PORT_SCAN, ts=9.0)
    assert detector.observe(benign) is None
    alert = detector.observe(hostile)
    assert alert is not None
    assert alert.model == "decision_tree"
    assert alert.ts == 9.0
    assert alert.sport == 50123
    assert alert.src == "10.0.0.60:50123"
    assert detector.alerts == [alert]


def test_running_confusion_tracks_truth_vs_prediction(model):
    detector = OnlineDetector(model)
    detector.observe(labeled((25, 150, 12, 13, 70, 51000), LABEL_NORMAL))  # TN
    detector.observe(labeled((230, 1380, 115, 115, 690, 50000), LABEL_ATTACK))  # TP
    detector.observe(labeled((230, 1380, 115, 115, 690, 50000), LABEL_NORMAL))  # FP
    detector.observe(labeled((25, 150, 12, 13, 70, 51000), LABEL_ATTACK))  # FN
    cm = detector.confusion
    assert (cm.tp, cm.tn, cm.fp, cm.fn) == (1, 1, 1, 1)
    metrics = detector.metrics()
    assert metrics.accuracy == 50.0
    assert metrics.far == 50.0
    assert metrics.und == 50.0


def test_batch_equals_one_by_one(model):
    rng = np.random.default_rng(3)
    flows = []
    for _ in range(120):
        if rng.random() < 0.5:
            features = tuple(int(v) for v in rng.integers(10, 40, 6))
            flows.append(labeled(features, LABEL_NORMAL))
        else:
            features = tuple(int(v) for v in rng.integers(200, 260, 6))
            flows.append(labeled(features, LABEL_ATTACK, AttackKind.PORT_SCAN))
    single = OnlineDetector(model)
    for flow in flows:
        single.observe(flow)
    batch = OnlineDetector(model)
    batch.observe_batch(flows)
    assert batch.confusion == single.confusion
    assert batch.alerts == single.alerts


def test_batch_confusion_matches_offline_tally(model):
    dataset = synthetic_dataset(seed=99)
    detector = OnlineDetector(model)
    detector.observe_batch(dataset.rows)
    from aquaduct.ids.models import dataset_arrays

    X, y = dataset_arrays(Dataset(dataset.rows))
    assert detector.confusion == confusion_from_predictions(y, model.predict_many(X))


def test_empty_batch_is_a_no_op(model):
    detector = OnlineDetector(model)
    assert detector.observe_batch([]) == []
    assert detector.confusion.total == 0
