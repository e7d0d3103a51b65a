import pytest

from clicksim.predictor import PredictorConfig, build_dataset, train
from tests.helpers.planted import generate_realization


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines after the test summary."""
    try:
        from tests.test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def planted_model():
    """One trained model over the synthetic topic benchmark, shared by all files."""
    train_real = generate_realization("tr", seed=101)
    val_real = generate_realization("va", seed=102, n_sessions=2000)
    cfg = PredictorConfig(seed=0)
    ds_train = build_dataset(train_real.graph, train_real.embeddings, train_real.f_seg, cfg)
    ds_val = build_dataset(val_real.graph, val_real.embeddings, val_real.f_seg, cfg)
    model = train(ds_train, ds_val, cfg)
    return train_real, model
