import pytest

from kladapt.config import RunConfig, format_config, parse_config
from kladapt.errors import InvalidParameterError


def test_defaults():
    cfg = RunConfig()
    assert cfg.d_rff == 2000 and cfg.sigma == 1.0
    assert cfg.convention == "bandwidth" and cfg.mean_mode == "literal"
    assert cfg.ridge is None and cfg.threshold == 0.0
    assert not cfg.augment and not cfg.fused_inference


def test_validation():
    with pytest.raises(InvalidParameterError):
        RunConfig(d_rff=0)
    with pytest.raises(InvalidParameterError):
        RunConfig(sigma=-1.0)
    with pytest.raises(InvalidParameterError):
        RunConfig(convention="laplace")
    with pytest.raises(InvalidParameterError):
        RunConfig(mean_mode="mode")
    with pytest.raises(InvalidParameterError):
        RunConfig(temperature=0.0)
    with pytest.raises(InvalidParameterError):
        RunConfig(threshold=1.5)
    with pytest.raises(InvalidParameterError):
        RunConfig(ridge=-1e-9)
    with pytest.raises(InvalidParameterError):
        RunConfig(batch_size=0)
    with pytest.raises(InvalidParameterError):
        RunConfig(noise_scale=-0.5)


def test_parse_basics():
    cfg = parse_config(
        """
        # an experiment
        d_rff = 512
        sigma=2.5          # inline comment
        augment=true
        ridge=none

        threshold=0.25
        """
    )
    assert cfg.d_rff == 512 and cfg.sigma == 2.5
    assert cfg.augment is True and cfg.ridge is None and cfg.threshold == 0.25


def test_parse_bool_spellings():
    for text, expected in (("1", True), ("yes", True), ("ON", True), ("0", False), ("off", False)):
        assert parse_config(f"augment={text}").augment is expected
    with pytest.raises(InvalidParameterError):
        parse_config("augment=maybe")


def test_parse_optional_ridge():
    assert parse_config("ridge=auto").ridge is None
    assert parse_config("ridge=0.125").ridge == 0.125


def test_parse_rejects_unknown_and_malformed():
    with pytest.raises(InvalidParameterError):
        parse_config("d_rrf=100")
    with pytest.raises(InvalidParameterError):
        parse_config("just a line")
    with pytest.raises(InvalidParameterError):
        parse_config("d_rff=ten")
    with pytest.raises(InvalidParameterError):
        parse_config("d_rff=-5")  # validated by the dataclass


def test_format_parse_roundtrip():
    cfg = RunConfig(
        d_rff=128,
        sigma=0.5,
        convention="frequency_scale",
        rff_seed=9,
        ridge=0.01,
        mean_mode="normalized",
        temperature=3.0,
        threshold=0.4,
        augment=True,
        noise_scale=0.2,
        augment_seed=5,
        batch_size=64,
        fused_inference=True,
    )
    assert parse_config(format_config(cfg)) == cfg
    # and the all-defaults config survives too
    assert parse_config(format_config(RunConfig())) == RunConfig()


def test_save_load(tmp_path):
    from kladapt.config import load_config, save_config

    cfg = RunConfig(d_rff=64, ridge=None)
    p = tmp_path / "run.config"
    save_config(cfg, p)
    assert load_config(p) == cfg
    assert "ridge=none" in p.read_text()
