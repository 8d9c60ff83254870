import pytest

from relgas.config import RunConfig, load_config, parse_config_text
from relgas.errors import ConfigError


def test_defaults():
    config = parse_config_text("")
    assert config == RunConfig()
    assert config.profile().family == "constant"
    assert config.resolutions() == [200, 400, 800]


def test_comments_and_values():
    config = parse_config_text(
        "# wall run\n"
        "gamma = 1.4\n"
        "entropy = exponential   # S0 = exp(q xi)\n"
        "entropy.q = 0.5\n"
        "boundary = wall\n"
        "n = 64\n"
        "dt_max = none\n"
        "refinements = 200, 50 100\n"
    )
    assert config.gamma == 1.4
    assert config.profile().effective_q == 0.5
    assert config.grid().size == 65
    assert config.dt_max is None
    assert config.resolutions() == [50, 100, 200]
    assert config.solver_config(100).grid.n == 100


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="frobnicate"):
        parse_config_text("gamma = 1.4\nfrobnicate = 3\n")
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        parse_config_text("gamma 1.4\n")


def test_invalid_values_are_named():
    with pytest.raises(ConfigError, match="'gamma'"):
        parse_config_text("gamma = 1\n")
    with pytest.raises(ConfigError, match="'n'"):
        parse_config_text("n = 12.5\n")
    with pytest.raises(ConfigError, match="'check.el'"):
        parse_config_text("check.el = maybe\n")
    with pytest.raises(ConfigError, match="'entropy.expr'"):
        parse_config_text("entropy = custom\n")
    with pytest.raises(ConfigError, match="'tol.order'"):
        parse_config_text("tol.order = -1\n")


def test_power_entropy_needs_positive_labels():
    with pytest.raises(ConfigError, match="'entropy'"):
        parse_config_text("entropy = power\nentropy.q = -1\n")
    config = parse_config_text("entropy = power\nentropy.q = -1\nxi_min = 1\nxi_max = 2\n")
    assert config.profile().q == -1.0


def test_booleans():
    config = parse_config_text("check.el = off\nlaws.printed = yes\nic.balanced = 1\n")
    assert config.check_el is False
    assert config.laws_printed is True
    assert config.ic_balanced is True


def test_balanced_displacement_defaults_to_auto():
    assert RunConfig().initial_condition().balanced is None
    assert parse_config_text("ic.balanced = auto\n").ic_balanced is None
    assert parse_config_text("ic.balanced = off\n").initial_condition().balanced is False
    with pytest.raises(ConfigError, match="'ic.balanced'"):
        parse_config_text("ic.balanced = sometimes\n")


def test_hash_ignores_output_and_threads():
    base = parse_config_text("gamma = 1.5\n")
    assert base.with_overrides(out="elsewhere", threads=8).config_hash == base.config_hash
    assert base.with_overrides(seed=7).config_hash != base.config_hash
    assert base.with_overrides(seed=None) is base
    assert len(base.config_hash) == 16
    assert "threads" not in base.canonical_text()


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("ic = sine-velocity\nic.b = 0.1\n", encoding="utf-8")
    config = load_config(str(path))
    assert config.initial_condition().b == 0.1
    assert load_config(None) == RunConfig()
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.cfg"))
