"""Run configuration tests."""
import json
import os

import pytest

from src.config import get_default_config, read_config, update_config
from src.errors import ConfigError, InputFileError

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs", "recon")


class TestReadConfig:
    """Test loading YAML/JSON configs onto the defaults."""

    # pylint: disable=no-self-use

    def _write(self, tmp_path, name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    def test_defaults(self):
        """Defaults match the documented settings."""
        config = read_config()
        assert config.max_iterations == 10
        assert config.tikhonov_lambda == 0.0
        assert config.kernel_width == 5
        assert config.kernel_table_points == 10000
        assert config.dcf == "gridded_ones"
        assert config.filter.kind == "hard_circle"
        assert config.undersampling.factors == [1]
        assert config.is_frozen()

    def test_empty_file(self, tmp_path):
        """An empty mapping keeps every default."""
        config = read_config(self._write(tmp_path, "empty.json", "{}"))
        assert config == get_default_config()

    def test_json(self, tmp_path):
        """JSON files load like YAML."""
        text = json.dumps({"max_iterations": 20, "filter": {"kind": "arctan", "beta": 50}})
        config = read_config(self._write(tmp_path, "run.json", text))
        assert config.max_iterations == 20
        assert config.filter.kind == "arctan"
        assert config.filter.beta == 50.0
        assert isinstance(config.filter.beta, float)

    def test_unknown_key_warns(self, tmp_path):
        """Unknown keys are ignored with a warning."""
        path = self._write(tmp_path, "run.yaml", "max_iterations: 3\ncolour: blue\n")
        with pytest.warns(UserWarning, match="colour"):
            config = read_config(path)
        assert config.max_iterations == 3

    def test_base_inheritance(self, tmp_path):
        """Values of the including file override its bases."""
        self._write(tmp_path, "common.yaml", "max_iterations: 4\nkernel_width: 6\n")
        path = self._write(tmp_path, "run.yaml", "base: [common.yaml]\nmax_iterations: 8\n")
        config = read_config(path)
        assert config.max_iterations == 8
        assert config.kernel_width == 6

    def test_invalid_value(self, tmp_path):
        """Out-of-range values are config errors."""
        with pytest.raises(ConfigError):
            read_config(self._write(tmp_path, "bad.yaml", "max_iterations: 0\n"))
        with pytest.raises(ConfigError):
            read_config(self._write(tmp_path, "bad2.yaml", "dcf: voronoi\n"))

    def test_malformed(self, tmp_path):
        """Unparsable files are config errors."""
        with pytest.raises(ConfigError):
            read_config(self._write(tmp_path, "broken.yaml", "max_iterations: [1, 2\n"))

    def test_missing(self, tmp_path):
        """A missing file names its path."""
        with pytest.raises(InputFileError, match="nowhere.yaml"):
            read_config(str(tmp_path / "nowhere.yaml"))

    def test_shipped_configs(self):
        """The brain and heart configs extend the defaults."""
        brain = read_config(os.path.join(CONFIG_DIR, "brain.yaml"))
        assert brain.trajectory_units == "fov"
        assert brain.undersampling.factors == [1, 2, 3, 4]
        assert brain.kernel_width == 5
        heart = read_config(os.path.join(CONFIG_DIR, "heart.yaml"))
        assert heart.undersampling.scheme == "first"
        assert heart.undersampling.factors == [55, 33, 22, 11]


class TestUpdateConfig:
    """Test command line overrides."""

    # pylint: disable=no-self-use

    def test_overrides(self):
        """Nested keys use a double underscore, None is skipped."""
        config = update_config(
            read_config(), output__dir="/tmp/run", max_iterations=None, tikhonov_lambda=1
        )
        assert config.output.dir == "/tmp/run"
        assert config.max_iterations == 10
        assert config.tikhonov_lambda == 1.0
        assert config.is_frozen()

    def test_invalid_override(self):
        """Overrides are validated."""
        with pytest.raises(ConfigError):
            update_config(read_config(), tikhonov_lambda=-1.0)
