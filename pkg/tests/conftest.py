import json
from pathlib import Path

import pytest

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def load_figure_config(name: str) -> dict:
    return json.loads((CONFIG_DIR / f"{name}.json").read_text())


@pytest.fixture
def figure_config():
    """Fresh copy of a shipped figure configuration document."""
    return load_figure_config


@pytest.fixture
def write_config(tmp_path):
    """Write a figure config (optionally patched) to tmp_path and return its path and output dir."""

    def _write(name: str, n_samples: int = 4000, **patch) -> tuple[Path, Path]:
        doc = load_figure_config(name)
        doc["sampler"]["n_samples"] = n_samples
        doc["output_dir"] = str(tmp_path / "out")
        for key, value in patch.items():
            section, _, field = key.partition("__")
            if field:
                if value is None:
                    doc[section].pop(field, None)
                else:
                    doc[section][field] = value
            else:
                doc[section] = value
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(doc))
        return path, tmp_path / "out"

    return _write
