import json
import logging
import platform
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

from forecastad.utils import file_digest

logger = logging.getLogger(__name__)

MANIFEST_FILE = 'manifest.json'


def toolkit_version() -> str:
    try:
        return metadata.version('django-forecastad')
    except metadata.PackageNotFoundError:
        return 'unknown'


@dataclass
class RunManifest:
    """
    Everything needed to repeat a command: the resolved config, its seed, the toolkit version and the content
    digests of every input and output file. Passing the manifest back as --config reruns with the same config.
    """

    command: str
    config: dict
    seeds: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    toolkit_version: str = field(default_factory=toolkit_version)
    _started: float = field(default_factory=time.perf_counter, repr=False)

    def add_inputs(self, *paths):
        for path in paths:
            if path is not None:
                self.inputs[str(path)] = file_digest(path)

    def add_outputs(self, *paths):
        for path in paths:
            self.outputs[str(path)] = file_digest(path)

    def lap(self, name: str):
        self.timings[name] = round(time.perf_counter() - self._started, 3)

    def serialize(self) -> dict:
        return {
            'command': self.command,
            'toolkit_version': self.toolkit_version,
            'python': platform.python_version(),
            'config': self.config,
            'seeds': self.seeds,
            'inputs': self.inputs,
            'outputs': self.outputs,
            'timings': self.timings,
        }

    def write(self, directory) -> Path:
        self.lap('total_s')
        path = Path(directory) / MANIFEST_FILE
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.serialize(), f, indent=2, sort_keys=True)
            f.write('\n')
        logger.debug('RunManifest.write: %s', path)
        return path
