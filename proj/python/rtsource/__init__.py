"""Forward solver and source reconstruction for attenuated transport with
anisotropic scattering in a simple 2D domain."""

import json

from . import _core
from ._core import ConfigError, NumericalError, format_double

__all__ = ["Model", "ConfigError", "NumericalError", "format_double", "run_acceptance"]
__version__ = "0.1.0"


class Model:
    """A configured domain, speed and optics.

    `config` is a dict with the same schema as the rts JSON config files;
    omitted keys take their defaults. Fields are returned as {mode: (n, n)
    complex array}, indexed [y row, x column]; see `grid()` for coordinates.
    """

    def __init__(self, config=None):
        self._m = _core.Model(json.dumps(config or {}))

    @property
    def config(self):
        """The full effective configuration."""
        return json.loads(self._m.config())

    def grid(self):
        return self._m.grid()

    def exit_time(self, x, y, theta):
        """(tau forward, tau backward) from the phase point (x, y, theta)."""
        return self._m.exit_time(x, y, theta)

    def geometry(self):
        return json.loads(self._m.geometry())

    def source(self, case=""):
        return self._m.source(case)

    def forward(self, case=""):
        """(u modes, iterations, residual history) for the configured source."""
        return self._m.forward(case)

    def measure(self, case=""):
        """Boundary data on the outgoing fan as a dict of flat arrays."""
        return self._m.measure(case)

    def reconstruct(self):
        """(results, recovered fields by name, measured fan) for reconstruct.case."""
        results, fields, fan = self._m.reconstruct()
        return json.loads(results), fields, fan


def run_acceptance(ids=(), quick=True):
    """Run acceptance criteria (all when `ids` is empty); one dict per criterion."""
    return _core.run_acceptance(list(ids), quick)
