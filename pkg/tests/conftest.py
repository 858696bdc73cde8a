import numpy as np
import pytest

from gtospec.exterior import FormField, ModeLattice, TrigField, TrigVectorField
from gtospec.operators import NoiseModel, SystemSpec


def random_real_field(lattice: ModeLattice, rng: np.random.Generator, band: int, scale: float = 1.0) -> TrigField:
    """Real trig polynomial with modes |n_j| <= band and random coefficients."""
    c = np.zeros(lattice.shape, complex)
    sl = tuple(slice(lattice.cutoff - band, lattice.cutoff + band + 1) for _ in range(lattice.dim))
    c[sl] = scale * (rng.standard_normal(c[sl].shape) + 1j * rng.standard_normal(c[sl].shape))
    mirror = np.conj(c[(slice(None, None, -1),) * lattice.dim])
    return TrigField(lattice, (c + mirror) / 2)


def random_form(lattice: ModeLattice, degree: int, rng: np.random.Generator, band: int | None = None,
                real: bool = True) -> FormField:
    band = lattice.cutoff if band is None else band
    comps = [random_real_field(lattice, rng, band).coeffs for _ in range(FormField.zeros(lattice, degree).coeffs.shape[0])]
    c = np.stack(comps)
    if not real:
        c = c + 1j * np.stack([random_real_field(lattice, rng, band).coeffs for _ in comps])
    return FormField(lattice, degree, c)


def random_vector_field(lattice, rng, band, scale=1.0) -> TrigVectorField:
    return TrigVectorField([random_real_field(lattice, rng, band, scale) for _ in range(lattice.dim)])


def random_system(dim: int, cutoff: int, seed: int, band: int = 1, theta: float = 0.5,
                  multiplicative: bool = False) -> SystemSpec:
    """Random trig flow; constant frame noise unless ``multiplicative``."""
    rng = np.random.default_rng(seed)
    lat = ModeLattice(dim, cutoff)
    flow = random_vector_field(lat, rng, band, 0.5)
    frame = TrigVectorField.coordinate_frame(lat)
    if multiplicative:
        frame = [g + random_vector_field(lat, rng, band, 0.05) for g in frame]
    return SystemSpec(lat, flow, NoiseModel(tuple(frame), theta), f"random{dim}d")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one PASS/FAIL line per acceptance criterion, shown after the test run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
