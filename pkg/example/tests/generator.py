import numpy as np
from faker import Faker

from forecastad.data.frame import AttackInterval, TimeSeriesFrame
from forecastad.metrics.truth import GroundTruth

TAG_PREFIXES = ('FIT', 'LIT', 'AIT', 'PIT', 'MV', 'P', 'DPIT')


def generate_tag_names(n_tags: int, fake: Faker | None = None) -> tuple[str, ...]:
    """SWaT-style unique tag names: instrument prefix, subprocess digit, two-digit index."""
    fake = fake or Faker()
    names: list[str] = []
    while len(names) < n_tags:
        name = f'{fake.random_element(TAG_PREFIXES)}{fake.random_int(1, 6)}{fake.random_int(1, 99):02d}'
        if name not in names:
            names.append(name)
    return tuple(names)


def generate_frame(n_points: int = 200, n_tags: int = 3, seed: int = 0, attacks=()) -> TimeSeriesFrame:
    """Noisy sines on a 1 s grid."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_points, dtype=np.float64)
    periods = rng.uniform(20, 80, size=n_tags)
    values = np.sin(2 * np.pi * t[:, None] / periods) + 0.05 * rng.standard_normal((n_points, n_tags))
    fake = Faker()
    fake.seed_instance(seed)
    intervals = tuple(AttackInterval(start, end, targets) for start, end, targets in attacks)
    return TimeSeriesFrame(t, values, generate_tag_names(n_tags, fake), attack_intervals=intervals)


def generate_truth(fake: Faker | None = None, max_windows: int = 6) -> GroundTruth:
    """Random sorted, disjoint windows with random gaps."""
    fake = fake or Faker()
    windows = []
    t = fake.random_int(0, 50)
    for _ in range(fake.random_int(1, max_windows)):
        length = fake.random_int(1, 80)
        windows.append((t, t + length - 1))
        t += length + fake.random_int(1, 120)
    return GroundTruth(t + fake.random_int(0, 50), tuple(windows))
