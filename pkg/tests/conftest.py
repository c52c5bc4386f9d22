import pytest

from racesim import generate as gen
from racesim import vehicle as vm
from racesim.loop import load_lap
from racesim.track import load_track

DATA = vm.DATA_DIR


@pytest.fixture(scope="session")
def base_vehicle():
    return vm.default_vehicle()


@pytest.fixture(scope="session")
def road_course():
    return load_track(DATA / "tracks" / "road_course.csv"), load_lap(DATA / "laps" / "road_course_g060.csv")


@pytest.fixture(scope="session")
def oval():
    return load_track(DATA / "tracks" / "oval.csv"), load_lap(DATA / "laps" / "oval_g060.csv")


@pytest.fixture(scope="session")
def short_oval(base_vehicle, tmp_path_factory):
    """A quick lap for batch tests, written to disk like the shipped data."""
    spec = gen.GeneratorSpec(kind="oval", straight=120.0, radius=70.0, bank_turn=0.05, name="short_oval")
    track = gen.generate_track(spec)
    lap = gen.generate_lap(track, base_vehicle, 0.6)
    d = tmp_path_factory.mktemp("short_oval")
    track.to_csv(d / "track.csv")
    lap.to_csv(d / "lap.csv")
    return d / "track.csv", d / "lap.csv"
