import pytest

from mobpredict.errors import MobPredictError

from mobpredict.model import (
    UNKNOWN,
    DeviceClass,
    DiscreteSeries,
    LocationAlphabet,
    SpatialResolution,
    TemporalResolution,
    alphabet_intern,
    dumps_series,
    is_weekend,
    loads_series,
    make_series,
    read_series,
    series_filename,
    write_series,
)


def test_first_intern_is_one():
    a = LocationAlphabet()
    assert alphabet_intern("ap1", a) == 1


def test_intern_is_idempotent():
    a = LocationAlphabet()
    assert alphabet_intern("ap1", a) == alphabet_intern("ap1", a)
    assert len(a) == 2


def test_intern_order():
    a = LocationAlphabet()
    assert [a.intern(x) for x in "abac"] == [1, 2, 1, 3]
    assert a.name_of(3) == "c"
    assert a.name_of(UNKNOWN) == "?"


def test_unknown_never_a_location():
    a = LocationAlphabet()
    a.intern("x")
    with pytest.raises(KeyError):
        a.id_of("y")
    assert a.names == ["x"]


def test_enum_parsing():
    assert DeviceClass.parse("Flute") is DeviceClass.FLUTE
    assert DeviceClass.parse("cello") is DeviceClass.CELLO
    assert SpatialResolution.parse("building") is SpatialResolution.BUILDING
    assert SpatialResolution.parse("AP") is SpatialResolution.ACCESS_POINT
    with pytest.raises(MobPredictError):
        SpatialResolution.parse("floor")


def test_temporal_resolution_positive():
    with pytest.raises(MobPredictError):
        TemporalResolution(0)
    assert [t.window_w for t in TemporalResolution.canonical()] == [300, 900, 1800, 3600, 7200]


def test_series_rejects_out_of_alphabet_symbols():
    a = LocationAlphabet()
    a.intern("x")
    with pytest.raises(MobPredictError):
        DiscreteSeries("d", DeviceClass.FLUTE, SpatialResolution.ACCESS_POINT, TemporalResolution(900), 0, (1, 2), a)


def test_interval_of_index():
    s = make_series("d", DeviceClass.CELLO, SpatialResolution.ACCESS_POINT, 900, 1000, ["a", None, "b"])
    assert s.interval(2) == (1000 + 1800, 1000 + 2700)
    assert s.known_symbols() == [1, 2]
    assert s.n_locations() == 2


def test_text_round_trip(tmp_path):
    s = make_series("00:11:22:33:44:55", DeviceClass.FLUTE, SpatialResolution.BUILDING, 3600, 7200,
                    ["b1", "?", "b2", "b1", None])
    text = dumps_series(s)
    lines = text.splitlines()
    assert lines[0] == "00:11:22:33:44:55,flute,building,3600,7200"
    assert lines[1:] == ["b1", "?", "b2", "b1", "?"]
    back = loads_series(text)
    assert back.symbols == s.symbols and back.names() == s.names()
    path = tmp_path / series_filename(s)
    assert ":" not in path.name
    write_series(s, path)
    assert read_series(path) == back


def test_weekend_calendar():
    # 1970-01-03 was a Saturday; 2012-04-02 a Monday
    assert is_weekend(2 * 86400)
    assert not is_weekend(1333324800)
    assert is_weekend(1333324800 + 5 * 86400 + 10)
    # an hour before UTC midnight on Friday is already Saturday at UTC+2
    assert is_weekend(1333324800 + 5 * 86400 - 3600, tz_offset_s=7200)
