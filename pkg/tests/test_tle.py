import pytest

from darkspace.errors import ChecksumMismatch, FieldSyntax, LineLength
from darkspace.orbit import parse_tle
from darkspace.orbit.tle import format_tle, tle_checksum

LINE1 = "1 00005U 58002B   00179.78495062  .00000023  00000-0  28098-4 0  4753"
LINE2 = "2 00005  34.2682 348.7242 1859667 331.7664  19.3264 10.82419157413667"


def test_parse_verification_tle():
    els = parse_tle(LINE1 + "\n" + LINE2)
    assert els.catalog_number == 5
    assert els.eccentricity == pytest.approx(0.1859667)
    assert els.inclination == pytest.approx(34.2682)
    assert els.raan == pytest.approx(348.7242)
    assert els.arg_perigee == pytest.approx(331.7664)
    assert els.mean_anomaly == pytest.approx(19.3264)
    assert els.mean_motion == pytest.approx(10.82419157)
    assert els.bstar == pytest.approx(2.8098e-5)
    assert els.epoch.year == 2000 and els.epoch.month == 6
    assert els.element_set_checksum_ok


def test_parse_with_name_line():
    els = parse_tle("TESTSAT 1\n" + LINE1 + "\n" + LINE2)
    assert els.name == "TESTSAT 1"
    assert els.satellite_id == "TESTSAT 1"


def test_fixture_catalog_number(leo_tle):
    assert leo_tle.catalog_number == 54234


def test_checksum_mismatch_identifies_line_and_column():
    bad = LINE1[:-1] + str((int(LINE1[-1]) + 1) % 10)
    with pytest.raises(ChecksumMismatch) as err:
        parse_tle(bad + "\n" + LINE2)
    assert err.value.line == 1
    assert err.value.column == 69


def test_checksum_lenient_mode_sets_flag():
    bad = LINE1[:-1] + str((int(LINE1[-1]) + 1) % 10)
    els = parse_tle(bad + "\n" + LINE2, verify_checksum=False)
    assert not els.element_set_checksum_ok


def test_short_line_rejected():
    with pytest.raises(LineLength) as err:
        parse_tle(LINE1[:68] + "\n" + LINE2)
    assert err.value.line == 1


def test_wrong_line_tag():
    with pytest.raises(FieldSyntax) as err:
        parse_tle("3" + LINE1[1:] + "\n" + LINE2)
    assert err.value.column == 1


def test_garbage_field_reports_columns():
    mangled = LINE2[:8] + "xx" + LINE2[10:]
    mangled = mangled[:68] + str(tle_checksum(mangled))
    with pytest.raises(FieldSyntax) as err:
        parse_tle(LINE1 + "\n" + mangled)
    assert err.value.line == 2
    assert err.value.column == 9


def test_catalog_mismatch_between_lines():
    other = "2 00006" + LINE2[7:]
    other = other[:68] + str(tle_checksum(other))
    with pytest.raises(FieldSyntax):
        parse_tle(LINE1 + "\n" + other)


def test_exponent_field_forms():
    els = parse_tle(LINE1 + "\n" + LINE2)
    # bstar field ' 28098-4' decodes with the assumed leading decimal point.
    assert els.bstar == pytest.approx(0.28098e-4)


def test_angles_normalized():
    body2 = "2 00005 394.2682 348.7242 1859667 331.7664  19.3264 10.8241915741366"
    text = format_tle(None, LINE1[:68], body2)
    els = parse_tle(text, verify_checksum=False)
    assert 0.0 <= els.inclination < 360.0


def test_format_tle_round_trips():
    text = format_tle("FIXTURE", LINE1[:68], LINE2[:68])
    els = parse_tle(text)
    assert els.name == "FIXTURE"
    assert els.element_set_checksum_ok
