import pytest

from BeamPlan.channel import fit_cluster, total_cluster_power
from BeamPlan.exceptions import ConfigError, RayFileError
from BeamPlan.models import ClusterProfile, Ray
from BeamPlan.power import mw_to_dbm
from BeamPlan.rayfile import parse_ray_csv, read_ray_file, write_ray_file

HEADER = 'offset_aoa_deg,amplitude,phase_rad,delay_s'


def test_reads_conference_fixture(fixture_path):
    cluster = read_ray_file(fixture_path('conference_cluster.csv'))
    assert cluster.n_rays == 38
    assert cluster.sas_deg == pytest.approx(72.2)
    assert cluster.specular_aoa_deg == 90.0
    assert cluster.specular_toa_s == pytest.approx(1e-8)
    assert cluster.metadata['fit_v_deg'] == '9.23'
    assert 'specular_aoa_deg' not in cluster.metadata


def test_conference_fixture_power_within_declared_tolerance(fixture_path):
    cluster = read_ray_file(fixture_path('conference_cluster.csv'))
    reference = float(cluster.metadata['reference_total_power_dbm'])
    tolerance = float(cluster.metadata['total_power_tolerance_db'])
    assert abs(mw_to_dbm(total_cluster_power(cluster)) - reference) <= tolerance


def test_conference_fixture_fit(fixture_path):
    cluster = read_ray_file(fixture_path('conference_cluster.csv'))
    rel = float(cluster.metadata['fit_tolerance_rel'])
    fit = fit_cluster(cluster, 1.9)
    assert fit.u == pytest.approx(float(cluster.metadata['fit_u']), rel=rel)
    assert fit.x_deg == pytest.approx(float(cluster.metadata['fit_x_deg']), rel=rel)
    assert fit.v_deg == pytest.approx(float(cluster.metadata['fit_v_deg']), rel=rel)


def test_malformed_value_reports_line(fixture_path):
    with pytest.raises(RayFileError) as info:
        read_ray_file(fixture_path('malformed_rays.csv'))
    assert info.value.line_number == 6
    assert 'line 6' in str(info.value)
    assert 'amplitude' in str(info.value)


def test_missing_header():
    with pytest.raises(RayFileError, match='no header'):
        parse_ray_csv('# specular_aoa_deg=90\n')


def test_wrong_header():
    with pytest.raises(RayFileError) as info:
        parse_ray_csv('# specular_aoa_deg=90\noffset,amp\n0,1\n')
    assert info.value.line_number == 2


def test_missing_specular_aoa():
    with pytest.raises(RayFileError, match='specular_aoa_deg'):
        parse_ray_csv(f'{HEADER}\n0.0,1.0,0.0,0.0\n')


def test_column_count_mismatch():
    text = f'# specular_aoa_deg=45\n{HEADER}\n-1.0,1.0,0.0,0.0\n1.0,1.0,0.0\n'
    with pytest.raises(RayFileError) as info:
        parse_ray_csv(text)
    assert info.value.line_number == 4


def test_negative_amplitude_is_a_ray_file_error():
    with pytest.raises(RayFileError) as info:
        parse_ray_csv(f'# specular_aoa_deg=0\n{HEADER}\n0.0,-1.0,0.0,0.0\n')
    assert info.value.line_number == 3


def test_sas_mismatch_rejected():
    text = f'# specular_aoa_deg=0\n# sas_deg=10\n{HEADER}\n-1.0,1.0,0,0\n1.0,1.0,0,0\n'
    with pytest.raises(RayFileError, match='sas_deg'):
        parse_ray_csv(text)


def test_power_dbm_column():
    text = ('# specular_aoa_deg=90\n# specular_power_dbm=0\n'
            'offset_aoa_deg,power_dbm,phase_rad,delay_s\n-1.0,-10.0,0,0\n1.0,-20.0,0,0\n')
    cluster = parse_ray_csv(text)
    assert cluster.specular_amplitude == pytest.approx(1.0)
    assert [r.amplitude ** 2 for r in cluster.diffuse] == [pytest.approx(0.1), pytest.approx(0.01)]


def test_amplitude_unit_tag():
    text = f'# specular_aoa_deg=90\n# amplitude_unit=dBm\n{HEADER}\n0.0,-30.0,0,0\n'
    cluster = parse_ray_csv(text)
    assert cluster.diffuse[0].amplitude ** 2 == pytest.approx(1e-3)
    assert 'amplitude_unit' not in cluster.metadata


def test_comments_after_header_are_ignored():
    text = f'# specular_aoa_deg=90\n{HEADER}\n# trailing note\n0.0,0.5,0,0\n\n'
    assert parse_ray_csv(text).n_rays == 1


def test_write_then_read_keeps_cluster(tmp_path):
    cluster = ClusterProfile(specular_amplitude=0.1, specular_aoa_deg=30.0, specular_toa_s=2e-9,
                             diffuse=(Ray(0.01, -2.5, 1.0, 3e-9), Ray(0.02, 0.1, 2.0, 4e-9),
                                      Ray(1 / 3, 2.5, 3.0, 5e-9)))
    path = write_ray_file(cluster, tmp_path / 'nested' / 'rays.csv', extra_metadata={'seed': 7})
    again = read_ray_file(path)
    assert again == cluster
    assert again.metadata['seed'] == '7'


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match='cannot read ray file'):
        read_ray_file(tmp_path / 'absent.csv')


def test_minus_infinity_dbm_is_silent_ray():
    text = f'# specular_aoa_deg=0\n# amplitude_unit=dbm\n{HEADER}\n0.0,-inf,0,0\n'
    assert parse_ray_csv(text).diffuse[0].amplitude == 0.0


def test_invalid_utf8_is_a_ray_file_error(tmp_path):
    path = tmp_path / 'binary.csv'
    path.write_bytes(f'# specular_aoa_deg=0\n{HEADER}\n'.encode() + b'0,\xff\xfe,0,0\n')
    with pytest.raises(RayFileError, match='not valid UTF-8') as info:
        read_ray_file(path)
    assert str(path) in str(info.value)


def test_write_ray_file_unwritable_path(tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('x')
    cluster = ClusterProfile(specular_amplitude=0.1, specular_aoa_deg=0.0, diffuse=(Ray(0.01, 0.0, 0.0, 0.0),))
    with pytest.raises(ConfigError, match='cannot write ray file'):
        write_ray_file(cluster, blocker / 'rays.csv')
