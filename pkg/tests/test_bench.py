import pytest

from gaussperm.utils.bench import CSV_FIELDS
from gaussperm.utils.bench import bench_csv
from gaussperm.utils.bench import run_bench
from gaussperm.utils.bench import scaling_summary
from gaussperm.utils.bench import write_bench_csv
from gaussperm.utils.errors import ValidationError


@pytest.fixture
def grid():
    return run_bench([2, 3], [100, 200], seed=1)


def test_grid_cells(grid):
    assert [(c.m, c.n) for c in grid.cells] == [
        (2, 100), (2, 200), (3, 100), (3, 200)]
    for cell in grid.cells:
        assert cell.nm == cell.m * cell.n
        assert cell.abs_error == pytest.approx(abs(cell.estimate - cell.exact))
        assert cell.sampling_ns >= 0


def test_grid_is_reproducible(grid):
    again = run_bench([2, 3], [100, 200], seed=1, threads=2, chunk_size=4096)
    assert [c.estimate for c in again.cells] == [
        c.estimate for c in grid.cells]


def test_scaling_summary(grid):
    summary = scaling_summary(grid)
    assert sorted(summary) == ['2', '3']
    assert summary['2']['n_ratios'] == [2.0]
    assert len(summary['3']['time_ratios']) == 1
    assert grid.to_dict()['scaling'] == summary


def test_csv(grid, tmp_path):
    lines = bench_csv(grid).splitlines()
    assert lines[0] == ','.join(CSV_FIELDS)
    assert lines[0] == ('m,n,setup_ns,sampling_ns,estimate,exact,abs_error,'
                        'variance_bound')
    assert len(lines) == 5

    path = tmp_path / 'grid.csv'
    write_bench_csv(grid, str(path))
    assert path.read_text() == bench_csv(grid)


def test_exact_column_blank_above_limit(empty_config):
    empty_config.add_section('oracles')
    empty_config.set('oracles', 'CHECK_EXACT_MAX_M', '1')
    grid = run_bench([2], [50])
    assert grid.cells[0].exact is None
    row = bench_csv(grid).splitlines()[1].split(',')
    assert row[5] == '' and row[6] == ''


def test_empty_lists_rejected():
    with pytest.raises(ValidationError):
        run_bench([], [100])


@pytest.mark.slow
def test_sampling_time_scales_linearly():
    grid = run_bench([4], [100000, 200000, 400000, 800000], repeats=5)
    ratios = scaling_summary(grid)['4']['time_ratios']
    assert all(1.5 <= r <= 2.5 for r in ratios)
