"""Timing grid for the Gaussian-field estimator.

Every cell runs ``estimate_permanent`` on a seeded uniform random M x M
matrix. Setup (norm, embedding, factorisation) and sampling are timed
separately; only the sampling column is used for the scaling regression.
"""
from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals

from collections import namedtuple
import csv
import io
import logging

import numpy as np
import six

from gaussperm.utils.config import get_config_int
from gaussperm.utils.errors import ValidationError
from gaussperm.utils.estimator import estimate_permanent
from gaussperm.utils.matrix import uniform_matrix
from gaussperm.utils.oracles import permanent_ryser
from gaussperm.utils.sampler import SamplerConfig


logger = logging.getLogger(__name__)

CSV_FIELDS = ('m', 'n', 'setup_ns', 'sampling_ns', 'estimate', 'exact',
              'abs_error', 'variance_bound')


BenchCell = namedtuple('BenchCell', CSV_FIELDS + ('nm',))


class BenchGrid(object):

    def __init__(self, cells, seed):
        self.cells = list(cells)
        self.seed = seed

    def by_m(self):
        groups = {}
        for cell in self.cells:
            groups.setdefault(cell.m, []).append(cell)
        return groups

    def to_dict(self):
        return {
            'seed': self.seed,
            'cells': [dict(c._asdict()) for c in self.cells],
            'scaling': scaling_summary(self),
        }


def run_bench(m_list, n_list, seed=0, threads=1, chunk_size=4096,
              repeats=1):
    """Time the estimator over every (M, N) pair.

    Args:
        m_list (list of int): matrix sizes.
        n_list (list of int): sample counts.
        repeats (int): timings per cell; the minimum is kept.

    Returns:
        BenchGrid
    """
    if not m_list or not n_list:
        raise ValidationError('Bench needs at least one M and one N')

    exact_limit = get_config_int('oracles', 'CHECK_EXACT_MAX_M', 7)
    config = SamplerConfig(seed, chunk_size, threads)
    cells = []

    for m in m_list:
        a = uniform_matrix(m, seed + m, -1.0, 1.0)
        exact = permanent_ryser(a).value if m <= exact_limit else None

        for n in n_list:
            logger.info('Bench cell M={} N={}'.format(m, n))
            runs = [estimate_permanent(a, n, config)
                    for _ in range(max(1, repeats))]
            report = runs[0]
            cells.append(BenchCell(
                m=m,
                n=n,
                setup_ns=min(r.wall_ns_setup for r in runs),
                sampling_ns=min(r.wall_ns_sampling for r in runs),
                estimate=report.estimate,
                exact=exact,
                abs_error=(abs(report.estimate - exact)
                           if exact is not None else None),
                variance_bound=report.variance_bound,
                nm=n * m,
            ))

    return BenchGrid(cells, seed)


def scaling_summary(grid):
    """Fit sampling time against N for each M.

    Returns:
        dict: per M, the least-squares slope in ns per sample and the ratios
        of sampling times between successive N values.
    """
    summary = {}
    for m, cells in sorted(six.iteritems(grid.by_m())):
        cells = sorted(cells, key=lambda c: c.n)
        ns = np.array([c.n for c in cells], dtype=float)
        times = np.array([c.sampling_ns for c in cells], dtype=float)

        slope = None
        if len(cells) > 1:
            slope = float(np.polyfit(ns, times, 1)[0])

        ratios = [
            float(b / a) if a else None
            for a, b in zip(times[:-1], times[1:])
        ]
        summary[str(m)] = {
            'slope_ns_per_sample': slope,
            'time_ratios': ratios,
            'n_ratios': [float(b / a) for a, b in zip(ns[:-1], ns[1:])],
        }
    return summary


def bench_csv(grid):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(CSV_FIELDS)
    for cell in grid.cells:
        writer.writerow([
            '' if getattr(cell, f) is None else getattr(cell, f)
            for f in CSV_FIELDS
        ])
    return out.getvalue()


def write_bench_csv(grid, path):
    with io.open(path, 'w', encoding='utf-8') as f:
        f.write(bench_csv(grid))
