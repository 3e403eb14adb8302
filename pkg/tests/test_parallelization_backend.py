import json
import multiprocessing
from pathlib import Path
import tempfile
import unittest

from IncomeVerification.datagen import load_corpus, parse_wage
from IncomeVerification.pipeline import SequentialBackend, make_backend
from IncomeVerification.pipeline.parallelizationBackend import Joblib, Pathos


parallel_backends = [Joblib, Pathos]
backends = [SequentialBackend] + parallel_backends

n_cores = 2
cpu_count = multiprocessing.cpu_count()


def annual_wage(row):
    wage = parse_wage(*row)
    return None if wage is None else wage.dollars


class TestParallelizationBackend(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def test_n_cores(self):
        with self.assertRaises(ValueError):
            SequentialBackend(n_cores=n_cores)

        with self.assertRaises(ValueError):
            backend = SequentialBackend()
            backend.n_cores = n_cores

        for Backend in parallel_backends:
            backend = Backend(n_cores=1)
            self.assertEqual(backend._n_cores, 1)

            with self.assertRaises(ValueError):
                Backend(n_cores=cpu_count + 1)

    def test_relative_n_cores(self):
        for Backend in parallel_backends:
            backend = Backend(n_cores=0)
            self.assertEqual(backend._n_cores, cpu_count)

            backend.n_cores = -1
            self.assertEqual(backend._n_cores, cpu_count)

            with self.assertRaises(ValueError):
                backend.n_cores = - cpu_count - 1

    def test_make_backend(self):
        self.assertIsInstance(make_backend(1), SequentialBackend)
        self.assertIsInstance(make_backend(0), SequentialBackend)

        backend = make_backend(2)
        self.assertEqual(str(backend), 'Joblib')
        self.assertEqual(backend.n_cores, min(2, cpu_count))


class TestParallelEvaluation(unittest.TestCase):
    """Every backend returns results in input order."""

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        self.rows = [
            ('40', 'Hour'),
            ('1500', 'Week'),
            ('95,000', 'Year'),
            ('0', 'Year'),
            ('8000', 'Month'),
            ('n/a', 'Year'),
        ]
        self.expected = [83200.0, 78000.0, 95000.0, None, 96000.0, None]

    def test_evaluate(self):
        for Backend in backends:
            backend = Backend()
            if not isinstance(backend, SequentialBackend):
                backend.n_cores = min(n_cores, cpu_count)

            self.assertEqual(
                list(backend.evaluate(annual_wage, self.rows)), self.expected
            )
            self.assertEqual(backend.evaluate(annual_wage, []), [])

    def test_load_corpus(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            for i, source_type in enumerate(['government', 'salary_site', 'snippet']):
                lines = [
                    json.dumps({
                        'id': f'{source_type}-{j}',
                        'source_type': source_type,
                        'payload': {'text': f'record {j}'},
                    })
                    for j in range(3)
                ]
                lines.insert(1, '{broken')
                path = Path(tmpdir) / f'{i}_{source_type}.jsonl'
                path.write_text('\n'.join(lines) + '\n')

            sequential = load_corpus(tmpdir)
            parallel = load_corpus(tmpdir, backend=Joblib(n_cores=min(n_cores, cpu_count)))

        self.assertEqual(len(sequential), 9)
        self.assertEqual(parallel.records, sequential.records)
        self.assertEqual(parallel.errors, sequential.errors)
        self.assertEqual([issue.line for issue in parallel.errors], [2, 2, 2])


if __name__ == '__main__':
    unittest.main()
