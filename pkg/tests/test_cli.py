import json
from pathlib import Path
import tempfile
import unittest

import pandas as pd

from IncomeVerification.cli import main
from IncomeVerification.datagen import write_examples

from tests.toy_fixtures import setup_toy_examples


class TestCLI(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmpdir.name)
        self.out = self.dir / 'out'

        write_examples(setup_toy_examples(n=30, seed=0), self.dir / 'train.csv')
        write_examples(setup_toy_examples(n=9, seed=1), self.dir / 'test.csv')
        self.config = self.dir / 'run.json'
        self.config.write_text(json.dumps({
            'train': 'train.csv',
            'test': 'test.csv',
            'k': 3,
            'gbt': {'rounds': 20, 'max_depth': 3, 'learning_rate': 0.1},
        }))

        self.identity = self.dir / 'identity.json'
        self.write_identity(self.identity, stated_income='115000')

    def tearDown(self):
        self.tmpdir.cleanup()

    def write_identity(self, path, stated_income=None):
        data = {
            'identity_id': 'cli-1',
            'name': {'first': 'Ana', 'last': 'Lopez'},
            'address': {'city': 'Springfield', 'state': 'WA'},
            'employer': 'XYZ Company',
            'job_title': 'Software Engineer',
        }
        if stated_income is not None:
            data['stated_income'] = stated_income
        path.write_text(json.dumps(data))

    def run_cli(self, *args):
        return main(list(args) + ['--config', str(self.config), '--out-dir', str(self.out)])

    def test_train_and_verify(self):
        self.assertEqual(self.run_cli('train', '--variant', 'bow_gbt'), 0)
        self.assertTrue((self.out / 'model' / 'artifact.json').exists())

        manifest = json.loads((self.out / 'manifest.json').read_text())
        self.assertEqual(manifest['command'], 'train')
        self.assertEqual(manifest['config']['variant'], 'bow_gbt')
        self.assertIsNotNone(manifest['inputs']['train']['sha256'])

        self.assertEqual(self.run_cli('verify', '--input', str(self.identity)), 0)
        decision = json.loads((self.out / 'decision.json').read_text())
        self.assertEqual(decision['identity_id'], 'cli-1')
        self.assertEqual(decision['stated'], 115000.0)
        self.assertEqual(decision['tau'], 0.15)
        self.assertIn('verified', decision)

        self.assertEqual(self.run_cli('predict', '--input', str(self.identity)), 0)
        prediction = json.loads((self.out / 'prediction.json').read_text())
        self.assertEqual(prediction['predicted_income'], decision['predicted'])

    def test_verify_without_stated_income(self):
        self.assertEqual(self.run_cli('train', '--variant', 'bow_gbt'), 0)

        unstated = self.dir / 'unstated.json'
        self.write_identity(unstated)
        self.assertEqual(self.run_cli('verify', '--input', str(unstated)), 1)
        self.assertFalse((self.out / 'decision.json').exists())

    def test_verify_without_model(self):
        self.assertEqual(self.run_cli('verify', '--input', str(self.identity)), 1)

    def test_usage_errors(self):
        self.assertEqual(main(['explain']), 1)
        self.assertEqual(main([]), 1)
        self.assertEqual(main(['verify']), 1)
        self.assertEqual(main(['stats', '--config', str(self.dir / 'missing.json')]), 1)
        self.assertEqual(self.run_cli('train', '--variant', 'bow_gbt', '--tau', '-1'), 1)

    def test_missing_inputs(self):
        self.config.write_text(json.dumps({'train': 'nowhere.csv'}))
        self.assertEqual(self.run_cli('train', '--variant', 'bow_gbt'), 1)

    def test_stats(self):
        self.assertEqual(self.run_cli('stats'), 0)
        table = pd.read_csv(self.out / 'dataset_stats.csv')
        self.assertEqual(len(table), 2)

        self.assertEqual(
            self.run_cli('stats', '--dataset', f"Toy={self.dir / 'train.csv'}"), 0
        )
        self.assertEqual(len(pd.read_csv(self.out / 'dataset_stats.csv')), 1)
        self.assertEqual(self.run_cli('stats', '--dataset', 'no-separator'), 1)

    def test_evaluate(self):
        self.assertEqual(self.run_cli('evaluate', '--variant', 'bow_gbt'), 0)

        report = pd.read_csv(self.out / 'prediction_report.csv')
        self.assertEqual(list(report['Model']), ['BOW + GBT'])
        verification = pd.read_csv(self.out / 'verification_report.csv')
        self.assertEqual(list(verification.columns),
                         ['Model', 'Precision', 'Recall', 'F1 score'])

    def test_repeated_runs_are_identical(self):
        outputs = []
        for name in ('a', 'b'):
            out = self.dir / name
            self.assertEqual(
                main(['train', '--variant', 'bow_gbt', '--config', str(self.config),
                      '--out-dir', str(out)]),
                0
            )
            self.assertEqual(
                main(['evaluate', '--variant', 'bow_gbt', '--config', str(self.config),
                      '--out-dir', str(out)]),
                0
            )
            outputs.append({
                path.relative_to(out).as_posix(): path.read_bytes()
                for path in sorted(out.rglob('*'))
                if path.is_file() and path.name != 'manifest.json'
            })

        self.assertIn('model/internal/regressor.json', outputs[0])
        self.assertEqual(outputs[0], outputs[1])

    def test_synth(self):
        self.assertEqual(
            main(['synth', '--preset', 'client_test', '--n-rows', '12',
                  '--seed', '5', '--out-dir', str(self.out)]),
            0
        )
        for name in ('train.csv', 'test.csv', 'match_labels.csv',
                     'external_corpus.csv', 'manifest.json'):
            self.assertTrue((self.out / name).exists(), name)
        self.assertTrue((self.out / 'corpus' / 'corpus.jsonl').exists())
        self.assertEqual(len(pd.read_csv(self.out / 'train.csv')), 12)

        manifest = json.loads((self.out / 'manifest.json').read_text())
        self.assertEqual(manifest['extra']['synth_config']['seed'], 5)


if __name__ == '__main__':
    unittest.main()
