"""Small worlds shared by the test modules."""

import numpy as np

from IncomeVerification.core import Address, Identity, Money, Name
from IncomeVerification.datagen import LabeledExample, SynthConfig, generate_synthetic
from IncomeVerification.pipeline import (
    RunConfig, GBTConfig, FFNConfig, LSTMConfig, WordVectorConfig,
)


PAYSITE_PAGE = """
<html><body>
<div class="salary-report">
  <h1 class="employer">XYZ Company</h1>
  <h2 class="title">Software Engineer</h2>
  <span class="location">Seattle, WA</span>
</div>
<table class="compensation">
  <tr class="base-salary">
    <td class="min">$90,000</td><td class="mean">$110,000</td><td class="max">$234,000</td>
  </tr>
  <tr class="total-compensation">
    <td class="min">$95,000</td><td class="mean">$125,000</td><td class="max">$250,000</td>
  </tr>
</table>
</body></html>
"""


def setup_identity(
        employer='XYZ Company', job_title='Software Engineer', stated_income=None,
        identity_id='id-1', city='Seattle', state='WA', middle='Ryan'):
    return Identity(
        name=Name(first='James', middle=middle, last='Smith'),
        address=Address(street='12 Pine St', city=city, state=state, zip='98101'),
        dob='1980-05-17',
        employer=employer,
        job_title=job_title,
        stated_income=stated_income,
        identity_id=identity_id,
    )


def setup_toy_documents():
    """One corpus document per source type."""
    return [
        {
            'id': 'gov-1',
            'source_type': 'government',
            'payload': {
                'name': 'James R Smith',
                'salary': '$84,443',
                'bonus': '$10000',
                'agency': 'XYZ Company',
                'location': 'Seattle, WA',
                'occupation': 'Software Engineer',
                'year': '2016',
            },
        },
        {
            'id': 'site-1',
            'source_type': 'salary_site',
            'payload': {'site_id': 'paysite', 'document': PAYSITE_PAGE},
        },
        {
            'id': 'snip-1',
            'source_type': 'snippet',
            'payload': {
                'text': 'The average Software Engineer salary is $100,000'
            },
        },
        {
            'id': 'snip-2',
            'source_type': 'snippet',
            'payload': {'text': 'Nurses enjoy flexible schedules.'},
        },
    ]


def setup_toy_examples(n=30, seed=0, stated=True):
    """Examples whose income depends on title and state."""
    rng = np.random.default_rng(seed)
    titles = ['Software Engineer', 'Registered Nurse', 'Sales Associate']
    base = {'Software Engineer': 110000, 'Registered Nurse': 70000,
            'Sales Associate': 35000}
    employers = ['XYZ Company', 'Mercy Hospital', 'Walmart']
    states = ['WA', 'TX', 'NY']

    examples = []
    for i in range(n):
        title = titles[i % 3]
        state = states[(i // 3) % 3]
        true_income = Money.from_dollars(
            round(base[title] * (1.2 if state == 'NY' else 1.0)
                  * float(rng.uniform(0.9, 1.1)), 2)
        )
        stated_income = true_income * 1.5 if stated and i % 4 == 0 else true_income
        identity = Identity(
            address=Address(city='Springfield', state=state),
            employer=employers[i % 3],
            job_title=title,
            stated_income=stated_income if stated else None,
            identity_id=f'toy-{i:03d}',
        )
        examples.append(LabeledExample(identity, true_income))

    return examples


def setup_synthetic(n_rows=40, test_rows=15, seed=3, **overrides):
    overrides.setdefault('distractor_ratio', 0.5)
    config = SynthConfig(n_rows=n_rows, test_rows=test_rows, seed=seed, **overrides)
    return generate_synthetic(config)


def setup_fast_config(**overrides):
    """Run configuration with tiny learners."""
    values = {
        'k': 3,
        'seed': 7,
        'stacking_folds': 2,
        'gbt': GBTConfig(rounds=20, max_depth=3, learning_rate=0.1),
        'external_gbt': GBTConfig(rounds=20, max_depth=3, learning_rate=0.1),
        'stacking_gbt': GBTConfig(rounds=20, max_depth=3, learning_rate=0.1),
        'ffn': FFNConfig(hidden=(8,), tuned_hidden=(8,), epochs=3, batch_size=8),
        'lstm': LSTMConfig(epochs=1, hidden=4, dense=4, batch_size=8),
        'word_vectors': WordVectorConfig(dim=8, epochs=1),
    }
    values.update(overrides)
    return RunConfig(**values)
