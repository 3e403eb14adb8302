from collections import namedtuple
import datetime
import html
import json
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError
from IncomeVerification.dataStructure import (
    Structure, Bool, Ratio, RangedInteger, String, Tuple, UnsignedFloat, UnsignedInteger
)
from IncomeVerification.core.identity import Address, Identity, Name
from IncomeVerification.core.money import Money
from IncomeVerification.core.rng import derive_seed, make_rng
from IncomeVerification.retrieval.industry import INDUSTRIES

from .corpus import SourceCorpus, write_corpus
from .dataset import LabeledExample, write_examples, write_match_labels


__all__ = [
    'PRESETS', 'SynthConfig', 'SyntheticData', 'load_vocabulary',
    'calibrate_moments', 'generate_synthetic', 'write_synthetic',
]


logger = log.get_logger('datagen')

DEFAULT_VOCABULARY = Path(__file__).parent.parent / 'data' / 'vocabulary.json'

PRESETS = {
    'client_train': (3108, 77571.760, 57979.323),
    'client_test': (1037, 78930.494, 52488.707),
    'h1b_train': (7500, 91411.177, 46969.135),
    'h1b_test': (2500, 90648.067, 44355.742),
}
"""dict: Dataset size, income mean and income stddev targets."""

SITE_IDS = ('paysite', 'salaryhub')

N_TAIL_EMPLOYERS = 40
LOG_INCOME_NOISE = 0.35


class SynthConfig(Structure):
    """Configuration of the synthetic world.

    Attributes
    ----------
    n_rows, income_mean, income_stddev : int, float, float
        Size and income moment targets of the training set.
    test_rows, test_mean, test_stddev : int, float, float
        Same for the test set.
    alias_noise : float
        Rate at which employer and title strings are replaced by aliases.
    income_inflation_rate : float
        Fraction of identities stating an inflated income.
    inflation_factor_range : tuple
        Uniform range of the inflation factor.
    government_rate : float
        Probability that a person has a government salary record.
    sources_per_identity : tuple
        (min, max) salary site pages per (employer, title) of an identity.
    snippet_rate : float
        Probability of a text snippet per title (halved per employer/title).
    distractor_ratio : float
        People outside the datasets per dataset identity.
    name_twin_rate : float
        Fraction of those people sharing the name of a dataset identity.
    tail_employer_rate : float
        Fraction of people working for small employers missing from the
        reference tables.
    record_noise : float
        Log-scale noise of salaries reported by sources.
    labeled_negatives : int
        Non co-referent records labeled per identity.
    calibrate_moments : bool
        If True, incomes hit the moment targets exactly on the sample.
    seed : int
    vocabulary_path : str, optional
        Defaults to the shipped vocabulary.
    """

    n_rows = RangedInteger(lb=1, default=PRESETS['client_train'][0])
    income_mean = UnsignedFloat(default=PRESETS['client_train'][1])
    income_stddev = UnsignedFloat(default=PRESETS['client_train'][2])
    test_rows = UnsignedInteger(default=PRESETS['client_test'][0])
    test_mean = UnsignedFloat(default=PRESETS['client_test'][1])
    test_stddev = UnsignedFloat(default=PRESETS['client_test'][2])
    alias_noise = Ratio(default=0.2)
    income_inflation_rate = Ratio(default=0.25)
    inflation_factor_range = Tuple(default=(1.3, 2.0))
    government_rate = Ratio(default=0.5)
    sources_per_identity = Tuple(default=(1, 2))
    snippet_rate = Ratio(default=0.6)
    distractor_ratio = UnsignedFloat(default=1.5)
    name_twin_rate = Ratio(default=0.2)
    tail_employer_rate = Ratio(default=0.25)
    record_noise = UnsignedFloat(default=0.05)
    labeled_negatives = UnsignedInteger(default=4)
    calibrate_moments = Bool(default=True)
    seed = UnsignedInteger(default=42)
    vocabulary_path = String(is_optional=True)

    _parameters = [
        'n_rows', 'income_mean', 'income_stddev',
        'test_rows', 'test_mean', 'test_stddev',
        'alias_noise', 'income_inflation_rate', 'inflation_factor_range',
        'government_rate', 'sources_per_identity', 'snippet_rate',
        'distractor_ratio', 'name_twin_rate', 'tail_employer_rate',
        'record_noise', 'labeled_negatives', 'calibrate_moments', 'seed',
        'vocabulary_path',
    ]

    def check(self):
        """Validate interval parameters.

        Raises
        ------
        ConfigurationError
        """
        low, high = self.inflation_factor_range
        if not 1 <= low <= high:
            raise ConfigurationError(
                f"inflation_factor_range must satisfy 1 <= low <= high, "
                f"got {self.inflation_factor_range}."
            )
        low, high = self.sources_per_identity
        if not 0 <= low <= high:
            raise ConfigurationError(
                f"sources_per_identity must satisfy 0 <= min <= max, "
                f"got {self.sources_per_identity}."
            )
        if self.income_mean <= 0 or self.test_mean <= 0:
            raise ConfigurationError("Income means must be positive.")

    @classmethod
    def preset(cls, name, **overrides):
        """Configuration targeting a dataset of the statistics table.

        Parameters
        ----------
        name : str
            'client' or 'h1b' for train and test targets, or one of the
            ``PRESETS`` keys for a single dataset (used for train and test).
        **overrides
            Further configuration values.
        """
        if name in ('client', 'h1b'):
            train, test = PRESETS[f'{name}_train'], PRESETS[f'{name}_test']
        elif name in PRESETS:
            train = PRESETS[name]
            test = (max(1, train[0] // 3), train[1], train[2])
        else:
            raise ConfigurationError(
                f"Unknown preset {name!r}; expected 'client', 'h1b' or one of "
                f"{sorted(PRESETS)}."
            )

        values = {
            'n_rows': train[0], 'income_mean': train[1], 'income_stddev': train[2],
            'test_rows': test[0], 'test_mean': test[1], 'test_stddev': test[2],
        }
        values.update(overrides)
        return cls(**values)

    def to_dict(self):
        return {param: getattr(self, param) for param in self._parameters}


SyntheticData = namedtuple(
    'SyntheticData', ['train', 'test', 'corpus', 'match_labels', 'external_corpus']
)
SyntheticData.__doc__ = """Output of ``generate_synthetic``."""

_Person = namedtuple(
    '_Person',
    ['person_id', 'first', 'middle', 'last', 'street', 'city', 'county', 'state',
     'zip', 'dob', 'employer', 'title', 'z']
)

_Meta = namedtuple('_Meta', ['person_id', 'employer', 'title'])


def load_vocabulary(path=None):
    """Load the vocabulary of the synthetic world."""
    path = Path(path) if path is not None else DEFAULT_VOCABULARY
    data = json.loads(path.read_text(encoding='utf-8'))
    if data.get('format') != 'synthetic-vocabulary' or data.get('version') != 1:
        raise ConfigurationError(
            f"Unsupported vocabulary format {data.get('format')!r} "
            f"version {data.get('version')!r}."
        )
    return data


def calibrate_moments(z, mean, stddev, exact=True):
    """Map log-scale scores onto incomes with given mean and stddev.

    With ``exact``, incomes are ``s * exp(p * z)`` where ``p`` makes the
    sample coefficient of variation match and ``s`` the sample mean, so the
    sample moments hit the targets and the ordering of ``z`` is kept.
    Otherwise ``z`` is standardized and mapped through the log-normal
    distribution with the target moments.

    Parameters
    ----------
    z : np.ndarray
    mean, stddev : float
    exact : bool, optional

    Returns
    -------
    incomes : np.ndarray
    transform : tuple
        ``(p, s, shift)`` such that incomes = s * exp(p * (z - shift)).
    """
    z = np.asarray(z, dtype=float)
    target_cv = stddev / mean
    shift = float(z.max()) if len(z) else 0.0

    if len(z) < 2 or np.ptp(z) == 0 or target_cv == 0:
        return np.full(len(z), float(mean)), (0.0, float(mean), shift)

    if not exact:
        sigma = np.sqrt(np.log1p(target_cv ** 2))
        mu = np.log(mean) - sigma ** 2 / 2
        p = sigma / z.std(ddof=1)
        s = np.exp(mu - p * (z.mean() - shift))
        return s * np.exp(p * (z - shift)), (float(p), float(s), shift)

    def cv_gap(p):
        w = np.exp(p * (z - shift))
        return w.std(ddof=1) / w.mean() - target_cv

    high = 1.0
    while cv_gap(high) < 0 and high < 1e3:
        high *= 2
    p = brentq(cv_gap, 1e-9, high, xtol=1e-14)

    w = np.exp(p * (z - shift))
    s = mean / w.mean()

    return s * w, (float(p), float(s), shift)


def _choose(rng, items, weights=None):
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
    return items[int(rng.choice(len(items), p=weights))]


def _dollars(value):
    return f'{int(round(value)):,}'


class _World():
    """Population, employers and locations of one synthetic run."""

    def __init__(self, config, vocabulary, rng):
        self.config = config
        self.rng = rng
        self.titles = vocabulary['titles']
        self.employers = [dict(e, tail=False) for e in vocabulary['employers']]
        self.locations = vocabulary['locations']
        self.first_names = vocabulary['first_names']
        self.last_names = vocabulary['last_names']
        self.streets = vocabulary['streets']

        self.tail_employers = []
        seen = {e['name'] for e in self.employers}
        while len(self.tail_employers) < N_TAIL_EMPLOYERS:
            syllables = rng.choice(vocabulary['tail_syllables'], size=2)
            suffix = _choose(rng, vocabulary['tail_suffixes'])
            name = f"{''.join(syllables).capitalize()} {suffix}"
            if name in seen:
                continue
            seen.add(name)
            self.tail_employers.append({
                'name': name,
                'industry': _choose(rng, INDUSTRIES),
                'premium': float(rng.normal(0, 0.1)),
                'aliases': [],
                'tail': True,
            })

        self.title_by_name = {t['name']: t for t in self.titles}
        self.employer_by_name = {
            e['name']: e for e in self.employers + self.tail_employers
        }

    def person(self, person_id, name=None):
        rng = self.rng
        title = _choose(rng, self.titles, [t['weight'] for t in self.titles])
        if rng.random() < self.config.tail_employer_rate:
            employer = _choose(rng, self.tail_employers)
        else:
            employer = _choose(rng, self.employers, [e['weight'] for e in self.employers])
        location = _choose(rng, self.locations)

        if name is None:
            first = _choose(rng, self.first_names)
            last = _choose(rng, self.last_names)
        else:
            first, last = name
        middle = _choose(rng, self.first_names) if rng.random() < 0.5 else None

        dob = datetime.date(1950, 1, 1) + datetime.timedelta(days=int(rng.integers(0, 18250)))
        z = (
            title['level'] + employer['premium'] + location['effect']
            + rng.normal(0, LOG_INCOME_NOISE)
        )

        return _Person(
            person_id=person_id,
            first=first, middle=middle, last=last,
            street=f"{int(rng.integers(1, 9999))} {_choose(rng, self.streets)}",
            city=location['city'], county=location['county'], state=location['state'],
            zip=f"{location['zip']}{int(rng.integers(0, 100)):02d}",
            dob=dob,
            employer=employer['name'], title=title['name'],
            z=float(z),
        )

    def surface(self, canonical, kind):
        """Canonical string or, at the alias noise rate, one of its aliases."""
        entry = (self.employer_by_name if kind == 'employer' else self.title_by_name)[canonical]
        aliases = entry.get('aliases') or []
        if aliases and self.rng.random() < self.config.alias_noise:
            return _choose(self.rng, aliases)
        return canonical


def _identity(world, person, stated_income):
    return Identity(
        name=Name(first=person.first, middle=person.middle, last=person.last),
        address=Address(
            street=person.street, city=person.city, county=person.county,
            state=person.state, zip=person.zip, country='US',
        ),
        dob=person.dob,
        employer=world.surface(person.employer, 'employer'),
        job_title=world.surface(person.title, 'title'),
        stated_income=stated_income,
        identity_id=person.person_id,
    )


def _government_record(world, person, income, record_id):
    rng = world.rng
    observed = income * np.exp(rng.normal(0, world.config.record_noise))
    bonus = 0.0 if rng.random() < 0.6 else observed * rng.uniform(0.05, 0.15)
    salary = observed - bonus

    if person.middle and rng.random() < 0.5:
        middle = person.middle if rng.random() < 0.5 else person.middle[0]
        name = f'{person.first} {middle} {person.last}'
    else:
        name = f'{person.first} {person.last}'

    location = person.city.upper()
    if rng.random() < 0.5:
        location = f'{location}, {person.state}'

    payload = {
        'name': name,
        'salary': f'${_dollars(salary)}',
        'bonus': f'${_dollars(bonus)}',
        'agency': world.surface(person.employer, 'employer'),
        'location': location,
        'occupation': world.surface(person.title, 'title'),
        'year': '2016',
    }
    document = {'id': record_id, 'source_type': 'government', 'payload': payload}
    return document, _Meta(person.person_id, person.employer, person.title)


def _salary_levels(rng, median):
    base_low = median * rng.uniform(0.65, 0.85)
    base_high = median * rng.uniform(1.25, 1.6)
    return {
        'base_median': median,
        'base_low': base_low,
        'base_high': base_high,
        'total_median': median * rng.uniform(1.05, 1.25),
        'total_low': base_low * rng.uniform(1.0, 1.1),
        'total_high': base_high * rng.uniform(1.1, 1.5),
    }


def _paysite_page(employer, title, city, state, levels, keep):
    def cells(group):
        return ''.join(
            f'<td class="{cls}">{_dollars(levels[f"{group}_{level}"])}</td>'
            for cls, level in (('mean', 'median'), ('min', 'low'), ('max', 'high'))
            if keep[f'{group}_{level}']
        )

    return (
        '<html><body>'
        '<div class="salary-report">'
        f'<h1 class="employer">{html.escape(employer)}</h1>'
        f'<h2 class="title">{html.escape(title)}</h2>'
        f'<span class="location">{html.escape(city)}, {state}</span>'
        '</div>'
        '<table class="compensation">'
        '<tr><th></th><th>Mean</th><th>Min</th><th>Max</th></tr>'
        f'<tr class="base-salary"><th>Base Salary</th>{cells("base")}</tr>'
        f'<tr class="total-compensation"><th>Total Compensation</th>{cells("total")}</tr>'
        '</table>'
        '</body></html>'
    )


def _salaryhub_page(employer, title, levels, keep):
    fields = (
        ('base-median', 'base_median', 'Median base pay'),
        ('base-p10', 'base_low', '10th percentile'),
        ('base-p90', 'base_high', '90th percentile'),
        ('total-median', 'total_median', 'Median total pay'),
    )
    entries = ''.join(
        f'<dt>{label}</dt><dd class="{cls}">${_dollars(levels[attribute])}</dd>'
        for cls, attribute, label in fields if keep[attribute]
    )
    return (
        '<html><body>'
        '<section id="profile">'
        f'<span class="company">{html.escape(employer)}</span>'
        f'<span class="role">{html.escape(title)}</span>'
        '</section>'
        f'<dl class="pay">{entries}</dl>'
        '</body></html>'
    )


def _site_record(world, employer, title, group, record_id):
    rng = world.rng
    incomes = np.array([income for _, income in group])
    median = float(np.median(incomes)) * np.exp(rng.normal(0, world.config.record_noise))
    levels = _salary_levels(rng, median)
    keep = {a: a == 'base_median' or rng.random() >= 0.2 for a in levels}

    city_counts = {}
    for person, _ in group:
        city_counts[(person.city, person.state)] = city_counts.get((person.city, person.state), 0) + 1
    city, state = max(sorted(city_counts), key=lambda k: city_counts[k])

    site_id = _choose(rng, SITE_IDS)
    employer_text = world.surface(employer, 'employer')
    title_text = world.surface(title, 'title')
    if site_id == 'paysite':
        page = _paysite_page(employer_text, title_text, city, state, levels, keep)
    else:
        page = _salaryhub_page(employer_text, title_text, levels, keep)

    document = {
        'id': record_id,
        'source_type': 'salary_site',
        'payload': {'site_id': site_id, 'document': page},
    }
    return document, _Meta(None, employer, title)


def _title_snippet(world, title, incomes, record_id):
    rng = world.rng
    median = float(np.median(incomes)) * np.exp(rng.normal(0, world.config.record_noise))
    levels = _salary_levels(rng, median)
    text = (
        f"The average {world.surface(title, 'title')} salary in the United States "
        f"is ${_dollars(median)}. Most earn from ${_dollars(levels['base_low'])} "
        f"to ${_dollars(levels['base_high'])} per year."
    )
    document = {
        'id': record_id,
        'source_type': 'snippet',
        'payload': {'text': text, 'url': f'https://snippets.example/{record_id}'},
    }
    return document, _Meta(None, None, title)


def _employer_snippet(world, employer, title, incomes, record_id):
    rng = world.rng
    median = float(np.median(incomes)) * np.exp(rng.normal(0, world.config.record_noise))
    text = (
        f"Median {world.surface(title, 'title')} salary at "
        f"{world.surface(employer, 'employer')} is ${_dollars(median)} a year, "
        f"based on reported salaries."
    )
    document = {
        'id': record_id,
        'source_type': 'snippet',
        'payload': {'text': text, 'url': f'https://snippets.example/{record_id}'},
    }
    return document, _Meta(None, employer, title)


def _co_refers(person, meta):
    if meta.person_id is not None:
        return meta.person_id == person.person_id
    if meta.title != person.title:
        return False
    return meta.employer is None or meta.employer == person.employer


@log.log_time('datagen')
def generate_synthetic(config=None):
    """Generate a seeded synthetic world.

    People get incomes from title level, employer premium, location effect
    and noise; train and test incomes are calibrated to their moment
    targets. The corpus holds government records of people, salary site
    pages per (employer, title) and text snippets per title, plus records of
    people outside the datasets that act as distractors.

    Parameters
    ----------
    config : SynthConfig, optional

    Returns
    -------
    SyntheticData
        ``train`` and ``test`` (lists of LabeledExample), ``corpus``
        (SourceCorpus), ``match_labels`` ((identity_id, record_id, label)
        triples) and ``external_corpus`` (DataFrame with job_title,
        employer and stated_income of people outside the datasets).
    """
    if config is None:
        config = SynthConfig()
    config.check()

    vocabulary = load_vocabulary(config.vocabulary_path)
    rng = make_rng(derive_seed(config.seed, 'world'))
    world = _World(config, vocabulary, rng)

    train_people = [world.person(f'train-{i + 1:05d}') for i in range(config.n_rows)]
    test_people = [world.person(f'test-{i + 1:05d}') for i in range(config.test_rows)]
    identities = train_people + test_people

    n_distractors = int(round(config.distractor_ratio * len(identities)))
    distractors = []
    for i in range(n_distractors):
        name = None
        if identities and rng.random() < config.name_twin_rate:
            twin = identities[int(rng.integers(len(identities)))]
            name = (twin.first, twin.last)
        distractors.append(world.person(f'person-{i + 1:06d}', name))

    exact = config.calibrate_moments
    train_incomes, transform = calibrate_moments(
        [p.z for p in train_people], config.income_mean, config.income_stddev, exact
    )
    test_incomes, _ = calibrate_moments(
        [p.z for p in test_people], config.test_mean, config.test_stddev, exact
    )
    p, s, shift = transform
    distractor_incomes = s * np.exp(p * (np.array([d.z for d in distractors]) - shift))

    incomes = {}
    for person, income in zip(
            identities + distractors,
            np.concatenate([train_incomes, test_incomes, distractor_incomes])):
        incomes[person.person_id] = round(max(float(income), 1.0), 2)

    low, high = config.inflation_factor_range

    def examples(people):
        result = []
        inflate = rng.random(len(people)) < config.income_inflation_rate
        factors = rng.uniform(low, high, len(people))
        for person, inflated, factor in zip(people, inflate, factors):
            true_income = Money.from_dollars(incomes[person.person_id])
            stated = true_income * float(factor) if inflated else true_income
            result.append(LabeledExample(_identity(world, person, stated), true_income))
        return result

    train = examples(train_people)
    test = examples(test_people)

    documents = []
    metas = []

    def add(document_meta):
        document, meta = document_meta
        documents.append(document)
        metas.append(meta)

    everyone = identities + distractors
    for person in everyone:
        if rng.random() < config.government_rate:
            add(_government_record(
                world, person, incomes[person.person_id], f'gov-{len(documents) + 1:06d}'
            ))

    groups = {}
    by_title = {}
    for person in everyone:
        groups.setdefault((person.employer, person.title), []).append(
            (person, incomes[person.person_id])
        )
        by_title.setdefault(person.title, []).append(incomes[person.person_id])
    identity_groups = {(p.employer, p.title) for p in identities}

    min_pages, max_pages = config.sources_per_identity
    for key in sorted(groups):
        lower = min_pages if key in identity_groups else 0
        for _ in range(int(rng.integers(lower, max_pages + 1))):
            add(_site_record(world, *key, groups[key], f'site-{len(documents) + 1:06d}'))
        if rng.random() < config.snippet_rate / 2:
            group_incomes = [income for _, income in groups[key]]
            add(_employer_snippet(
                world, *key, group_incomes, f'snip-{len(documents) + 1:06d}'
            ))

    for title in sorted(by_title):
        if rng.random() < config.snippet_rate:
            add(_title_snippet(
                world, title, by_title[title], f'snip-{len(documents) + 1:06d}'
            ))

    corpus = SourceCorpus(documents)
    match_labels = _match_labels(rng, identities, documents, metas, config.labeled_negatives)

    external_corpus = pd.DataFrame({
        'job_title': [world.surface(d.title, 'title') for d in distractors],
        'employer': [world.surface(d.employer, 'employer') for d in distractors],
        'stated_income': [incomes[d.person_id] for d in distractors],
    })

    logger.info(
        f'Generated {len(train)} train and {len(test)} test examples, '
        f'{len(corpus)} corpus records {corpus.count_by_type()} and '
        f'{len(match_labels)} labeled pairs.'
    )

    return SyntheticData(train, test, corpus, match_labels, external_corpus)


def _match_labels(rng, identities, documents, metas, n_negatives):
    by_title = {}
    by_employer = {}
    by_name = {}
    people = {}
    for i, meta in enumerate(metas):
        by_title.setdefault(meta.title, []).append(i)
        if meta.employer is not None:
            by_employer.setdefault(meta.employer, []).append(i)
    for person in identities:
        people[person.person_id] = person
    name_of = {}
    for i, document in enumerate(documents):
        if document['source_type'] == 'government':
            tokens = document['payload']['name'].split()
            name_of[i] = (tokens[0], tokens[-1])
            by_name.setdefault(name_of[i], []).append(i)

    labels = []
    for person in identities:
        related = sorted(set(
            by_title.get(person.title, [])
            + by_employer.get(person.employer, [])
            + by_name.get((person.first, person.last), [])
        ))
        positives = [i for i in related if _co_refers(person, metas[i])]
        negatives = [i for i in related if not _co_refers(person, metas[i])]

        if len(negatives) > n_negatives:
            negatives = sorted(rng.choice(negatives, size=n_negatives, replace=False))

        for i in positives:
            labels.append((person.person_id, documents[i]['id'], 1))
        for i in negatives:
            labels.append((person.person_id, documents[int(i)]['id'], 0))

    return labels


def write_synthetic(data, out_dir):
    """Write synthetic data to ``out_dir``.

    Files: ``train.csv``, ``test.csv``, ``corpus/corpus.jsonl``,
    ``match_labels.csv`` and ``external_corpus.csv``.

    Returns
    -------
    dict
        Output name -> path.
    """
    out_dir = Path(out_dir)
    (out_dir / 'corpus').mkdir(parents=True, exist_ok=True)

    paths = {
        'train': out_dir / 'train.csv',
        'test': out_dir / 'test.csv',
        'corpus': out_dir / 'corpus' / 'corpus.jsonl',
        'match_labels': out_dir / 'match_labels.csv',
        'external_corpus': out_dir / 'external_corpus.csv',
    }
    write_examples(data.train, paths['train'])
    write_examples(data.test, paths['test'])
    write_corpus(data.corpus, paths['corpus'])
    write_match_labels(data.match_labels, paths['match_labels'])
    data.external_corpus.to_csv(paths['external_corpus'], index=False, float_format='%.2f')

    return paths
