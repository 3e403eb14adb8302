import json
from pathlib import Path

import numpy as np

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ContractViolation
)
from IncomeVerification.dataStructure import dumps
from IncomeVerification.core.identity import identity_to_dict
from IncomeVerification.core.money import to_dollars
from IncomeVerification.core.rng import derive_seed, make_rng
from IncomeVerification.canon import canonicalize, default_alias_table
from IncomeVerification.retrieval import (
    CorpusIndex, default_industry_table, infer_industry, retrieve_candidates
)
from IncomeVerification.extract import SourceRecord, extract_corpus
from IncomeVerification.match import (
    PairDecisionTree, build_match_features, evaluate_matcher, score_pair,
    train_matcher,
)
from IncomeVerification.extfeat import (
    EXTERNAL_DIM, RatioTable, build_external_features, build_ratio_table,
    impute_attributes, select_columns, unified_salary_range,
)
from IncomeVerification.learners import GBTEnsemble, gbt_train
from .cache import ResultsCache
from .config import MatcherConfig, RetrievalConfig, RunConfig
from .parallelizationBackend import SequentialBackend


__all__ = [
    'ExternalResources', 'ExternalModel', 'train_external',
    'match_training_pairs', 'fit_matcher', 'split_examples',
]


logger = log.get_logger('pipeline')

MODEL_FORMAT = 'external-model'
MODEL_VERSION = 2
RESOURCES_FORMAT = 'external-resources'
RESOURCES_VERSION = 1


def _cache_key(identity):
    data = identity_to_dict(identity)
    data.pop('stated_income')
    data.pop('identity_id')
    return dumps(data)


def split_examples(examples):
    """Split examples into those with and without a stated income."""
    usable = [e for e in examples if e.identity.stated_income is not None]
    return usable, len(examples) - len(usable)


class ExternalResources():
    """Everything needed to turn an identity into external features.

    Holds the corpus index, the extracted corpus records, the reference
    tables, the matcher tree and the industry ratio table. Matched and
    imputed sources are cached per identity.

    Parameters
    ----------
    index : CorpusIndex
    records : dict
        Record id -> usable SourceRecord.
    matcher : PairDecisionTree
    ratio_table : RatioTable
    industry_table : IndustryTable, optional
    alias_table : AliasTable, optional
    retrieval : RetrievalConfig, optional
    matcher_config : MatcherConfig, optional
    cache : ResultsCache, optional
    """

    def __init__(
            self, index, records, matcher, ratio_table,
            industry_table=None, alias_table=None,
            retrieval=None, matcher_config=None, cache=None):
        self.index = index
        self.records = records
        self.matcher = matcher
        self.ratio_table = ratio_table
        if industry_table is None:
            industry_table = default_industry_table()
        self.industry_table = industry_table
        if alias_table is None:
            alias_table = default_alias_table()
        self.alias_table = alias_table
        self.retrieval = retrieval or RetrievalConfig()
        self.matcher_config = matcher_config or MatcherConfig()
        if cache is None:
            cache = ResultsCache()
        self.cache = cache

    @classmethod
    def build(
            cls, corpus, matcher, config=None, index=None,
            industry_table=None, alias_table=None, path_specs=None, patterns=None):
        """Index and extract a corpus and build the ratio table.

        Parameters
        ----------
        corpus : SourceCorpus
        matcher : PairDecisionTree
        config : RunConfig, optional
        index : CorpusIndex, optional
            Prebuilt index; built from ``corpus`` if not set.
        industry_table, alias_table : optional
            Shipped tables if not set.
        path_specs, patterns : optional
            Extraction rules; shipped rules if not set.

        Returns
        -------
        ExternalResources
        """
        config = config or RunConfig()
        if industry_table is None:
            industry_table = default_industry_table()
        if alias_table is None:
            alias_table = default_alias_table()

        if index is None:
            index = CorpusIndex.from_documents(
                corpus.records, k1=config.retrieval.k1, b=config.retrieval.b
            )
        records, _ = extract_corpus(corpus.records, path_specs, patterns)
        ratio_table = build_ratio_table(
            list(records.values()), industry_table, alias_table
        )

        return cls(
            index, records, matcher, ratio_table,
            industry_table=industry_table, alias_table=alias_table,
            retrieval=config.retrieval, matcher_config=config.matcher_config,
            cache=ResultsCache(use_diskcache=config.use_diskcache),
        )

    def with_index(self, index):
        """Copy sharing records, matcher and tables, searching ``index``.

        The copy starts with an empty source cache.
        """
        return type(self)(
            index, self.records, self.matcher, self.ratio_table,
            industry_table=self.industry_table, alias_table=self.alias_table,
            retrieval=self.retrieval, matcher_config=self.matcher_config,
            cache=ResultsCache(use_diskcache=self.cache.use_diskcache),
        )

    def canonical(self, identity):
        """Identity with canonical employer and job title."""
        return identity.replace(
            employer=canonicalize(identity.employer, 'employer', self.alias_table),
            job_title=canonicalize(identity.job_title, 'title', self.alias_table),
        )

    def record_industry(self, record, fallback=None):
        employer = record.employer
        if not employer:
            return fallback
        employer = canonicalize(employer, 'employer', self.alias_table)
        return infer_industry(employer, self.industry_table)

    def compute_sources(self, identity):
        """Retrieve, match and impute the sources of one identity.

        Returns
        -------
        matches : list of MatchResult
            One per retrieved usable record, in retrieval order.
        attributes : dict
            Record id -> imputed SalaryAttributes, or None if the source is
            discarded.
        """
        canonical = self.canonical(identity)
        industry = infer_industry(canonical.employer, self.industry_table)
        candidates = retrieve_candidates(
            canonical, self.index, self.industry_table,
            per_query_k=self.retrieval.per_query_k, limit=self.retrieval.limit,
        )

        config = self.matcher_config
        matches = []
        attributes = {}
        for record_id in candidates:
            record = self.records.get(record_id)
            if record is None:
                continue
            features = build_match_features(
                canonical, record, self.industry_table, self.alias_table,
                config.initial_factor, config.conflict_factor,
            )
            matches.append(
                score_pair(
                    self.matcher, features, record_id, config.high, config.medium
                )
            )
            attributes[record_id] = impute_attributes(
                record.attributes, self.record_industry(record, industry),
                self.ratio_table,
            )

        logger.debug(
            f'{identity.identity_id}: {len(candidates)} candidates, '
            f'{len(matches)} matched sources.'
        )

        return matches, attributes

    def sources(self, identity):
        """Cached ``compute_sources``."""
        return self.cache.memoize(
            ('sources', _cache_key(identity)), self.compute_sources, identity,
            tag='sources',
        )

    def prefetch(self, identities, backend=None):
        """Fill the source cache for identities, in parallel if requested."""
        if backend is None or isinstance(backend, SequentialBackend):
            for identity in identities:
                self.sources(identity)
            return

        pending = {}
        for identity in identities:
            key = ('sources', _cache_key(identity))
            if key not in self.cache and key not in pending:
                pending[key] = identity
        keys = list(pending)
        results = backend.evaluate(self.compute_sources, [pending[k] for k in keys])
        for key, result in zip(keys, results):
            self.cache.set(key, result, tag='sources')

    def features(self, identity, top_k=None):
        """External feature vector of an identity with a stated income."""
        matches, attributes = self.sources(identity)
        top_k = self.retrieval.top_k if top_k is None else top_k
        return build_external_features(
            identity.stated_income, matches, attributes, top_k=top_k
        )

    def feature_matrix(self, identities, top_k=None, backend=None):
        """Stack external feature vectors, shape (n, 35)."""
        self.prefetch(identities, backend)
        if len(identities) == 0:
            return np.zeros((0, EXTERNAL_DIM))
        return np.vstack([
            np.asarray(self.features(identity, top_k)) for identity in identities
        ])

    def salary_range(self, identity, buckets=('high', 'medium')):
        """Weighted salary range of the matched sources of an identity."""
        matches, attributes = self.sources(identity)
        imputed = {}
        for match in matches:
            values = attributes.get(match.record_id)
            if values is None:
                continue
            record = self.records[match.record_id]
            imputed[match.record_id] = SourceRecord(
                record_id=record.record_id,
                source_type=record.source_type,
                identity_fragment=record.identity_fragment,
                attributes=values,
                trust_weight=record.trust_weight,
            )
        return unified_salary_range(imputed, matches, buckets)

    def save(self, directory):
        """Write index, records, matcher and ratio table into ``directory``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.index.save(directory / 'index.json')
        self.matcher.save(directory / 'matcher.json')
        self.ratio_table.save(directory / 'ratio_table.json')
        with open(directory / 'records.jsonl', 'w', encoding='utf-8') as handle:
            for record_id in sorted(self.records):
                handle.write(dumps(self.records[record_id].to_dict()) + '\n')

        header = {
            'format': RESOURCES_FORMAT,
            'version': RESOURCES_VERSION,
            'retrieval': self.retrieval.to_dict(),
            'matcher_config': self.matcher_config.to_dict(),
        }
        (directory / 'resources.json').write_text(dumps(header, indent=2))

    @classmethod
    def load(cls, directory, industry_table=None, alias_table=None, cache=None):
        directory = Path(directory)
        header = json.loads((directory / 'resources.json').read_text())
        if header.get('format') != RESOURCES_FORMAT \
                or header.get('version') != RESOURCES_VERSION:
            raise ConfigurationError(
                f"Unsupported resources format {header.get('format')!r} "
                f"version {header.get('version')!r} in {directory}."
            )

        records = {}
        with open(directory / 'records.jsonl', encoding='utf-8') as handle:
            for line in handle:
                if line.strip():
                    record = SourceRecord.from_dict(json.loads(line))
                    records[record.record_id] = record

        return cls(
            CorpusIndex.load(directory / 'index.json'),
            records,
            PairDecisionTree.load(directory / 'matcher.json'),
            RatioTable.load(directory / 'ratio_table.json'),
            industry_table=industry_table, alias_table=alias_table,
            retrieval=RetrievalConfig(**header['retrieval']),
            matcher_config=MatcherConfig(**header['matcher_config']),
            cache=cache,
        )


class ExternalModel():
    """Gradient boosting over the external feature vector.

    The ensemble predicts the true income in dollars from the stated income
    ratios and match scores of the top sources.

    Parameters
    ----------
    resources : ExternalResources
    ensemble : GBTEnsemble
    top_k : int, optional
        Source slots in use.
    drop_groups : tuple of str, optional
        Salary groups left out of the model input.
    """

    def __init__(self, resources, ensemble, top_k=5, drop_groups=()):
        self.resources = resources
        self.ensemble = ensemble
        self.top_k = int(top_k)
        self.drop_groups = tuple(drop_groups)
        self.columns = select_columns(self.drop_groups, self.top_k)
        if ensemble.n_features != len(self.columns):
            raise ContractViolation(
                f"Ensemble expects {ensemble.n_features} inputs, feature "
                f"selection has {len(self.columns)}."
            )

    def predict(self, identities, backend=None):
        """Predicted incomes in dollars; every identity needs a stated income."""
        missing = [i.identity_id for i in identities if i.stated_income is None]
        if missing:
            raise ContractViolation(
                f"External predictions require a stated income, missing for {missing}."
            )
        if len(identities) == 0:
            return np.zeros(0)

        F = self.resources.feature_matrix(identities, self.top_k, backend)
        return self.ensemble.predict(F[:, self.columns])

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.ensemble.save(directory / 'ensemble.json')
        header = {
            'format': MODEL_FORMAT,
            'version': MODEL_VERSION,
            'top_k': self.top_k,
            'drop_groups': list(self.drop_groups),
        }
        (directory / 'model.json').write_text(dumps(header, indent=2))

    @classmethod
    def load(cls, directory, resources):
        directory = Path(directory)
        header = json.loads((directory / 'model.json').read_text())
        if header.get('format') != MODEL_FORMAT \
                or header.get('version') != MODEL_VERSION:
            raise ConfigurationError(
                f"Unsupported model format {header.get('format')!r} "
                f"version {header.get('version')!r} in {directory}."
            )
        return cls(
            resources, GBTEnsemble.load(directory / 'ensemble.json'),
            header['top_k'], header['drop_groups'],
        )

    def __repr__(self):
        return f'ExternalModel(top_k={self.top_k}, drop_groups={self.drop_groups})'


@log.log_time('pipeline')
def train_external(
        train_set, resources, config=None, seed=0, backend=None,
        top_k=None, drop_groups=()):
    """Train the external model.

    Per identity: retrieve, extract, match, impute and build the 35-vector;
    the ensemble is fit on (vector, true income).

    Parameters
    ----------
    train_set : list of LabeledExample
    resources : ExternalResources
    config : RunConfig, optional
        ``external_gbt`` holds the ensemble hyperparameters.
    seed : int, optional
        Unused; boosting is deterministic.
    backend : ParallelizationBackendBase, optional
    top_k : int, optional
        Defaults to ``config.retrieval.top_k``.
    drop_groups : tuple of str, optional

    Returns
    -------
    ExternalModel

    Raises
    ------
    ContractViolation
        If no example has a stated income.
    """
    config = config or RunConfig()
    top_k = config.retrieval.top_k if top_k is None else top_k

    usable, n_excluded = split_examples(train_set)
    if n_excluded:
        logger.warning(f'Excluded {n_excluded} examples without stated income.')
    if not usable:
        raise ContractViolation("No training example has a stated income.")

    identities = [e.identity for e in usable]
    F = resources.feature_matrix(identities, top_k, backend)
    columns = select_columns(drop_groups, top_k)
    target = to_dollars([e.true_income for e in usable])

    ensemble = gbt_train(F[:, columns], target, **config.external_gbt.kwargs())
    logger.info(
        f'Trained external model on {len(usable)} examples '
        f'(top_k={top_k}, dropped {list(drop_groups)}).'
    )

    return ExternalModel(resources, ensemble, top_k, drop_groups)


def match_training_pairs(labels, identities, records, industry_table=None,
                         alias_table=None, matcher_config=None):
    """Match features of labeled identity/record pairs.

    Pairs naming an unknown identity or an unusable record are skipped.

    Parameters
    ----------
    labels : list of (identity_id, record_id, label)
    identities : dict
        Identity id -> Identity.
    records : dict
        Record id -> SourceRecord.

    Returns
    -------
    list of (MatchFeatures, int)
    """
    if industry_table is None:
        industry_table = default_industry_table()
    if alias_table is None:
        alias_table = default_alias_table()
    config = matcher_config or MatcherConfig()

    pairs = []
    skipped = 0
    for identity_id, record_id, label in labels:
        identity = identities.get(identity_id)
        record = records.get(record_id)
        if identity is None or record is None:
            skipped += 1
            continue
        canonical = identity.replace(
            employer=canonicalize(identity.employer, 'employer', alias_table),
            job_title=canonicalize(identity.job_title, 'title', alias_table),
        )
        features = build_match_features(
            canonical, record, industry_table, alias_table,
            config.initial_factor, config.conflict_factor,
        )
        pairs.append((features, int(label)))

    if skipped:
        logger.warning(f'Skipped {skipped} labeled pairs with unknown ids.')

    return pairs


def fit_matcher(pairs, matcher_config=None, seed=0):
    """Train the matcher on part of the labeled pairs and score the rest.

    Parameters
    ----------
    pairs : list of (MatchFeatures, int)
    matcher_config : MatcherConfig, optional
        ``holdout`` is the held-out fraction.
    seed : int, optional

    Returns
    -------
    tree : PairDecisionTree
        Trained on the training part.
    metrics : dict
        Precision, recall, F1 and size of the held-out part; empty if
        nothing is held out.
    """
    config = matcher_config or MatcherConfig()
    order = make_rng(derive_seed(seed, 'matcher-holdout')).permutation(len(pairs))
    n_holdout = int(round(config.holdout * len(pairs)))
    held_out = [pairs[i] for i in sorted(order[:n_holdout])]
    training = [pairs[i] for i in sorted(order[n_holdout:])]

    tree = train_matcher(training, max_depth=config.max_depth, min_leaf=config.min_leaf)
    metrics = evaluate_matcher(tree, held_out) if held_out else {}
    if metrics:
        logger.info(
            f"Matcher held-out precision {metrics['precision']:.3f}, "
            f"recall {metrics['recall']:.3f}, F1 {metrics['f1']:.3f}."
        )

    return tree, metrics
