import json
from pathlib import Path

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import CorpusError
from IncomeVerification.extract.attributes import SOURCE_TYPES


__all__ = ['SourceCorpus', 'CorpusIssue', 'load_corpus', 'write_corpus', 'parse_corpus_file']


logger = log.get_logger('datagen')

CORPUS_SUFFIXES = ('.jsonl',)


class CorpusIssue(tuple):
    """(file, line, message) of a malformed corpus line."""

    __slots__ = ()

    def __new__(cls, file, line, message):
        return super().__new__(cls, (str(file), int(line), str(message)))

    @property
    def file(self):
        return self[0]

    @property
    def line(self):
        return self[1]

    @property
    def message(self):
        return self[2]


class SourceCorpus():
    """Raw source documents keyed by unique id.

    Parameters
    ----------
    records : list of dict
        ``{"id", "source_type", "payload"}`` documents.
    errors : list of CorpusIssue, optional
        Malformed lines met while loading.

    Raises
    ------
    CorpusError
        On duplicate ids or unknown source types.
    """

    def __init__(self, records=(), errors=()):
        self._records = {}
        self._origin = {}
        for record in records:
            self.add(record)
        self.errors = list(errors)

    def add(self, record, origin=None):
        record_id = record['id']
        if record_id in self._records:
            raise CorpusError(
                f"Duplicate record id {record_id!r} in {self._origin.get(record_id)} "
                f"and {origin}."
            )
        if record['source_type'] not in SOURCE_TYPES:
            raise CorpusError(
                f"Record {record_id!r} has unknown source type "
                f"{record['source_type']!r}."
            )
        self._records[record_id] = record
        self._origin[record_id] = origin

    @property
    def ids(self):
        return sorted(self._records)

    @property
    def records(self):
        """list of dict: Documents sorted by id."""
        return [self._records[record_id] for record_id in self.ids]

    def __getitem__(self, record_id):
        return self._records[record_id]

    def __contains__(self, record_id):
        return record_id in self._records

    def __len__(self):
        return len(self._records)

    def __iter__(self):
        return iter(self.records)

    def count_by_type(self):
        counts = dict.fromkeys(SOURCE_TYPES, 0)
        for record in self._records.values():
            counts[record['source_type']] += 1
        return counts

    def __repr__(self):
        return f'SourceCorpus({self.count_by_type()})'


def parse_corpus_file(path):
    """Parse one JSON Lines corpus file.

    Returns
    -------
    records : list of dict
    errors : list of CorpusIssue
    """
    records = []
    errors = []
    with open(path, 'rb') as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line.decode('utf-8'))
                if not isinstance(record, dict):
                    raise ValueError('record is not an object')
                missing = [k for k in ('id', 'source_type', 'payload') if k not in record]
                if missing:
                    raise ValueError(f'missing keys {missing}')
                if record['source_type'] not in SOURCE_TYPES:
                    raise ValueError(f"unknown source type {record['source_type']!r}")
                record['id'] = str(record['id'])
            except ValueError as e:
                errors.append(CorpusIssue(path, line_number, e))
                continue
            records.append(record)

    return records, errors


def load_corpus(dir_path, backend=None):
    """Load every ``*.jsonl`` file of a corpus directory.

    Parameters
    ----------
    dir_path : str or pathlib.Path
        Directory (or a single file).
    backend : ParallelizationBackendBase, optional
        Parses files in parallel; results are merged in file name order.

    Returns
    -------
    SourceCorpus
        Malformed lines are listed in ``errors``.

    Raises
    ------
    CorpusError
        If an id occurs twice; the message names both files.
    """
    dir_path = Path(dir_path)
    if dir_path.is_file():
        files = [dir_path]
    else:
        files = sorted(p for p in dir_path.iterdir() if p.suffix in CORPUS_SUFFIXES)

    if backend is None:
        parsed = [parse_corpus_file(f) for f in files]
    else:
        parsed = backend.evaluate(parse_corpus_file, files)

    corpus = SourceCorpus()
    for path, (records, errors) in zip(files, parsed):
        for record in records:
            corpus.add(record, origin=path.name)
        corpus.errors += errors

    for issue in corpus.errors:
        logger.warning(f'{issue.file}:{issue.line}: {issue.message}')
    logger.info(
        f'Loaded {len(corpus)} records from {len(files)} files '
        f'({len(corpus.errors)} malformed lines).'
    )

    return corpus


def write_corpus(corpus, path):
    """Write a corpus as JSON Lines sorted by id."""
    with open(path, 'w', encoding='utf-8') as handle:
        for record in corpus.records:
            handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + '\n')
