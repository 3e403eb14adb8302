from collections import Counter
import json
from pathlib import Path

from bs4 import BeautifulSoup
import numpy as np

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError
from IncomeVerification.dataStructure import dumps
from .query import tokenize


__all__ = ['CorpusIndex', 'search', 'document_text', 'bm25_scores']


INDEX_FORMAT = 'corpus-index'
INDEX_VERSION = 1

logger = log.get_logger('retrieval')


def document_text(document):
    """Return the searchable text of a raw corpus document.

    Parameters
    ----------
    document : dict
        ``{"id", "source_type", "payload"}``.

    Returns
    -------
    str
    """
    payload = document['payload']
    source_type = document['source_type']

    if source_type == 'government':
        fields = ('name', 'agency', 'location', 'occupation', 'year')
        parts = [str(payload.get(field) or '') for field in fields]
        return ' '.join(parts + ['salary'])
    elif source_type == 'salary_site':
        soup = BeautifulSoup(payload.get('document') or '', 'html.parser')
        return soup.get_text(' ') + ' salary'
    elif source_type == 'snippet':
        return payload.get('text') or ''

    raise ConfigurationError(f"Unknown source type {source_type!r}.")


class CorpusIndex():
    """Inverted index with BM25 ranking.

    Records are addressed internally by their position in the sorted list of
    record ids, so posting lists are sorted by record id.

    Attributes
    ----------
    record_ids : list of str
        Sorted record ids.
    postings : dict
        token -> (positions, term frequencies), both int arrays.
    doc_lengths : np.ndarray
        Number of tokens per record.
    k1 : float
    b : float
    """

    def __init__(self, record_ids, postings, doc_lengths, k1=1.2, b=0.75):
        self.record_ids = list(record_ids)
        self.postings = postings
        self.doc_lengths = np.asarray(doc_lengths, dtype=np.float64)
        self.k1 = k1
        self.b = b

    @classmethod
    def build(cls, texts, k1=1.2, b=0.75):
        """Index texts.

        Parameters
        ----------
        texts : dict
            record id -> text.

        Returns
        -------
        CorpusIndex
        """
        record_ids = sorted(texts)
        doc_lengths = np.zeros(len(record_ids))
        postings = {}

        for position, record_id in enumerate(record_ids):
            counts = Counter(tokenize(texts[record_id]))
            doc_lengths[position] = sum(counts.values())
            for token, tf in counts.items():
                postings.setdefault(token, ([], []))
                postings[token][0].append(position)
                postings[token][1].append(tf)

        postings = {
            token: (np.array(pos, dtype=np.int64), np.array(tf, dtype=np.float64))
            for token, (pos, tf) in postings.items()
        }

        logger.info(f'Indexed {len(record_ids)} records, {len(postings)} tokens.')

        return cls(record_ids, postings, doc_lengths, k1=k1, b=b)

    @classmethod
    def from_documents(cls, documents, k1=1.2, b=0.75):
        """Index raw corpus documents (see ``document_text``)."""
        return cls.build(
            {doc['id']: document_text(doc) for doc in documents}, k1=k1, b=b
        )

    @property
    def n_records(self):
        return len(self.record_ids)

    @property
    def avg_length(self):
        if self.n_records == 0:
            return 0.0
        return float(np.mean(self.doc_lengths))

    def document_frequency(self, token):
        try:
            return len(self.postings[token][0])
        except KeyError:
            return 0

    def idf(self, token):
        """BM25 inverse document frequency, ln((N − df + 0.5)/(df + 0.5) + 1)."""
        df = self.document_frequency(token)
        return float(np.log((self.n_records - df + 0.5) / (df + 0.5) + 1))

    def scores(self, query_text):
        """Return BM25 scores of all records for a query text.

        Repeated query tokens count once.
        """
        scores = np.zeros(self.n_records)
        if self.n_records == 0:
            return scores

        avg_length = self.avg_length or 1.0
        for token in sorted(set(tokenize(query_text))):
            try:
                positions, tf = self.postings[token]
            except KeyError:
                continue
            norm = self.k1 * (1 - self.b + self.b * self.doc_lengths[positions] / avg_length)
            scores[positions] += self.idf(token) * tf * (self.k1 + 1) / (tf + norm)

        return scores

    def to_dict(self):
        return {
            'format': INDEX_FORMAT,
            'version': INDEX_VERSION,
            'k1': self.k1,
            'b': self.b,
            'record_ids': self.record_ids,
            'doc_lengths': self.doc_lengths.astype(int).tolist(),
            'postings': {
                token: [pos.tolist(), tf.astype(int).tolist()]
                for token, (pos, tf) in sorted(self.postings.items())
            },
        }

    @classmethod
    def from_dict(cls, data):
        if data.get('format') != INDEX_FORMAT or data.get('version') != INDEX_VERSION:
            raise ConfigurationError(
                f"Unsupported index format {data.get('format')!r} "
                f"version {data.get('version')!r}."
            )
        postings = {
            token: (np.array(pos, dtype=np.int64), np.array(tf, dtype=np.float64))
            for token, (pos, tf) in data['postings'].items()
        }
        return cls(
            data['record_ids'], postings, data['doc_lengths'],
            k1=data['k1'], b=data['b'],
        )

    def save(self, path):
        Path(path).write_text(dumps(self.to_dict()), encoding='utf-8')

    @classmethod
    def load(cls, path):
        with open(path, encoding='utf-8') as f:
            return cls.from_dict(json.load(f))


def bm25_scores(index, query):
    """Return BM25 scores of all records for a ``Query``."""
    return index.scores(query.text)


def search(index, query, k):
    """Return the top-k records of a query.

    Parameters
    ----------
    index : CorpusIndex
    query : Query or str
    k : int
        Number of results, k >= 1.

    Returns
    -------
    list of (str, float)
        (record id, score), by descending score; ties by ascending record id.
        Records without any query token are never returned.
    """
    if k < 1:
        raise ValueError("k must be >= 1.")

    text = query if isinstance(query, str) else query.text
    scores = index.scores(text)
    hits = np.flatnonzero(scores > 0)
    if len(hits) == 0:
        return []

    # positions are in record-id order, so a stable sort on -score breaks ties
    order = hits[np.argsort(-scores[hits], kind='stable')][:k]

    return [(index.record_ids[i], float(scores[i])) for i in order]
