from collections import namedtuple

from IncomeVerification import log
from .corpusIndex import search
from .industry import infer_industry
from .query import build_queries, TIERS


__all__ = ['Candidate', 'retrieve_candidates']


logger = log.get_logger('retrieval')

Candidate = namedtuple('Candidate', ['record_id', 'tier', 'score'])


def retrieve_candidates(
        identity, index, industry_table, per_query_k=10, limit=50,
        with_provenance=False):
    """Run the salary queries of an identity and merge their results.

    Parameters
    ----------
    identity : Identity
        Canonicalized identity.
    index : CorpusIndex
    industry_table : IndustryTable
    per_query_k : int, optional
        Results consumed per query. The default is 10.
    limit : int, optional
        Maximum number of candidates. The default is 50.
    with_provenance : bool, optional
        If True, return ``Candidate`` tuples instead of record ids.

    Returns
    -------
    list
        Record ids (or Candidates), each record once, attributed to the first
        tier that found it; ordered by tier, descending score and record id.
    """
    industry = infer_industry(identity.employer, industry_table)

    best = {}
    for query in build_queries(identity, industry):
        for record_id, score in search(index, query, per_query_k):
            if record_id not in best:
                best[record_id] = Candidate(record_id, query.tier, score)

    candidates = sorted(
        best.values(),
        key=lambda c: (TIERS.index(c.tier), -c.score, c.record_id)
    )[:limit]

    logger.debug(
        f'{len(candidates)} candidates for {identity.employer!r} / '
        f'{identity.job_title!r}.'
    )

    if with_provenance:
        return candidates

    return [c.record_id for c in candidates]
