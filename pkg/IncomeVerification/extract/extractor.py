from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError, ExtractionError
from .attributes import SourceRecord
from .pattern import extract_pattern, default_patterns
from .structured import extract_structured
from .wrapper import extract_wrapper, default_path_specs


__all__ = ['extract_record', 'extract_corpus']


logger = log.get_logger('extract')


def extract_record(raw_document, path_specs=None, patterns=None):
    """Extract a ``SourceRecord`` from a raw corpus document.

    Dispatches on ``source_type``: government payloads go to
    ``extract_structured``, salary site payloads to ``extract_wrapper`` and
    snippets to ``extract_pattern``.

    Parameters
    ----------
    raw_document : dict
        ``{"id", "source_type", "payload"}``.
    path_specs : dict, optional
        site id -> PathSpec. Defaults to the shipped specs.
    patterns : list of PatternRule, optional
        Defaults to the shipped list.

    Returns
    -------
    SourceRecord
        Discardable if nothing usable could be extracted.

    Raises
    ------
    ConfigurationError
        If no path spec exists for a salary site.
    ExtractionError
        If a salary site document is malformed.
    """
    record_id = raw_document['id']
    source_type = raw_document['source_type']
    payload = raw_document['payload']

    if source_type == 'government':
        return extract_structured(payload, record_id=record_id)

    if source_type == 'salary_site':
        if path_specs is None:
            path_specs = default_path_specs()
        site_id = payload.get('site_id')
        try:
            path_spec = path_specs[site_id]
        except KeyError:
            raise ConfigurationError(f"No path spec for site {site_id!r}.")
        return extract_wrapper(payload.get('document'), path_spec, record_id=record_id)

    if source_type == 'snippet':
        record = extract_pattern(payload.get('text'), patterns, record_id=record_id)
        if record is None:
            record = SourceRecord(
                record_id=record_id,
                source_type='snippet',
                discard_reason='no pattern matched',
            )
        return record

    raise ConfigurationError(f"Unknown source type {source_type!r}.")


def extract_corpus(documents, path_specs=None, patterns=None):
    """Extract all documents, keeping usable records only.

    Malformed documents are logged and skipped.

    Returns
    -------
    records : dict
        record id -> SourceRecord, usable records only.
    discarded : dict
        record id -> reason.
    """
    if path_specs is None:
        path_specs = default_path_specs()
    if patterns is None:
        patterns = default_patterns()

    records = {}
    discarded = {}
    for document in documents:
        try:
            record = extract_record(document, path_specs, patterns)
        except ExtractionError as e:
            discarded[document['id']] = str(e)
            logger.warning(f"{document['id']}: {e}")
            continue

        if record.is_discardable:
            discarded[record.record_id] = record.discard_reason
        else:
            records[record.record_id] = record

    logger.info(
        f'Extracted {len(records)} records, discarded {len(discarded)}.'
    )

    return records, discarded
