import json
from pathlib import Path

from bs4 import BeautifulSoup
from bs4.element import Tag

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ExtractionError
)
from IncomeVerification.dataStructure import Structure, NonEmptyString, Dict
from .attributes import ATTRIBUTES, SalaryAttributes, SourceRecord, parse_money_text
from .fragments import parse_location


__all__ = [
    'FRAGMENT_FIELDS', 'PathSpec', 'load_path_specs', 'default_path_specs',
    'extract_wrapper', 'DEFAULT_PATH_SPECS',
]


DEFAULT_PATH_SPECS = Path(__file__).parent.parent / 'data' / 'path_specs.json'

FRAGMENT_FIELDS = ('employer', 'occupation', 'location', 'year')

logger = log.get_logger('extract')


class PathSpec(Structure):
    """Paths (CSS selectors) of one salary site.

    Attributes
    ----------
    site_id : str
    paths : dict
        Salary attribute or fragment field -> selector. Each selector must
        resolve to at most one node of a document.
    """

    site_id = NonEmptyString()
    paths = Dict(default={})

    _parameters = ['site_id', 'paths']

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        unknown = set(self.paths) - set(ATTRIBUTES) - set(FRAGMENT_FIELDS)
        if unknown:
            raise ConfigurationError(
                f"Path spec {self.site_id!r} has unknown fields {sorted(unknown)}."
            )


def load_path_specs(path=None):
    """Load path specs from JSON ``{site_id: {field: selector}}``.

    Returns
    -------
    dict
        site id -> PathSpec
    """
    path = Path(path) if path is not None else DEFAULT_PATH_SPECS
    with open(path, encoding='utf-8') as f:
        data = json.load(f)

    return {
        site_id: PathSpec(site_id=site_id, paths=paths)
        for site_id, paths in sorted(data.items())
    }


_default_specs = None


def default_path_specs():
    """Return the shipped path specs (loaded once)."""
    global _default_specs
    if _default_specs is None:
        _default_specs = load_path_specs()
    return _default_specs


def _resolve(soup, selector, site_id):
    nodes = soup.select(selector)
    if len(nodes) > 1:
        raise ExtractionError(
            f"Site {site_id!r}: path {selector!r} resolves to {len(nodes)} nodes."
        )
    if not nodes:
        return None

    text = ' '.join(nodes[0].get_text(' ').split())
    return text or None


def extract_wrapper(document, path_spec, record_id='wrapper'):
    """Read salary attributes from a tree-structured document.

    Parameters
    ----------
    document : str
        Markup of the salary page.
    path_spec : PathSpec
    record_id : str, optional

    Returns
    -------
    SourceRecord
        Attributes whose path is missing from the document stay absent; a
        record without attributes is discardable.

    Raises
    ------
    ExtractionError
        If the document is not markup or a path resolves to several nodes.
    """
    site_id = path_spec.site_id
    if not isinstance(document, str):
        raise ExtractionError(f"Site {site_id!r}: document is not text.")

    soup = BeautifulSoup(document, 'html.parser')
    if document.strip() and soup.find(lambda node: isinstance(node, Tag)) is None:
        raise ExtractionError(f"Site {site_id!r}: document does not parse as a tree.")

    values = {}
    fragment = {'site_id': site_id}
    for field, selector in sorted(path_spec.paths.items()):
        text = _resolve(soup, selector, site_id)
        if text is None:
            continue

        if field in ATTRIBUTES:
            amount = parse_money_text(text)
            if amount is None:
                logger.debug(f'{record_id}: unparsable {field} {text!r}.')
                continue
            values[field] = amount
        elif field == 'location':
            fragment['address'] = parse_location(text)
        else:
            fragment[field] = text

    return SourceRecord(
        record_id=record_id,
        source_type='salary_site',
        identity_fragment=fragment,
        attributes=SalaryAttributes(**values),
    )
