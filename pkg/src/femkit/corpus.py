"""Wiki-style corpus ingestion.

Reads line-delimited JSON pages whose text carries <math>...</math> spans,
parses each span into a layout tree, attaches a word window of surrounding
context, applies the variable/operator filter, and mines formula birth years
from an auxiliary paper corpus by title matching.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass

from . import tree as formula_tree
from .errors import CorpusFormatError, EmptyCorpusError

log = logging.getLogger(__name__)

MATH_SPAN_RE = re.compile(r"<math>(.*?)</math>", re.DOTALL)
_MATH_TAG_RE = re.compile(r"</?math>")

DEFAULT_CONTEXT_WINDOW = 250
DEFAULT_CONTEXT_UNIT = "words"  # or "chars"; the source material gives both


@dataclass
class WikiPage:
    page_id: str
    title: str
    body: str
    outlinks: set[str]


@dataclass
class RawFormula:
    formula_id: str
    latex: str
    home_pages: set[str]
    context: str
    variable_count: int
    operator_count: int
    serialization: str


@dataclass
class Corpus:
    pages: dict[str, WikiPage]
    formulas: dict[str, RawFormula]
    skipped_spans: int = 0
    dropped_links: int = 0

    def formulas_sorted(self) -> list[RawFormula]:
        return [self.formulas[k] for k in sorted(self.formulas)]


def formula_id_for(page_id: str, serialization: str) -> str:
    digest = hashlib.sha1(f"{page_id}|{serialization}".encode("utf-8"))
    return digest.hexdigest()[:16]


def _context_window(before: str, after: str, window: int, unit: str) -> str:
    before = _MATH_TAG_RE.sub(" ", before)
    after = _MATH_TAG_RE.sub(" ", after)
    half = max(window // 2, 1)
    if unit == "chars":
        return (before[-half:] + " " + after[:half]).strip()
    left = before.split()[-half:]
    right = after.split()[:half]
    return " ".join(left + right)


def load_corpus(path, context_window: int = DEFAULT_CONTEXT_WINDOW,
                context_unit: str = DEFAULT_CONTEXT_UNIT,
                parser_config: formula_tree.ParserConfig | None = None) -> Corpus:
    """Load pages and their formulae from a JSON-lines corpus file.

    Every parseable math span becomes one formula; spans that fail to parse
    are counted and skipped.  Within a page, spans with the same canonical
    serialization collapse into one formula; the same formula text on two
    pages stays two distinct formulae.  Outlinks to unknown page ids are
    dropped with a warning.
    """
    pages: dict[str, WikiPage] = {}
    records: list[tuple[str, dict]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc.msg}", lineno)
            if not isinstance(record, dict):
                raise CorpusFormatError("record is not an object", lineno)
            for key in ("id", "title", "text"):
                if key not in record:
                    raise CorpusFormatError(f"missing field {key!r}", lineno)
            page_id = str(record["id"])
            if page_id in pages:
                raise CorpusFormatError(f"duplicate page id {page_id!r}",
                                        lineno)
            pages[page_id] = WikiPage(
                page_id=page_id,
                title=str(record["title"]),
                body=str(record["text"]),
                outlinks=set(str(x) for x in record.get("links", [])),
            )
            records.append((page_id, record))
    if not pages:
        raise EmptyCorpusError(f"no pages in {path}")

    dropped_links = 0
    for page in pages.values():
        unknown = page.outlinks - pages.keys()
        if unknown:
            dropped_links += len(unknown)
            log.warning("page %s: dropping %d outlinks to unknown pages: %s",
                        page.page_id, len(unknown),
                        ", ".join(sorted(unknown)[:5]))
            page.outlinks -= unknown

    formulas: dict[str, RawFormula] = {}
    skipped = 0
    for page_id in sorted(pages):
        page = pages[page_id]
        seen_on_page: set[str] = set()
        for match in MATH_SPAN_RE.finditer(page.body):
            latex = match.group(1).strip()
            try:
                parsed = formula_tree.parse_latex(latex, parser_config)
            except formula_tree.ParseError as exc:
                skipped += 1
                log.debug("page %s: skipping unparseable span %r (%s)",
                          page_id, latex[:60], exc)
                continue
            serialization = formula_tree.serialize(parsed.root)
            if serialization in seen_on_page:
                continue
            seen_on_page.add(serialization)
            variables, operators = formula_tree.count_symbols(parsed)
            fid = formula_id_for(page_id, serialization)
            formulas[fid] = RawFormula(
                formula_id=fid,
                latex=latex,
                home_pages={page_id},
                context=_context_window(page.body[:match.start()],
                                        page.body[match.end():],
                                        context_window, context_unit),
                variable_count=variables,
                operator_count=operators,
                serialization=serialization,
            )
    log.info("loaded %d pages, %d formulas (%d spans skipped, %d links dropped)",
             len(pages), len(formulas), skipped, dropped_links)
    return Corpus(pages=pages, formulas=formulas, skipped_spans=skipped,
                  dropped_links=dropped_links)


def filter_formulas(formulas: dict[str, RawFormula],
                    min_variables: int = 2,
                    min_operators: int = 3) -> dict[str, RawFormula]:
    """Keep formulae with enough distinct variables and operator nodes."""
    kept = {fid: f for fid, f in formulas.items()
            if f.variable_count >= min_variables
            and f.operator_count >= min_operators}
    log.info("formula filter kept %d of %d", len(kept), len(formulas))
    return kept


@dataclass
class PaperRecord:
    title: str
    year: int
    text: str


def load_paper_corpus(path) -> list[PaperRecord]:
    """Read the auxiliary paper corpus used for birth-year mining."""
    papers: list[PaperRecord] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc.msg}", lineno)
            year = record.get("year")
            try:
                year = int(year)
            except (TypeError, ValueError):
                year = None
            if year is None or not 1000 <= year <= 2999:
                log.warning("line %d: skipping paper without 4-digit year",
                            lineno)
                continue
            papers.append(PaperRecord(title=str(record.get("title", "")),
                                      year=year,
                                      text=str(record.get("text", ""))))
    return papers


def _title_pattern(title: str) -> re.Pattern:
    return re.compile(r"\b" + re.escape(title) + r"\b", re.IGNORECASE)


def mine_birth_times(formulas: dict[str, RawFormula],
                     pages: dict[str, WikiPage],
                     paper_corpus) -> dict[str, int]:
    """Earliest publication year whose text mentions a home-page title.

    Matching is case-insensitive on word boundaries (the package's reading
    of greedy title matching); a formula with several home pages takes the
    minimum year over all of them.  Formulae with no match stay absent.
    """
    titles: dict[str, re.Pattern] = {}
    for page in pages.values():
        if page.title and page.title not in titles:
            titles[page.title] = _title_pattern(page.title)

    earliest_by_title: dict[str, int] = {}
    for paper in paper_corpus:
        haystack = f"{paper.title}\n{paper.text}"
        for title, pattern in titles.items():
            known = earliest_by_title.get(title)
            if known is not None and known <= paper.year:
                continue
            if pattern.search(haystack):
                earliest_by_title[title] = paper.year

    birth: dict[str, int] = {}
    for fid, formula in formulas.items():
        years = []
        for page_id in formula.home_pages:
            page = pages.get(page_id)
            if page is None:
                continue
            year = earliest_by_title.get(page.title)
            if year is not None:
                years.append(year)
        if years:
            birth[fid] = min(years)
    return birth
