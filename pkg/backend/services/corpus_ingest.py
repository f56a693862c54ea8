"""
Corpus Ingestion Service
Reads articles from a multistream dump or the mini-corpus JSON, extracts lead
sections, links and years, and resolves subject indices and Nobel rationale links
"""

import bz2
import json
import re
import xml.etree.ElementTree as ET
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

import mwparserfromhell
import structlog
from mwparserfromhell.nodes import Heading, Tag

from config.settings import get_config
from errors import CorpusError
from models.corpus import Corpus, NobelNodeSet, ParsedArticle, RawArticle, SubjectIndex
from models.schemas import load_mini_corpus_dict
from services.pipeline import slugify

logger = structlog.get_logger()

NON_ARTICLE_NAMESPACES = {
    'book', 'category', 'draft', 'file', 'help', 'image', 'media', 'mediawiki', 'module',
    'portal', 'special', 'talk', 'template', 'timedtext', 'user', 'wikipedia', 'wp', 'wikt',
    'wiktionary', 'w',
}
FILE_NAMESPACES = ('file:', 'image:', 'category:', 'media:')

MONTHS = (
    'January|February|March|April|May|June|July|August|September|October|November|December'
    '|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sept|Sep|Oct|Nov|Dec'
)
TIME_PREPOSITIONS = (
    'in|on|at|by|from|to|until|till|since|during|before|after|around|about|circa|ca\\.|c\\.'
    '|between|through|throughout|within|by the end of'
)
OTHER_TRIGGERS = 'and|the|early|mid|late|AD|CE'
ERA_SUFFIX = r'(?:BCE|BC|MYA|million\s+years\s+ago|AD|CE)'

YEAR_PATTERN = re.compile(
    # 19th century, 3rd century BC
    r'\b(?P<century>\d{1,2})(?:st|nd|rd|th)[\s-]+centur(?:y|ies)(?:\s+(?P<century_era>BCE|BC|AD|CE)\b)?'
    # 1600 BC, 2.5 MYA, 65 million years ago, 1066 AD
    r'|(?<![\d.,])\b(?P<number>\d+(?:\.\d+)?)\s*(?P<era>' + ERA_SUFFIX + r')\b'
    # January 5, 1905 / around 1905 / the 1960s / mid-1800s / AD 1066
    r'|\b(?:' + MONTHS + '|' + TIME_PREPOSITIONS + '|' + OTHER_TRIGGERS + r')[\s-]+'
    r'(?:\d{1,2}(?:st|nd|rd|th)?,?\s+)?'
    r'(?P<year>\d{3,4})(?:s|\'s)?\b(?!\s*' + ERA_SUFFIX + r'\b)(?![.,]\d)',
    re.IGNORECASE,
)


def canonical_title(raw: str) -> Optional[str]:
    """
    Canonical MediaWiki article title, or None for non-article targets.

    Strips the #anchor and any pipe label, turns underscores into spaces,
    collapses whitespace and uppercases the first character.
    """
    if raw is None:
        return None
    title = str(raw).split('|', 1)[0].split('#', 1)[0]
    title = re.sub(r'[\s_]+', ' ', title.replace('_', ' ')).strip().lstrip(':').strip()
    if not title:
        return None
    if ':' in title and title.split(':', 1)[0].strip().lower() in NON_ARTICLE_NAMESPACES:
        return None
    return title[0].upper() + title[1:]


def _clean_markup(code: mwparserfromhell.wikicode.Wikicode):
    """Remove templates, references and file/category links in place"""
    for node in code.filter_templates(recursive=False):
        _safe_remove(code, node)
    for node in code.filter_tags(recursive=True, matches=lambda t: str(t.tag).strip().lower() == 'ref'):
        _safe_remove(code, node)
    for node in code.filter_wikilinks(recursive=True):
        if str(node.title).strip().lower().startswith(FILE_NAMESPACES):
            _safe_remove(code, node)


def _safe_remove(code, node):
    try:
        code.remove(node)
    except ValueError:
        pass  # already gone with an enclosing node


def _plain_text(code: mwparserfromhell.wikicode.Wikicode) -> str:
    text = code.strip_code(normalize=True, collapse=True)
    return re.sub(r'\s+', ' ', text).strip()


def extract_lead(wikitext: str) -> Tuple[str, List[str], Optional[str]]:
    """
    Split an article into its lead text, lead links and History section.

    Args:
        wikitext: MediaWiki markup

    Returns:
        (lead_text, lead_links, history_text); history_text is None when the
        article has no section whose heading mentions "History"
    """
    try:
        code = mwparserfromhell.parse(wikitext or '')
    except Exception as e:
        logger.warning("Unparseable wikitext", error=str(e))
        return '', [], None

    lead_nodes = []
    for node in code.nodes:
        if isinstance(node, Heading) and node.level <= 2:
            break
        lead_nodes.append(node)
    lead = mwparserfromhell.parse(''.join(str(n) for n in lead_nodes))
    _clean_markup(lead)

    links: List[str] = []
    for link in lead.filter_wikilinks(recursive=True):
        title = canonical_title(str(link.title))
        if title is not None:
            links.append(title)
    links = list(dict.fromkeys(links))

    history = None
    for section in code.get_sections(flat=True, include_lead=False):
        headings = section.filter_headings(recursive=False)
        if not headings or 'history' not in _plain_text(headings[0].title).lower():
            continue
        body = mwparserfromhell.parse(str(section))
        _safe_remove(body, body.filter_headings(recursive=False)[0])
        _clean_markup(body)
        history = _plain_text(body)
        break

    return _plain_text(lead), links, history


def parse_years(text: str, dump_year: Optional[int] = None) -> List[int]:
    """
    Years mentioned in plain text, in order of appearance.

    A number counts as a year when it follows a month, a preposition of time,
    "and", "the" or "early/mid/late", or carries an era suffix. BC/BCE years are
    negated, MYA values become -N * 10^6, centuries map to their first year.
    Anything later than the dump year is discarded.
    """
    if not text:
        return []
    cap = get_config().DUMP_YEAR if dump_year is None else dump_year
    years: List[int] = []
    for match in YEAR_PATTERN.finditer(text):
        year = None
        if match.group('century'):
            n = int(match.group('century'))
            era = (match.group('century_era') or '').upper()
            if n == 0:
                continue
            year = -100 * n if era.startswith('B') else 100 * (n - 1)
        elif match.group('number'):
            value = float(match.group('number'))
            era = re.sub(r'\s+', ' ', match.group('era')).upper()
            if era in ('MYA', 'MILLION YEARS AGO'):
                year = -int(round(value * 1_000_000))
            elif value != int(value):
                continue
            elif era in ('BC', 'BCE'):
                year = -int(value)
            else:
                year = int(value)
        elif match.group('year'):
            year = int(match.group('year'))
        if year is not None and year <= cap:
            years.append(year)
    return years


def assign_birth_years(
    parsed_years: Mapping[str, Optional[Sequence[int]]],
    edges: Iterable[Tuple[str, str]],
    default_year: Optional[int] = None,
) -> Dict[str, Tuple[int, str]]:
    """
    Birth year and provenance for every node.

    Dated nodes take their earliest parsed year. Two imputation passes then
    date each undated node with a dated parent as one year after its latest
    dated parent; within a pass all nodes read the years fixed before it.
    Remaining nodes get the default year.

    Args:
        parsed_years: node -> parsed years (None or empty when undated)
        edges: (source, target) pairs; the source is a parent of the target
    """
    default_year = get_config().DEFAULT_YEAR if default_year is None else default_year
    parents: Dict[str, Set[str]] = defaultdict(set)
    for source, target in edges:
        if source != target:
            parents[target].add(source)

    assigned: Dict[str, Tuple[int, str]] = {}
    for node, years in parsed_years.items():
        if years:
            assigned[node] = (int(min(years)), 'parsed')

    for _ in range(2):
        updates = {}
        for node in sorted(parsed_years):
            if node in assigned:
                continue
            dated = [assigned[p][0] for p in parents.get(node, ()) if p in assigned]
            if dated:
                updates[node] = (max(dated) + 1, 'imputed')
        assigned.update(updates)

    for node in parsed_years:
        assigned.setdefault(node, (default_year, 'default'))
    logger.debug("Birth years assigned",
                 parsed=sum(1 for v in assigned.values() if v[1] == 'parsed'),
                 imputed=sum(1 for v in assigned.values() if v[1] == 'imputed'),
                 default=sum(1 for v in assigned.values() if v[1] == 'default'))
    return assigned


def parse_article(raw: RawArticle, dump_year: Optional[int] = None) -> ParsedArticle:
    lead_text, links, history = extract_lead(raw.wikitext)
    years = parse_years(' '.join(t for t in (lead_text, history) if t), dump_year=dump_year)
    return ParsedArticle(title=raw.title, lead_text=lead_text, lead_links=links,
                         history_text=history, parsed_years=years)


def subject_name(index_title: str) -> str:
    name = re.sub(r'^Index of\s+', '', index_title.strip(), flags=re.IGNORECASE)
    name = re.sub(r'\s+articles$', '', name, flags=re.IGNORECASE)
    return name.strip()


def resolve_subject(title: str, wikitext: str, redirects: Optional[Mapping[str, str]] = None) -> SubjectIndex:
    """
    Members of an "Index of X" page: every article link anywhere in the page.

    Raises:
        CorpusError: when the page links to no article
    """
    redirects = redirects or {}
    code = mwparserfromhell.parse(wikitext or '')
    members = set()
    for link in code.filter_wikilinks(recursive=True):
        target = canonical_title(str(link.title))
        if target is None:
            continue
        members.add(redirects.get(target, target))
    members.discard(canonical_title(title))
    if not members:
        raise CorpusError(f'empty subject index: {title}', page=title)
    name = subject_name(title)
    logger.info("Subject index resolved", subject=name, members=len(members))
    return SubjectIndex(subject=name, member_titles=frozenset(members))


def _table_rows(table: Tag) -> List[List[Tag]]:
    rows: List[List[Tag]] = []
    loose: List[Tag] = []
    for node in table.contents.nodes:
        if not isinstance(node, Tag):
            continue
        tag = str(node.tag).strip().lower()
        if tag == 'tr':
            if loose:
                rows.append(loose)
                loose = []
            rows.append([c for c in node.contents.nodes
                         if isinstance(c, Tag) and str(c.tag).strip().lower() in ('td', 'th')])
        elif tag in ('td', 'th'):
            loose.append(node)
    if loose:
        rows.append(loose)
    return [r for r in rows if r]


def _span(cell: Tag, name: str) -> int:
    if cell.has(name):
        try:
            return max(1, int(str(cell.get(name).value).strip().strip('"\'')))
        except ValueError:
            return 1
    return 1


def _rationale_cells(table: Tag) -> Optional[List[Tag]]:
    """Cells of the Rationale column, honouring rowspans; None if the table has no such column"""
    rows = _table_rows(table)
    column = None
    header_at = None
    for r, row in enumerate(rows):
        col = 0
        for cell in row:
            if str(cell.tag).strip().lower() == 'th' and 'rationale' in _plain_text(cell.contents).lower():
                column = col
                break
            col += _span(cell, 'colspan')
        if column is not None:
            header_at = r
            break
    if column is None:
        return None

    cells: List[Tag] = []
    occupied: Dict[int, int] = {}
    for row in rows[header_at + 1:]:
        col = 0
        placed = {}
        for cell in row:
            while occupied.get(col, 0) > 0:
                col += 1
            placed[col] = cell
            rowspan = _span(cell, 'rowspan')
            width = _span(cell, 'colspan')
            for c in range(col, col + width):
                if rowspan > 1:
                    occupied[c] = rowspan
            col += width
        occupied = {c: n - 1 for c, n in occupied.items() if n - 1 > 0}
        if column in placed:
            cells.append(placed[column])
    return cells


def parse_nobel_lists(pages: Mapping[str, str]) -> NobelNodeSet:
    """
    Articles linked from the Rationale column of the laureate list pages.

    Raises:
        CorpusError: naming the first page without a laureates table
    """
    titles: Set[str] = set()
    for page in sorted(pages):
        code = mwparserfromhell.parse(pages[page] or '')
        tables = code.filter_tags(recursive=True, matches=lambda t: str(t.tag).strip().lower() == 'table')
        found = False
        for table in tables:
            cells = _rationale_cells(table)
            if cells is None:
                continue
            found = True
            for cell in cells:
                for link in cell.contents.filter_wikilinks(recursive=True):
                    target = canonical_title(str(link.title))
                    if target is not None:
                        titles.add(target)
        if not found:
            raise CorpusError(f'no laureates table with a Rationale column in {page}', page=page)
    logger.info("Nobel rationale links parsed", pages=len(pages), titles=len(titles))
    return NobelNodeSet(prize_titles=frozenset(titles))


def _open_index(index_path: Union[str, Path]):
    with open(index_path, 'rb') as fh:
        compressed = fh.read(3) == b'BZh'
    if compressed:
        return bz2.open(index_path, 'rt', encoding='utf-8')
    return open(index_path, 'r', encoding='utf-8')


def read_index(index_path: Union[str, Path], wanted: Iterable[str]) -> Dict[str, int]:
    """Byte offset of the bz2 stream holding each wanted title; the index may be bz2 or plain text"""
    wanted = set(wanted)
    offsets: Dict[str, int] = {}
    if not wanted:
        return offsets
    try:
        with _open_index(index_path) as fh:
            for line in fh:
                parts = line.rstrip('\n').split(':', 2)
                if len(parts) != 3:
                    continue
                title = parts[2]
                if title in wanted:
                    offsets[title] = int(parts[0])
    except (OSError, EOFError, UnicodeDecodeError) as e:
        raise CorpusError(f'unreadable dump index {index_path}: {e}') from e
    return offsets


def _read_stream(fh, offset: int, chunk_size: int = 1 << 16) -> bytes:
    fh.seek(offset)
    decompressor = bz2.BZ2Decompressor()
    out = []
    try:
        while not decompressor.eof:
            chunk = fh.read(chunk_size)
            if not chunk:
                raise CorpusError(f'truncated bz2 stream at byte offset {offset}', offset=offset)
            out.append(decompressor.decompress(chunk))
    except (OSError, EOFError) as e:
        raise CorpusError(f'malformed bz2 stream at byte offset {offset}: {e}', offset=offset) from e
    return b''.join(out)


def _local(tag: str) -> str:
    return tag.rsplit('}', 1)[-1]


def _pages_in_stream(data: bytes, offset: int) -> Iterator[Tuple[str, str, Optional[str]]]:
    try:
        root = ET.fromstring(b'<stream>' + data + b'</stream>')
    except ET.ParseError as e:
        raise CorpusError(f'malformed XML in stream at byte offset {offset}: {e}', offset=offset) from e
    for page in root.iter():
        if _local(page.tag) != 'page':
            continue
        title = text = redirect = None
        for child in page.iter():
            name = _local(child.tag)
            if name == 'title' and title is None:
                title = child.text or ''
            elif name == 'redirect':
                redirect = child.get('title')
            elif name == 'text':
                text = child.text or ''
        if title:
            yield title, text or '', redirect


def read_dump(dump_path: Union[str, Path], index_path: Union[str, Path], wanted: Iterable[str]) -> Iterator[RawArticle]:
    """
    Yield the wanted articles by seeking to their bz2 streams.

    Titles absent from the index are logged and skipped. Redirect pages are
    yielded with redirect_target set; see resolve_redirects.
    """
    wanted = set(wanted)
    if not wanted:
        return
    offsets = read_index(index_path, wanted)
    for title in sorted(wanted - set(offsets)):
        logger.warning("Article absent from index", title=title)
    by_offset: Dict[int, Set[str]] = defaultdict(set)
    for title, offset in offsets.items():
        by_offset[offset].add(title)

    found: Dict[str, RawArticle] = {}
    with open(dump_path, 'rb') as fh:
        for offset in sorted(by_offset):
            data = _read_stream(fh, offset)
            for title, text, redirect in _pages_in_stream(data, offset):
                if title in by_offset[offset]:
                    found[title] = RawArticle(title=title, wikitext='' if redirect else text,
                                              redirect_target=canonical_title(redirect) if redirect else None)
    for title in sorted(found):
        yield found[title]


def resolve_redirects(
    dump_path: Union[str, Path], index_path: Union[str, Path], articles: Iterable[RawArticle]
) -> Tuple[Dict[str, RawArticle], Dict[str, str]]:
    """
    Follow one level of redirects with a second seek pass.

    Returns:
        (articles keyed by their final title, redirect map source -> target)
    """
    resolved: Dict[str, RawArticle] = {}
    redirects: Dict[str, str] = {}
    for article in articles:
        if article.is_redirect:
            redirects[article.title] = article.redirect_target
        else:
            resolved[article.title] = article
    targets = set(redirects.values()) - set(resolved)
    for article in read_dump(dump_path, index_path, targets):
        if article.is_redirect:
            logger.warning("Double redirect not followed", title=article.title, target=article.redirect_target)
            continue
        resolved[article.title] = article
    return resolved, redirects


def ingest_dump(
    dump_path: Union[str, Path],
    index_path: Union[str, Path],
    index_titles: Sequence[str],
    nobel_titles: Sequence[str] = (),
    dump_year: Optional[int] = None,
) -> Corpus:
    """Subject index pages -> member articles -> ParsedArticles, plus the Nobel node set"""
    pages, page_redirects = resolve_redirects(dump_path, index_path,
                                              read_dump(dump_path, index_path, list(index_titles) + list(nobel_titles)))

    def page_text(title: str) -> Optional[RawArticle]:
        return pages.get(page_redirects.get(title, title))

    raw_subjects = {}
    for title in index_titles:
        page = page_text(title)
        if page is None:
            raise CorpusError(f'subject index page not found: {title}', page=title)
        raw_subjects[title] = page

    member_titles = set()
    first_pass = {}
    for title in sorted(raw_subjects):
        index = resolve_subject(title, raw_subjects[title].wikitext)
        first_pass[title] = index
        member_titles |= index.member_titles

    articles, redirects = resolve_redirects(dump_path, index_path, read_dump(dump_path, index_path, member_titles))
    subjects = {}
    for title, index in first_pass.items():
        members = {redirects.get(t, t) for t in index.member_titles}
        subjects[index.subject] = SubjectIndex(index.subject, frozenset(m for m in members if m in articles))

    parsed = {t: parse_article(articles[t], dump_year=dump_year) for t in sorted(articles)}
    nobel = NobelNodeSet()
    if nobel_titles:
        nobel_pages = {}
        for title in nobel_titles:
            page = page_text(title)
            if page is None:
                raise CorpusError(f'laureate list page not found: {title}', page=title)
            nobel_pages[title] = page.wikitext
        nobel = parse_nobel_lists(nobel_pages)
    logger.info("Dump ingested", subjects=len(subjects), articles=len(parsed), nobel=len(nobel))
    return Corpus(articles=parsed, subjects=subjects, nobel=nobel)


def _article_from_mini(entry: Dict, dump_year: Optional[int]) -> ParsedArticle:
    title = canonical_title(entry['title'])
    if title is None:
        raise CorpusError(f'not an article title: {entry["title"]}')
    links = [t for t in (canonical_title(link) for link in entry['links']) if t is not None]
    years = entry['years']
    if years is None:
        years = parse_years(' '.join(t for t in (entry['lead'], entry['history']) if t), dump_year=dump_year)
    return ParsedArticle(title=title, lead_text=entry['lead'], lead_links=links,
                         history_text=entry['history'], parsed_years=years)


def load_mini_corpus(path: Union[str, Path], dump_year: Optional[int] = None) -> Corpus:
    """Read the mini-corpus JSON; articles with null years get them parsed from their text"""
    with open(path, encoding='utf-8') as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise CorpusError(f'invalid mini-corpus JSON {path}: {e.msg}') from e
    data = load_mini_corpus_dict(data)
    articles = {}
    for entry in data['articles']:
        article = _article_from_mini(entry, dump_year)
        if article.title in articles:
            raise CorpusError(f'duplicate article title: {article.title}')
        articles[article.title] = article
    subjects = {}
    for name, titles in sorted(data['subjects'].items()):
        members = frozenset(t for t in (canonical_title(x) for x in titles) if t is not None)
        if not members:
            raise CorpusError(f'empty subject index: {name}')
        subjects[name] = SubjectIndex(subject=name, member_titles=members)
    nobel = NobelNodeSet(frozenset(t for t in (canonical_title(x) for x in data['nobel']) if t is not None))
    logger.info("Mini-corpus loaded", path=str(path), articles=len(articles), subjects=len(subjects))
    return Corpus(articles=articles, subjects=subjects, nobel=nobel)


def write_mini_corpus(corpus: Corpus, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = {
        'articles': [corpus.articles[t].to_mini_dict() for t in sorted(corpus.articles)],
        'subjects': {name: corpus.subjects[name].sorted_members() for name in sorted(corpus.subjects)},
        'nobel': sorted(corpus.nobel.prize_titles),
    }
    path.write_text(json.dumps(data, indent=1, ensure_ascii=False) + '\n', encoding='utf-8')
    return path


def write_corpus(corpus: Corpus, out_dir: Union[str, Path]) -> Path:
    """Parsed-corpus directory: manifest, one JSON per subject and the Nobel titles"""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {'subjects': {}, 'articles': len(corpus.articles)}
    for name in sorted(corpus.subjects):
        slug = slugify(name)
        index = corpus.subjects[name]
        payload = {
            'subject': name,
            'members': index.sorted_members(),
            'articles': [a.to_dict() for a in corpus.subject_articles(name).values()],
        }
        (out / f'{slug}.json').write_text(json.dumps(payload, indent=1, ensure_ascii=False) + '\n', encoding='utf-8')
        manifest['subjects'][name] = slug
    (out / 'nobel.json').write_text(json.dumps(sorted(corpus.nobel.prize_titles), indent=1, ensure_ascii=False) + '\n',
                                    encoding='utf-8')
    (out / 'manifest.json').write_text(json.dumps(manifest, indent=1, sort_keys=True) + '\n', encoding='utf-8')
    logger.info("Parsed corpus written", path=str(out), subjects=len(corpus.subjects))
    return out


def read_corpus_dir(out_dir: Union[str, Path]) -> Corpus:
    out = Path(out_dir)
    manifest_path = out / 'manifest.json'
    if not manifest_path.exists():
        raise CorpusError(f'not a parsed-corpus directory: {out}')
    manifest = json.loads(manifest_path.read_text(encoding='utf-8'))
    articles: Dict[str, ParsedArticle] = {}
    subjects: Dict[str, SubjectIndex] = {}
    for name, slug in sorted(manifest['subjects'].items()):
        payload = json.loads((out / f'{slug}.json').read_text(encoding='utf-8'))
        subjects[name] = SubjectIndex(subject=name, member_titles=frozenset(payload['members']))
        for entry in payload['articles']:
            articles[entry['title']] = ParsedArticle(**entry)
    nobel_path = out / 'nobel.json'
    nobel = json.loads(nobel_path.read_text(encoding='utf-8')) if nobel_path.exists() else []
    return Corpus(articles=articles, subjects=subjects, nobel=NobelNodeSet(frozenset(nobel)))


def load_corpus(path: Union[str, Path], dump_year: Optional[int] = None) -> Corpus:
    """Mini-corpus JSON file or parsed-corpus directory"""
    path = Path(path)
    if path.is_dir():
        return read_corpus_dir(path)
    return load_mini_corpus(path, dump_year=dump_year)
