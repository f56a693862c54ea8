import pytest

from errors import CorpusError, SchemaError
from models.corpus import RawArticle
from services.corpus_ingest import (
    assign_birth_years,
    canonical_title,
    extract_lead,
    ingest_dump,
    load_corpus,
    parse_article,
    parse_nobel_lists,
    parse_years,
    read_dump,
    read_index,
    resolve_redirects,
    resolve_subject,
    subject_name,
    write_corpus,
)

YEAR_CASES = [
    ('It was founded in 1905.', [1905]),
    ('On January 5, 1905 the paper appeared.', [1905]),
    ('Published 12 March 1859.', [1859]),
    ('Built around 1600 BC.', [-1600]),
    ('In the 19th Century physics changed.', [1800]),
    ('The 3rd century BC saw the first libraries.', [-300]),
    ('Dinosaurs died out 66 million years ago.', [-66000000]),
    ('Homo erectus appeared 2 MYA.', [-2000000]),
    ('Around 2.5 MYA, stone tools appeared.', [-2500000]),
    ('In the 1960s the field grew.', [1960]),
    ('It spread during the mid-1800s.', [1800]),
    ('He was crowned in AD 800.', [800]),
    ('Charlemagne was crowned 800 AD.', [800]),
    ('The treaty of 1648 ended the war.', []),
    ('It was fought between 1914 and 1918.', [1914, 1918]),
    ('The war lasted from 1939 to 1945.', [1939, 1945]),
    ('It has been used since 2001.', [2001]),
    ('A revision is planned in 2025.', []),
    ('He kept 1200 sheep on the farm.', []),
    ('The town had 1,500 people by 1800.', [1800]),
    ('In 1905, Einstein published four papers.', [1905]),
    ('It fell in 3.14 seconds.', []),
    ('The city was founded around 500 BCE.', [-500]),
    ('Printing spread c. 1450 across Europe.', [1450]),
    ('The battle took place circa 1066.', [1066]),
    ('Steam engines spread in the late 1700s.', [1700]),
    ('Physics changed in the early 20th century.', [1900]),
    ('Monasteries grew in the 5th century.', [400]),
    ('In March 1871 the commune formed.', [1871]),
    ('It was signed on 4 July 1776.', [1776]),
    ('Fighting began in Sep 1939.', [1939]),
    ('Reforms came after 1850 and 1870.', [1850, 1870]),
    ('He sailed in 1492 and in 1498.', [1492, 1498]),
    ('Computers were common since 1950s.', [1950]),
    ('Jazz boomed in the 1920\'s.', [1920]),
    ('Counts ranged between 30 and 40.', []),
    ('Hominins spread about 1.5 million years ago.', [-1500000]),
    ('A calendar began in 1859 BC.', [-1859]),
    ('It was built in AD 1066 and rebuilt 1100 CE.', [1066, 1100]),
    ('The wall stood until 1989.', [1989]),
]


@pytest.mark.parametrize('text,expected', YEAR_CASES)
def test_parse_years(text, expected):
    assert parse_years(text, dump_year=2019) == expected


def test_year_cases_cover_forty_sentences():
    assert len(YEAR_CASES) == 40


def test_parse_years_empty_text():
    assert parse_years('', dump_year=2019) == []
    assert parse_years(None, dump_year=2019) == []


@pytest.mark.parametrize('raw,expected', [
    ('natural_selection#History', 'Natural selection'),
    ('  charles   darwin ', 'Charles darwin'),
    ('Species|diversity of life', 'Species'),
    ('Category:Biology', None),
    ('File:Origin.jpg', None),
    ('', None),
])
def test_canonical_title(raw, expected):
    assert canonical_title(raw) == expected


def test_extract_lead_from_article(origin_wikitext):
    lead, links, history = extract_lead(origin_wikitext)

    assert links == ['Charles Darwin', 'Evolutionary biology', 'Natural selection', 'Species']
    assert 'scientific literature' in lead
    assert 'a process of natural selection' in lead
    assert 'Infobox' not in lead
    assert 'cite book' not in lead
    assert 'title page' not in lead
    assert 'geology' not in lead
    assert history is not None
    assert 'John Murray' in history
    assert 'discussed' not in history


def test_extract_lead_without_history():
    lead, links, history = extract_lead("'''Alpha''' links [[beta]].\n\n== Uses ==\nMore.")
    assert links == ['Beta']
    assert history is None
    assert 'More' not in lead


def test_extract_lead_runs_past_subsection_headings():
    lead, links, _ = extract_lead("'''Alpha''' links [[beta]].\n=== Aside ===\nStill [[Gamma]] here.\n== Uses ==\nMore.")
    assert 'Still' in lead
    assert 'Gamma' in links
    assert 'More' not in lead


def test_parse_article_reads_lead_and_history_years(origin_wikitext):
    article = parse_article(RawArticle(title='On the Origin of Species', wikitext=origin_wikitext), dump_year=2019)
    assert article.parsed_years[0] == 1859
    assert 1872 in article.parsed_years
    assert 1830 not in article.parsed_years
    assert 1860 not in article.parsed_years


def test_assign_birth_years_imputes_in_two_passes():
    parsed = {'a': [1900, 1950], 'b': None, 'c': [], 'd': None, 'e': [1800]}
    edges = [('a', 'b'), ('e', 'b'), ('b', 'c'), ('c', 'd')]

    years = assign_birth_years(parsed, edges, default_year=2020)

    assert years['a'] == (1900, 'parsed')
    assert years['b'] == (1901, 'imputed')
    assert years['c'] == (1902, 'imputed')
    assert years['d'] == (2020, 'default')
    assert years['e'] == (1800, 'parsed')


def test_assign_birth_years_ignores_self_links():
    years = assign_birth_years({'a': None}, [('a', 'a')], default_year=2020)
    assert years['a'] == (2020, 'default')


def test_subject_name():
    assert subject_name('Index of biophysics articles') == 'biophysics'


def test_resolve_subject_collects_article_links():
    text = "* [[Alpha]]\n* [[beta|Beta things]]\n* [[Category:Indexes]]\n* [[Index of biology articles]]"
    index = resolve_subject('Index of biology articles', text, redirects={'Beta': 'Gamma'})
    assert index.subject == 'biology'
    assert index.member_titles == frozenset({'Alpha', 'Gamma'})


def test_resolve_subject_rejects_empty_index():
    with pytest.raises(CorpusError, match='empty subject index'):
        resolve_subject('Index of nothing articles', 'No links here.')


NOBEL_PAGE = '''Intro text.
{| class="wikitable"
! Year !! Laureate !! Rationale
|-
| rowspan="2" | 1901 || [[Wilhelm Röntgen]] || "in recognition of the discovery of [[X-ray|remarkable rays]]"
|-
| [[Someone Else]] || "for work on [[radiation]]"
|}
'''


def test_parse_nobel_lists_reads_rationale_column():
    nobel = parse_nobel_lists({'List of Nobel laureates in Physics': NOBEL_PAGE})
    assert nobel.prize_titles == frozenset({'X-ray', 'Radiation'})


def test_parse_nobel_lists_requires_rationale_table():
    with pytest.raises(CorpusError, match='Rationale'):
        parse_nobel_lists({'Empty list': 'Just prose, no table.'})


def test_read_dump_seeks_wanted_pages(multistream_factory):
    dump, index = multistream_factory([
        [('Alpha', "'''Alpha''' explains [[Beta]].", None), ('Beta', "'''Beta''' began in 1850.", None)],
        [('Gamma', None, 'Beta'), ('Delta', 'Delta text.', None)],
    ])

    articles = list(read_dump(dump, index, {'Alpha', 'Gamma', 'Zeta'}))

    assert [a.title for a in articles] == ['Alpha', 'Gamma']
    assert articles[1].is_redirect
    assert articles[1].redirect_target == 'Beta'

    resolved, redirects = resolve_redirects(dump, index, articles)
    assert sorted(resolved) == ['Alpha', 'Beta']
    assert redirects == {'Gamma': 'Beta'}


def test_read_dump_accepts_plain_text_index(multistream_factory):
    import bz2

    dump, index = multistream_factory([
        [('Alpha', "'''Alpha''' explains [[Beta]].", None), ('Beta', "'''Beta''' began in 1850.", None)],
    ])
    plain = index.with_name('index.txt')
    plain.write_bytes(bz2.decompress(index.read_bytes()))

    assert read_index(plain, {'Beta'}) == read_index(index, {'Beta'}) == {'Beta': 0}
    assert [a.title for a in read_dump(dump, plain, {'Beta'})] == ['Beta']


def test_read_index_wraps_io_errors(tmp_path):
    with pytest.raises(CorpusError, match='unreadable dump index'):
        read_index(tmp_path / 'missing-index.txt', {'Alpha'})


def test_read_dump_reports_malformed_stream_offset(tmp_path):
    import bz2

    dump = tmp_path / 'broken.xml.bz2'
    dump.write_bytes(b'this is not bzip2 data at all')
    index = tmp_path / 'index.txt.bz2'
    index.write_bytes(bz2.compress(b'0:1:Alpha\n'))

    with pytest.raises(CorpusError) as err:
        list(read_dump(dump, index, {'Alpha'}))
    assert err.value.offset == 0


def test_ingest_dump_end_to_end(multistream_factory):
    dump, index = multistream_factory([
        [
            ('Index of biology articles', '* [[Alpha]]\n* [[Gamma]]\n[[Category:Indexes]]', None),
            ('Alpha', "'''Alpha''' was founded in 1901. It explains [[Beta]].\n\n== Notes ==\nLater.", None),
        ],
        [('Beta', "'''Beta''' began in 1850.", None), ('Gamma', None, 'Beta')],
    ])

    corpus = ingest_dump(dump, index, ['Index of biology articles'], dump_year=2019)

    assert corpus.subjects['biology'].member_titles == frozenset({'Alpha', 'Beta'})
    assert corpus.articles['Alpha'].parsed_years == [1901]
    assert corpus.articles['Alpha'].lead_links == ['Beta']
    assert corpus.articles['Beta'].parsed_years == [1850]


def test_ingest_dump_missing_index_page(multistream_factory):
    dump, index = multistream_factory([[('Alpha', 'text', None)]])
    with pytest.raises(CorpusError, match='not found'):
        ingest_dump(dump, index, ['Index of chemistry articles'], dump_year=2019)


def test_load_mini_corpus(mini_corpus_path):
    corpus = load_corpus(mini_corpus_path, dump_year=2019)

    assert sorted(corpus.subjects) == ['Boolean algebra', 'biophysics', 'evolutionary biology']
    assert corpus.nobel.prize_titles == frozenset({'Radiation', 'X-ray crystallography'})
    assert corpus.articles['Logic'].parsed_years == [-350]
    assert corpus.articles['Natural selection'].parsed_years == [1858]
    assert corpus.articles['Speciation'].parsed_years == []
    assert 'Radiation' in corpus.subjects['biophysics'].member_titles
    assert 'Radiation' in corpus.subjects['evolutionary biology'].member_titles


def test_load_mini_corpus_reports_field_path(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{"articles": [{"title": "A", "years": ["x"]}], "subjects": {}}', encoding='utf-8')
    with pytest.raises(SchemaError) as err:
        load_corpus(path)
    assert err.value.field.startswith('articles.0.years')


def test_parsed_corpus_directory_reloads(tmp_path, mini_corpus_path):
    corpus = load_corpus(mini_corpus_path, dump_year=2019)
    out = write_corpus(corpus, tmp_path / 'corpus')

    again = load_corpus(out)

    assert sorted(again.subjects) == sorted(corpus.subjects)
    assert again.nobel == corpus.nobel
    assert again.articles['Logic'] == corpus.articles['Logic']
