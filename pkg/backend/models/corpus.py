"""
Article-level records produced by corpus ingestion
"""

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional


@dataclass(frozen=True)
class RawArticle:
    """One page as stored in the dump: title, markup and an optional redirect"""
    title: str
    wikitext: str
    redirect_target: Optional[str] = None

    def __post_init__(self):
        if not self.title:
            raise ValueError('article title must be non-empty')

    @property
    def is_redirect(self) -> bool:
        return self.redirect_target is not None


@dataclass(frozen=True)
class ParsedArticle:
    """Lead section, lead links, optional history section and the years parsed from them"""
    title: str
    lead_text: str = ''
    lead_links: List[str] = field(default_factory=list)
    history_text: Optional[str] = None
    parsed_years: List[int] = field(default_factory=list)

    def __post_init__(self):
        object.__setattr__(self, 'lead_links', list(dict.fromkeys(self.lead_links)))
        object.__setattr__(self, 'parsed_years', sorted(int(y) for y in self.parsed_years))

    def to_dict(self) -> Dict[str, Any]:
        """ParsedArticle field names, used by the parsed-corpus directory"""
        return {
            'title': self.title,
            'lead_text': self.lead_text,
            'lead_links': list(self.lead_links),
            'history_text': self.history_text,
            'parsed_years': list(self.parsed_years),
        }

    def to_mini_dict(self) -> Dict[str, Any]:
        """Mini-corpus field names"""
        return {
            'title': self.title,
            'lead': self.lead_text,
            'links': list(self.lead_links),
            'history': self.history_text,
            'years': list(self.parsed_years),
        }


@dataclass(frozen=True)
class SubjectIndex:
    subject: str
    member_titles: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, 'member_titles', frozenset(self.member_titles))
        if not self.member_titles:
            raise ValueError(f'empty subject index: {self.subject}')

    def sorted_members(self) -> List[str]:
        return sorted(self.member_titles)


@dataclass(frozen=True)
class NobelNodeSet:
    prize_titles: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'prize_titles', frozenset(self.prize_titles))

    def __contains__(self, title: str) -> bool:
        return title in self.prize_titles

    def __len__(self) -> int:
        return len(self.prize_titles)


@dataclass
class Corpus:
    """Everything one run ingests: articles by title, subject indices and Nobel nodes"""
    articles: Dict[str, ParsedArticle]
    subjects: Dict[str, SubjectIndex]
    nobel: NobelNodeSet = field(default_factory=NobelNodeSet)

    def subject_articles(self, subject: str) -> Dict[str, ParsedArticle]:
        """Resolvable members of one subject, keyed by title"""
        members = self.subjects[subject].member_titles
        return {t: self.articles[t] for t in sorted(members) if t in self.articles}
