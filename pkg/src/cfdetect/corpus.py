"""Campaign data model, corpus ingestion, label grouping, and annotator agreement."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .text.tokenize import word_tokens

# A description must clear this bar to be usable by the text extractors.
MIN_DESCRIPTION_TOKENS = 10
SENTENCE_TERMINATORS = (".", "!", "?")

REQUIRED_KEYS = ("id", "platform", "title", "description", "category", "created_at", "score")
OPTIONAL_KEYS = ("goal_minor", "goal_currency", "duration_days", "images", "metadata", "annotator_scores")


class CorpusError(Exception):
    """Base error for corpus ingestion failures."""


class MalformedRecordError(CorpusError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateIdError(CorpusError):
    def __init__(self, line_no: int, campaign_id: str):
        super().__init__(f"line {line_no}: duplicate campaign id {campaign_id!r}")
        self.line_no = line_no
        self.campaign_id = campaign_id


class MissingScoreError(CorpusError):
    def __init__(self, campaign_id: str):
        super().__init__(f"no annotation score for campaign {campaign_id!r}")
        self.campaign_id = campaign_id


class Platform(Enum):
    GOFUNDME = "GoFundMe"
    MIGHTYCAUSE = "MightyCause"
    FUNDLY = "Fundly"
    FUNDRAZR = "Fundrazr"
    INDIEGOGO = "Indiegogo"
    OTHER = "Other"

    @classmethod
    def parse(cls, value: str) -> "Platform":
        lowered = str(value).strip().lower()
        for member in cls:
            if member.value.lower() == lowered:
                return member
        return cls.OTHER


@dataclass(frozen=True)
class Money:
    """Currency amount in integer minor units (no float money)."""

    minor: int
    currency: str = "USD"


@dataclass(frozen=True)
class AnnotationScore:
    """One annotator's 0-5 verdict: 0 invalid, 1 fraud ... 5 not-fraud."""

    score: int
    annotator_id: str | None = None

    def __post_init__(self):
        if self.score not in (0, 1, 2, 3, 4, 5):
            raise ValueError(f"annotation score must be in 0..5, got {self.score}")


@dataclass(frozen=True)
class Campaign:
    id: str
    platform: Platform
    title: str
    description: str
    category: str
    created_at: datetime
    score: int
    duration_days: float | None = None
    goal: Money | None = None
    images: tuple[str, ...] = ()
    # Post-publication fields (money raised, donors, social counts, geo-tag)
    # live here and are never handed to feature assembly.
    metadata: Mapping[str, object] = field(default_factory=dict)
    annotations: tuple[AnnotationScore, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("campaign id must be nonempty")
        if self.score not in (0, 1, 2, 3, 4, 5):
            raise ValueError(f"score must be in 0..5, got {self.score}")


@dataclass(frozen=True)
class SkippedRecord:
    line_no: int
    campaign_id: str | None
    reason: str


@dataclass(frozen=True)
class Corpus:
    """Immutable collection of validated campaigns; safe for concurrent reads."""

    campaigns: tuple[Campaign, ...]
    skipped: tuple[SkippedRecord, ...] = ()

    def __len__(self) -> int:
        return len(self.campaigns)

    def __iter__(self):
        return iter(self.campaigns)

    def by_id(self, campaign_id: str) -> Campaign:
        return self._index()[campaign_id]

    def _index(self) -> dict[str, Campaign]:
        return {c.id: c for c in self.campaigns}

    def scores(self) -> dict[str, AnnotationScore]:
        """Consensus score per campaign id."""
        return {c.id: AnnotationScore(c.score) for c in self.campaigns}


class LabelSetupKind(Enum):
    LABEL_I = "I"
    LABEL_II = "II"
    LABEL_III = "III"


# score -> binary label (1 fraud, 0 not-fraud); missing score means dropped
_LABEL_I_MAP = {1: 1, 2: 1, 4: 0, 5: 0}
_LABEL_II_MAP = {1: 1, 5: 0}
_LABEL_III_TEST_MAP = {2: 1, 4: 0}

FRAUD = 1
NOT_FRAUD = 0


@dataclass(frozen=True)
class LabeledSet:
    """(campaign id, binary label) pairs; labels are 1=fraud, 0=not-fraud."""

    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for _, label in self.entries:
            if label not in (0, 1):
                raise ValueError(f"labels must be binary, got {label}")

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> tuple[str, ...]:
        return tuple(cid for cid, _ in self.entries)

    def labels(self) -> dict[str, int]:
        return dict(self.entries)

    def ids_with_label(self, label: int) -> tuple[str, ...]:
        return tuple(cid for cid, lab in self.entries if lab == label)


def description_problem(description: str) -> str | None:
    """Reason a description is unusable, or None if it passes the bar."""
    if not isinstance(description, str) or not description.strip():
        return "insufficient text"
    if len(word_tokens(description)) < MIN_DESCRIPTION_TOKENS:
        return "insufficient text"
    if not any(t in description for t in SENTENCE_TERMINATORS):
        return "insufficient text"
    return None


def _parse_created_at(raw: str, line_no: int) -> datetime:
    text = str(raw)
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        return datetime.fromisoformat(text)
    except ValueError as exc:
        raise MalformedRecordError(line_no, f"bad created_at {raw!r}: {exc}") from None


def _parse_record(record: dict, line_no: int) -> Campaign:
    for key in REQUIRED_KEYS:
        if key not in record:
            raise MalformedRecordError(line_no, f"missing required key {key!r}")
    score = record["score"]
    if not isinstance(score, int) or score not in range(6):
        raise MalformedRecordError(line_no, f"score must be an integer in 0..5, got {score!r}")

    goal = None
    if record.get("goal_minor") is not None:
        goal_minor = record["goal_minor"]
        if not isinstance(goal_minor, int):
            raise MalformedRecordError(line_no, f"goal_minor must be an integer, got {goal_minor!r}")
        goal = Money(goal_minor, str(record.get("goal_currency", "USD")))

    annotations = []
    for annotator, ann_score in sorted(dict(record.get("annotator_scores") or {}).items()):
        if not isinstance(ann_score, int) or ann_score not in range(6):
            raise MalformedRecordError(line_no, f"annotator score must be in 0..5, got {ann_score!r}")
        annotations.append(AnnotationScore(ann_score, annotator))

    metadata = dict(record.get("metadata") or {})
    known = set(REQUIRED_KEYS) | set(OPTIONAL_KEYS)
    for key, value in record.items():
        if key not in known:
            metadata[key] = value

    duration = record.get("duration_days")
    return Campaign(
        id=str(record["id"]),
        platform=Platform.parse(record["platform"]),
        title=str(record["title"]),
        description=str(record["description"]),
        category=str(record["category"]),
        created_at=_parse_created_at(record["created_at"], line_no),
        score=score,
        duration_days=float(duration) if duration is not None else None,
        goal=goal,
        images=tuple(str(p) for p in record.get("images") or ()),
        metadata=metadata,
        annotations=tuple(annotations),
    )


def load_corpus(path) -> Corpus:
    """Read a JSON-lines corpus file, one campaign per line.

    Records whose description is too short to feed the text extractors are
    skipped and reported with a reason; structural problems (unparseable
    line, missing keys, duplicate ids) raise instead.
    """
    campaigns: list[Campaign] = []
    skipped: list[SkippedRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(line_no, f"invalid JSON: {exc}") from None
            if not isinstance(record, dict):
                raise MalformedRecordError(line_no, "record is not a JSON object")
            campaign = _parse_record(record, line_no)
            if campaign.id in seen:
                raise DuplicateIdError(line_no, campaign.id)
            seen.add(campaign.id)
            problem = description_problem(campaign.description)
            if problem is not None:
                skipped.append(SkippedRecord(line_no, campaign.id, problem))
                continue
            campaigns.append(campaign)
    return Corpus(tuple(campaigns), tuple(skipped))


def campaign_to_record(campaign: Campaign) -> dict:
    record: dict = {
        "id": campaign.id,
        "platform": campaign.platform.value,
        "title": campaign.title,
        "description": campaign.description,
        "category": campaign.category,
        "created_at": campaign.created_at.isoformat(),
        "score": campaign.score,
    }
    if campaign.duration_days is not None:
        record["duration_days"] = campaign.duration_days
    if campaign.goal is not None:
        record["goal_minor"] = campaign.goal.minor
        record["goal_currency"] = campaign.goal.currency
    if campaign.images:
        record["images"] = list(campaign.images)
    if campaign.metadata:
        record["metadata"] = dict(campaign.metadata)
    if campaign.annotations:
        record["annotator_scores"] = {a.annotator_id: a.score for a in campaign.annotations}
    return record


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for campaign in corpus:
            fh.write(json.dumps(campaign_to_record(campaign), sort_keys=True) + "\n")


def apply_label_setup(
    corpus: Corpus,
    scores: Mapping[str, AnnotationScore],
    setup: LabelSetupKind,
):
    """Group campaigns into binary labels per the configured setup.

    Returns (labeled, dropped_ids) for setups I and II, and
    ((train, test), dropped_ids) for the train-on-strong/test-on-weak
    protocol (setup III).
    """
    for campaign in corpus:
        if campaign.id not in scores:
            raise MissingScoreError(campaign.id)

    def group(mapping: Mapping[int, int]) -> list[tuple[str, int]]:
        return [
            (c.id, mapping[scores[c.id].score])
            for c in corpus
            if scores[c.id].score in mapping
        ]

    if setup is LabelSetupKind.LABEL_I:
        kept = group(_LABEL_I_MAP)
    elif setup is LabelSetupKind.LABEL_II:
        kept = group(_LABEL_II_MAP)
    else:
        train = LabeledSet(tuple(group(_LABEL_II_MAP)))
        test = LabeledSet(tuple(group(_LABEL_III_TEST_MAP)))
        used = set(train.ids()) | set(test.ids())
        dropped = tuple(c.id for c in corpus if c.id not in used)
        return (train, test), dropped

    labeled = LabeledSet(tuple(kept))
    kept_ids = set(labeled.ids())
    dropped = tuple(c.id for c in corpus if c.id not in kept_ids)
    return labeled, dropped


# Landis-Koch interpretation bands for kappa, lower-bound inclusive.
_LANDIS_KOCH = (
    (0.8, "almost perfect"),
    (0.6, "substantial"),
    (0.4, "moderate"),
    (0.2, "fair"),
    (0.0, "slight"),
)


def landis_koch_band(kappa: float) -> str:
    for lower, band in _LANDIS_KOCH:
        if kappa >= lower:
            return band
    return "poor"


def cohens_kappa(a: Sequence, b: Sequence) -> tuple[float, str]:
    """Chance-corrected agreement between two annotation sequences.

    kappa = (p_o - p_e) / (1 - p_e), with p_e from the product of the
    marginal label frequencies. Perfect trivial agreement (p_o = p_e = 1,
    i.e. both annotators constant and equal) returns kappa = 1 by
    convention.
    """
    if len(a) != len(b):
        raise ValueError(f"sequences differ in length: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValueError("sequences must be nonempty")
    n = len(a)
    labels = sorted(set(a) | set(b), key=repr)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    p_e = sum((list(a).count(lab) / n) * (list(b).count(lab) / n) for lab in labels)
    if p_e == 1.0:
        kappa = 1.0 if p_o == 1.0 else 0.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return kappa, landis_koch_band(kappa)
