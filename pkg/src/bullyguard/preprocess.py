"""Six-stage text preprocessing pipeline for informal Indonesian comments.

Stage order is fixed: (1) case folding, (2) cleaning, (3) character-elongation
collapse followed by slang normalization, (4) stopword removal, (5) stemming,
(6) tokenization. Stages can be disabled individually for ablation but never
reordered. Stages 3-5 operate per word, so the pipeline splits on whitespace
after cleaning and stage 6 is the final materialization of the token list.

Lexicons and stemmer rules are plain-text resources (see load_lexicon /
load_stemmer_rules); packaged starter files live under bullyguard/data.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


class LexiconError(Exception):
    """Malformed lexicon or stemmer-rules file."""


_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_MENTION_RE = re.compile(r"@[\w.]+")
_HASHTAG_RE = re.compile(r"#\w+")
_NON_ALPHA_RE = re.compile(r"[^a-z ]")
_SPACE_RE = re.compile(r" +")


@dataclass(frozen=True)
class NormalizationLexicon:
    slang_map: dict[str, str]
    stopwords: frozenset[str]
    root_words: frozenset[str]

    def __post_init__(self):
        for slang, canonical in self.slang_map.items():
            if slang != slang.lower() or any(ch.isspace() for ch in slang):
                raise LexiconError(f"slang key must be lowercase and whitespace-free: {slang!r}")
            if slang == canonical:
                raise LexiconError(f"slang entry maps to itself: {slang!r}")
            if not canonical or not re.fullmatch(r"[a-z]+(?: [a-z]+)*", canonical):
                raise LexiconError(f"slang value must be lowercase words: {canonical!r}")
        for word in self.stopwords:
            if word != word.lower():
                raise LexiconError(f"stopword must be lowercase: {word!r}")


@dataclass(frozen=True)
class PrefixRule:
    cls: str            # prefix family; a family is stripped at most once
    pattern: str        # literal prefix to remove
    recodings: tuple[str, ...]  # replacement initial(s) to try; "" = plain strip


@dataclass(frozen=True)
class StemmerRules:
    inflectional_suffixes: tuple[str, ...]
    derivational_suffixes: tuple[str, ...]
    prefix_rules: tuple[PrefixRule, ...]
    forbidden_pairs: frozenset[tuple[str, str]]  # (prefix class, derivational suffix)
    min_stem_length: int = 3


@dataclass(frozen=True)
class PipelineConfig:
    """Stage enable flags, in the fixed stage order."""
    case_fold: bool = True
    clean: bool = True
    normalize: bool = True          # elongation collapse + slang lookup
    remove_stopwords: bool = True
    stem: bool = True
    tokenize: bool = True           # final materialization; kept for stage traces
    elongation_min_run: int = 3

    def flags(self) -> tuple[bool, ...]:
        return (self.case_fold, self.clean, self.normalize,
                self.remove_stopwords, self.stem, self.tokenize)


# ----------------------------------------------------------------------------
# lexicon / rules file loading
# ----------------------------------------------------------------------------

def _iter_content_lines(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LexiconError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped


def load_slang_map(path: str | Path) -> dict[str, str]:
    """One tab-separated ``slang<TAB>canonical`` pair per line; '#' comments."""
    slang = {}
    for lineno, line in _iter_content_lines(Path(path)):
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"{path}:{lineno}: expected 'slang<TAB>canonical', got {line!r}")
        slang[parts[0].strip()] = parts[1].strip()
    return slang


def load_wordlist(path: str | Path) -> frozenset[str]:
    """One lowercase word per line; '#' comments and blank lines ignored."""
    return frozenset(line for _, line in _iter_content_lines(Path(path)))


def load_lexicon(
    slang_path: str | Path,
    stopwords_path: str | Path,
    root_words_path: str | Path,
) -> NormalizationLexicon:
    return NormalizationLexicon(
        slang_map=load_slang_map(slang_path),
        stopwords=load_wordlist(stopwords_path),
        root_words=load_wordlist(root_words_path),
    )


def load_stemmer_rules(path: str | Path) -> StemmerRules:
    """Parse the stemmer rules file.

    Directives, one per line:
      ``min_stem_length N``
      ``inflectional sfx1 sfx2 ...``   (ordered)
      ``derivational sfx1 sfx2 ...``   (ordered)
      ``prefix <class> <pattern> <recodings>``  recodings comma-separated, '-' = plain strip
      ``forbid <class> <suffix>``
    """
    min_len = 3
    inflectional: list[str] = []
    derivational: list[str] = []
    prefixes: list[PrefixRule] = []
    forbidden: set[tuple[str, str]] = set()
    for lineno, line in _iter_content_lines(Path(path)):
        parts = line.split()
        directive = parts[0]
        if directive == "min_stem_length" and len(parts) == 2:
            min_len = int(parts[1])
        elif directive == "inflectional":
            inflectional.extend(parts[1:])
        elif directive == "derivational":
            derivational.extend(parts[1:])
        elif directive == "prefix" and len(parts) == 4:
            recodings = tuple("" if r == "-" else r for r in parts[3].split(","))
            prefixes.append(PrefixRule(cls=parts[1], pattern=parts[2], recodings=recodings))
        elif directive == "forbid" and len(parts) == 3:
            forbidden.add((parts[1], parts[2]))
        else:
            raise LexiconError(f"{path}:{lineno}: bad rules directive {line!r}")
    if not inflectional or not derivational or not prefixes:
        raise LexiconError(f"{path}: rules file must define inflectional, derivational, and prefix rules")
    return StemmerRules(
        inflectional_suffixes=tuple(inflectional),
        derivational_suffixes=tuple(derivational),
        prefix_rules=tuple(prefixes),
        forbidden_pairs=frozenset(forbidden),
        min_stem_length=min_len,
    )


def _data_path(name: str) -> Path:
    return Path(str(resources.files("bullyguard").joinpath("data", name)))


def default_lexicon_paths() -> dict[str, Path]:
    return {
        "slang": _data_path("slang.tsv"),
        "stopwords": _data_path("stopwords.txt"),
        "root_words": _data_path("rootwords.txt"),
        "stemmer_rules": _data_path("stemmer_rules.txt"),
    }


def load_default_lexicon() -> NormalizationLexicon:
    paths = default_lexicon_paths()
    return load_lexicon(paths["slang"], paths["stopwords"], paths["root_words"])


def load_default_stemmer_rules() -> StemmerRules:
    return load_stemmer_rules(default_lexicon_paths()["stemmer_rules"])


# ----------------------------------------------------------------------------
# pipeline stages
# ----------------------------------------------------------------------------

def case_fold(text: str) -> str:
    return text.lower()


def clean(text: str) -> str:
    """Strip URLs, @mentions, #hashtags, then everything outside [a-z ].

    Removal order matters: URLs first (they may contain '@' or '#'), then
    mentions and hashtags (marker plus tag word), then every remaining
    non-alphabetic character becomes a space; space runs collapse and the
    result is trimmed. Expects case-folded input.
    """
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = _HASHTAG_RE.sub(" ", text)
    text = _NON_ALPHA_RE.sub(" ", text)
    return _SPACE_RE.sub(" ", text).strip()


def collapse_elongation(word: str, min_run: int = 3) -> str:
    """Collapse runs of >= min_run identical letters to a single letter.

    The default threshold of 3 preserves legitimate double letters in
    Indonesian roots ("maaf", "tunggu") while squashing typographic emphasis
    ("jelekkk" -> "jelek").
    """
    if min_run < 2:
        raise ValueError("min_run must be at least 2")
    return re.sub(r"(.)\1{%d,}" % (min_run - 1), r"\1", word)


def normalize_slang(word: str, lexicon: NormalizationLexicon) -> str:
    """Exact-match slang lookup; unknown words pass through unchanged."""
    return lexicon.slang_map.get(word, word)


def remove_stopwords(tokens: list[str], lexicon: NormalizationLexicon) -> list[str]:
    return [tok for tok in tokens if tok not in lexicon.stopwords]


def tokenize(text: str) -> list[str]:
    return text.split()


def _strip_prefixes(
    word: str,
    stripped_suffix: str | None,
    rules: StemmerRules,
    roots: frozenset[str],
) -> tuple[str | None, str]:
    """Strip up to three derivational prefixes with recoding.

    At each depth every matching rule's recoding variants are probed against
    the dictionary; the first dictionary hit wins. Absent a hit, the first
    matching variant is committed and stripping continues one level deeper.
    Returns (dictionary hit or None, end state of the committed path).
    """
    current = word
    used: set[str] = set()
    for _ in range(3):
        committed = None
        for rule in rules.prefix_rules:
            if rule.cls in used:
                continue
            if stripped_suffix is not None and (rule.cls, stripped_suffix) in rules.forbidden_pairs:
                continue
            if not current.startswith(rule.pattern):
                continue
            stem_part = current[len(rule.pattern):]
            for recode in rule.recodings:
                candidate = recode + stem_part
                if len(candidate) < rules.min_stem_length:
                    continue
                if candidate in roots:
                    return candidate, candidate
                if committed is None:
                    committed = (candidate, rule.cls)
        if committed is None:
            break
        current, cls = committed
        used.add(cls)
    return None, current


def stem(word: str, rules: StemmerRules, lexicon: NormalizationLexicon) -> str:
    """Confix-stripping stem of a lowercase alphabetic word.

    Dictionary-confirmed at every step: (1) known roots return unchanged;
    (2) one inflectional suffix is stripped; (3) one derivational suffix is
    stripped, with the alternatives kept as fallback candidates since e.g.
    '-an' shadows '-kan'; (4) up to three prefixes are stripped with recoding.
    Without a dictionary hit the result of rule-only stripping along the
    primary path is returned. No step may shorten a word below
    min_stem_length.
    """
    roots = lexicon.root_words
    if not word:
        return word
    if word in roots:
        return word

    base = word
    for sfx in rules.inflectional_suffixes:
        if base.endswith(sfx) and len(base) - len(sfx) >= rules.min_stem_length:
            base = base[: -len(sfx)]
            break
    if base in roots:
        return base

    deriv_candidates: list[tuple[str, str]] = []
    for sfx in rules.derivational_suffixes:
        if base.endswith(sfx) and len(base) - len(sfx) >= rules.min_stem_length:
            candidate = base[: -len(sfx)]
            if candidate in roots:
                return candidate
            deriv_candidates.append((candidate, sfx))

    search_order: list[tuple[str, str | None]] = []
    if deriv_candidates:
        search_order.append(deriv_candidates[0])
    search_order.append((base, None))
    search_order.extend(deriv_candidates[1:])

    fallback: str | None = None
    for candidate, sfx in search_order:
        hit, end_state = _strip_prefixes(candidate, sfx, rules, roots)
        if hit is not None:
            return hit
        if fallback is None:
            fallback = end_state
    return fallback if fallback is not None else base


def run_pipeline(
    text: str,
    config: PipelineConfig,
    lexicon: NormalizationLexicon,
    rules: StemmerRules,
) -> list[str]:
    """Apply the enabled stages in the fixed order and return tokens."""
    return run_pipeline_trace(text, config, lexicon, rules)[-1][1]


def run_pipeline_trace(
    text: str,
    config: PipelineConfig,
    lexicon: NormalizationLexicon,
    rules: StemmerRules,
) -> list[tuple[str, str | list[str]]]:
    """Like run_pipeline but returns the intermediate state after each stage.

    Yields six (stage name, state) pairs; states are strings for stages 1-2
    and token lists afterwards. Disabled stages pass their input through.
    """
    state = text
    trace: list[tuple[str, str | list[str]]] = []
    state = case_fold(state) if config.case_fold else state
    trace.append(("case_fold", state))
    state = clean(state) if config.clean else state
    trace.append(("clean", state))

    tokens = tokenize(state)
    if config.normalize:
        normalized: list[str] = []
        for tok in tokens:
            tok = collapse_elongation(tok, config.elongation_min_run)
            normalized.extend(normalize_slang(tok, lexicon).split(" "))
        tokens = [tok for tok in normalized if tok]
    trace.append(("normalize", list(tokens)))

    if config.remove_stopwords:
        tokens = remove_stopwords(tokens, lexicon)
    trace.append(("stopwords", list(tokens)))

    if config.stem:
        tokens = [stem(tok, rules, lexicon) for tok in tokens]
    trace.append(("stem", list(tokens)))

    trace.append(("tokenize", list(tokens)))
    return trace


def preprocess_corpus(
    texts: list[str],
    config: PipelineConfig,
    lexicon: NormalizationLexicon,
    rules: StemmerRules,
) -> list[list[str]]:
    return [run_pipeline(text, config, lexicon, rules) for text in texts]
