#!/usr/bin/env python3
"""Generate the bundled synthetic comment corpus.

Produces a schema-compatible, balanced, duplicate-free CSV of Indonesian-style
Instagram comments (insult-heavy Bullying class, praise-heavy Non-bullying
class) with realistic social-media noise: slang spellings, character
elongation, mentions, hashtags, URLs, emoji, and mixed punctuation. Fully
deterministic under the pinned PRNG, so regenerating with the same seed
reproduces the committed file byte for byte.

Usage: python scripts/generate_corpus.py [--out data/comments_synthetic.csv]
       [--n 200] [--seed 7]
"""

from __future__ import annotations

import argparse
import datetime
from pathlib import Path

from bullyguard.corpus import CommentRecord, Label, write_corpus
from bullyguard.rng import Rng

COMMENTERS = [
    "rina_88", "budi.jkt", "sari_manis", "andi_gokil", "dewi.lestari",
    "tono_channel", "maya_chan", "rizky.pratama", "lia_unyu", "agus_santoso",
    "putri.ayu", "bang_jali", "nenglita", "doni_keren", "fitri_f",
    "yoga.adi", "selvi_sel", "arif_212", "mbak_tutik", "koko_liem",
]

TARGETS = ["artis_cantik", "penyanyi_top", "selebgram_hits", "aktor_muda", "chef_seleb"]

INSULTS = [
    "jelek", "bego", "goblok", "tolol", "norak", "alay", "lebay",
    "kampungan", "gendut", "bodoh", "jijik", "sampah", "culun", "cupu",
    "dekil", "songong", "sok", "bau", "aneh", "gila",
]

PRAISES = [
    "cantik", "keren", "ganteng", "bagus", "hebat", "mantap", "manis",
    "imut", "lucu", "pintar", "rajin", "ramah", "kece", "indah", "elok",
    "sopan", "cerdas", "menawan", "anggun", "syahdu",
]

SLANG_VARIANTS = {
    "banget": ["bgt", "bngt", "bet"],
    "tidak": ["gak", "ga", "nggak", "kagak"],
    "kamu": ["lu", "lo", "km"],
    "saya": ["gw", "gue"],
    "sudah": ["udah", "udh", "dah"],
    "jelek": ["jlk", "jlek"],
    "bego": ["bgo", "b3go"],
    "kalau": ["kalo", "klo"],
    "seperti": ["kyk", "kayak"],
    "memang": ["emang", "emg"],
    "sekarang": ["skrg"],
    "juga": ["jg", "jga"],
    "sama": ["sm"],
    "yang": ["yg"],
}

EMOJI = ["😂", "😡", "🤮", "😍", "❤️", "👍", "🙏", "🔥", "😭"]

BULLY_TEMPLATES = [
    "dasar {insult} kamu tidak pantas jadi artis",
    "muka kamu {insult} banget seperti {insult2}",
    "ih {insult} banget sih kamu",
    "kamu itu {insult} dan {insult2} sekali",
    "sumpah {insult} banget penampilan kamu",
    "tidak ada bagusnya sama sekali dasar {insult}",
    "artis {insult} seperti kamu mending berhenti saja",
    "suaranya {insult} banget bikin sakit telinga",
    "badan kamu {insult} tidak cocok pakai baju itu",
    "kelakuan kamu {insult} banget memang {insult2}",
    "najis banget lihat muka {insult} kamu",
    "orang {insult} kok dipuja puja dasar {insult2}",
]

PRAISE_TEMPLATES = [
    "kamu {praise} banget aku suka sekali",
    "selalu {praise} dan {praise2} penampilannya",
    "sumpah {praise} banget lagunya aku suka",
    "kakak memang {praise} semoga sukses terus",
    "aku suka banget kamu {praise} dan {praise2}",
    "penampilan kamu hari ini {praise} sekali",
    "suaranya {praise} banget bikin hati adem",
    "semangat terus kak kamu {praise} sekali",
    "foto yang ini {praise} banget sukses selalu",
    "idola aku memang paling {praise} dan {praise2}",
    "acara kemarin {praise} banget; sukses terus kak",
    "senyumnya {praise} bikin hari aku cerah",
]


def _maybe_slangify(rng: Rng, word: str, prob: float = 0.45) -> str:
    variants = SLANG_VARIANTS.get(word)
    if variants and rng.random() < prob:
        return variants[rng.randbelow(len(variants))]
    return word


def _maybe_elongate(rng: Rng, word: str, prob: float = 0.25) -> str:
    if word.isalpha() and rng.random() < prob:
        return word + word[-1] * (2 + rng.randbelow(3))
    return word


def _noise_words(rng: Rng, text: str) -> str:
    words = [
        _maybe_elongate(rng, _maybe_slangify(rng, word))
        for word in text.split()
    ]
    return " ".join(words)


def _decorate(rng: Rng, text: str, target: str) -> str:
    if rng.random() < 0.35:
        text = f"@{target} " + text
    if rng.random() < 0.2:
        text = text + " #" + ("gofamteam" if rng.random() < 0.5 else "viral")
    if rng.random() < 0.12:
        text = text + " http://t.co/" + "".join(
            "abcdefghij"[rng.randbelow(10)] for _ in range(4)
        )
    if rng.random() < 0.3:
        text = text + " " + EMOJI[rng.randbelow(len(EMOJI))]
    roll = rng.random()
    if roll < 0.3:
        text = text + "!!"
    elif roll < 0.4:
        text = text + "..."
    return text


def _fill(rng: Rng, template: str, pool: list[str], keys: tuple[str, ...]) -> str:
    picks: dict[str, str] = {}
    for key in keys:
        if key in template:
            picks[key.strip("{}")] = pool[rng.randbelow(len(pool))]
    return template.format(**picks) if picks else template


def generate(n: int, seed: int) -> list[CommentRecord]:
    if n % 2:
        raise ValueError("n must be even for a balanced corpus")
    rng = Rng(seed)
    base_date = datetime.date(2024, 1, 1)
    seen: set[str] = set()
    records: list[CommentRecord] = []
    half = n // 2
    for label, templates in (
        (Label.BULLYING, BULLY_TEMPLATES),
        (Label.NON_BULLYING, PRAISE_TEMPLATES),
    ):
        made = 0
        while made < half:
            template = templates[rng.randbelow(len(templates))]
            if label is Label.BULLYING:
                text = _fill(rng, template, INSULTS, ("{insult}", "{insult2}"))
            else:
                text = _fill(rng, template, PRAISES, ("{praise}", "{praise2}"))
            target = TARGETS[rng.randbelow(len(TARGETS))]
            text = _decorate(rng, _noise_words(rng, text), target)
            if text in seen:
                continue
            seen.add(text)
            made += 1
            records.append(CommentRecord(
                index=len(records) + 1,
                commenter_handle=COMMENTERS[rng.randbelow(len(COMMENTERS))],
                text=text,
                label=label,
                posted_date=(base_date + datetime.timedelta(days=rng.randbelow(365))).isoformat(),
                target_handle=target,
            ))
    return records


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/comments_synthetic.csv")
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    records = generate(args.n, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_corpus(records, out)
    print(f"wrote {len(records)} records to {out}")


if __name__ == "__main__":
    main()
