#!/usr/bin/env python3
"""Regenerates the bundled lexicon and the synthetic demo corpus.

The demo corpus has twelve short documents, six per subset, built from
six pole vocabularies. Subset membership carries one contrast; two more
contrasts cut across both subsets, so three dimensions can be recovered.
Output is deterministic for a fixed seed.
"""

import argparse
import csv
import pathlib
import random

POLES = {
    "A+": "ethics committee consent publication retraction journal editor transparency "
          "repository liability translation integrity misconduct approval registration "
          "disclosure reviewer preprint accountability archive",
    "A-": "comparison remdesivir lopinavir favipiravir arm cohort control placebo baseline "
          "endpoint ratio hazard interval regression stratum propensity superiority benefit "
          "antibody plasma",
    "B+": "statistic variance deviation coefficient estimate significance threshold power "
          "sample bootstrap median quartile covariate model likelihood bias adjustment "
          "sensitivity confidence precision",
    "B-": "dissemination audience webinar conference presentation discussion outreach media "
          "podcast newsletter infographic platform communication public sharing dataset "
          "portal forum seminar broadcast",
    "C+": "hydroxychloroquine azithromycin ivermectin zinc dosage protocol outpatient regimen "
          "remedy cure antiviral prophylaxis tablet pharmacy prescription chloroquine efficacy "
          "viral clearance cocktail",
    "C-": "anxiety depression loneliness wellbeing stress burnout resilience counselling "
          "psychiatry insomnia mood isolation grief trauma mindfulness caregiver adolescent "
          "therapy worker lockdown",
}

BACKGROUND_SENTENCES = 70

# Shared background vocabulary, spread evenly over every document.
BACKGROUND = ("covid-19 pandemic patients treatment health hospital infection virus disease "
              "clinical outcome evidence research case symptom death risk population "
              "country week").split()

ADJECTIVES = {"antiviral", "viral", "public", "clinical"}

# Connectors use stopwords only, so every content token is a pole word.
TEMPLATES = [
    "The {0} of {1} was due to the {2} and {3}.",
    "This {0} with {1} was among the {2} for {3}.",
    "There were {0} and {1} in each {2} of {3}.",
    "Both {0} and {1} were also about {2} from {3}.",
    "Such {0} for the {1} was with {2} and the {3}.",
    "Each {0} of the {1} was then in {2} with {3}.",
]

# (subset, B pole, C pole) for documents 1..6 of each subset.
LAYOUT = {
    "endorsed": ["B+C+", "B+C+", "B+C-", "B-C+", "B-C-", "B-C-"],
    "controversial": ["B+C+", "B+C-", "B+C-", "B-C+", "B-C+", "B-C-"],
}

TITLES = {
    "A+": "publication ethics",
    "A-": "comparative treatment trials",
    "B+": "statistical analysis",
    "B-": "science communication",
    "C+": "outpatient treatment protocols",
    "C-": "mental health during lockdown",
}

FUNCTION_WORDS = [
    ("the", "DET"), ("a", "DET"), ("an", "DET"), ("this", "DET"), ("that", "DET"),
    ("these", "DET"), ("those", "DET"), ("each", "DET"), ("every", "DET"), ("both", "DET"),
    ("such", "DET"), ("some", "DET"), ("any", "DET"), ("no", "DET"), ("all", "DET"),
    ("of", "PREP"), ("in", "PREP"), ("on", "PREP"), ("at", "PREP"), ("by", "PREP"),
    ("for", "PREP"), ("with", "PREP"), ("from", "PREP"), ("to", "PREP"), ("about", "PREP"),
    ("among", "PREP"), ("between", "PREP"), ("into", "PREP"), ("during", "PREP"),
    ("without", "PREP"), ("within", "PREP"), ("after", "PREP"), ("before", "PREP"),
    ("and", "CONJ"), ("or", "CONJ"), ("but", "CONJ"), ("nor", "CONJ"), ("because", "CONJ"),
    ("although", "CONJ"), ("while", "CONJ"), ("if", "CONJ"), ("whether", "CONJ"),
    ("i", "PRON"), ("you", "PRON"), ("he", "PRON"), ("she", "PRON"), ("it", "PRON"),
    ("we", "PRON"), ("they", "PRON"), ("them", "PRON"), ("us", "PRON"), ("him", "PRON"),
    ("her", "PRON"), ("its", "PRON"), ("their", "PRON"), ("our", "PRON"), ("who", "PRON"),
    ("which", "PRON"), ("what", "PRON"),
    ("there", "ADV"), ("then", "ADV"), ("also", "ADV"), ("not", "ADV"), ("very", "ADV"),
    ("due", "ADJ"),
]

AUX = [
    ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"), ("be", "be"), ("been", "be"),
    ("being", "be"), ("am", "be"), ("has", "have"), ("have", "have"), ("had", "have"),
    ("having", "have"), ("do", "do"), ("does", "do"), ("did", "do"), ("done", "do"),
    ("can", "can"), ("could", "could"), ("may", "may"), ("might", "might"),
    ("must", "must"), ("shall", "shall"), ("should", "should"), ("will", "will"),
    ("would", "would"),
]

IRREGULAR_VERBS = [
    ("went", "go"), ("gone", "go"), ("took", "take"), ("taken", "take"), ("gave", "give"),
    ("given", "give"), ("found", "find"), ("made", "make"), ("saw", "see"), ("seen", "see"),
    ("began", "begin"), ("begun", "begin"), ("wrote", "write"), ("written", "write"),
    ("showed", "show"), ("shown", "show"), ("knew", "know"), ("known", "know"),
    ("thought", "think"), ("brought", "bring"), ("led", "lead"), ("held", "hold"),
    ("kept", "keep"), ("left", "leave"), ("met", "meet"), ("paid", "pay"), ("ran", "run"),
    ("said", "say"), ("sent", "send"), ("spent", "spend"), ("stood", "stand"),
    ("told", "tell"), ("understood", "understand"), ("won", "win"), ("became", "become"),
    ("chose", "choose"), ("chosen", "choose"), ("fell", "fall"), ("fallen", "fall"),
    ("got", "get"), ("gotten", "get"), ("grew", "grow"), ("grown", "grow"),
    ("rose", "rise"), ("risen", "rise"), ("spread", "spread"), ("put", "put"), ("set", "set"),
]

DOMAIN = [
    ("studies", "study", "VERB"), ("studies", "study", "NOUN"), ("study", "study", "NOUN"),
    ("study", "study", "VERB"), ("studied", "study", "VERB"), ("mortality", "mortality", "NOUN"),
    ("patients", "patient", "NOUN"), ("patient", "patient", "NOUN"), ("data", "data", "NOUN"),
    ("analyses", "analysis", "NOUN"), ("analysis", "analysis", "NOUN"),
    ("criteria", "criterion", "NOUN"), ("diagnoses", "diagnosis", "NOUN"),
    ("trials", "trial", "NOUN"), ("trial", "trial", "NOUN"), ("vaccines", "vaccine", "NOUN"),
    ("reduced", "reduce", "VERB"), ("reduces", "reduce", "VERB"), ("reduce", "reduce", "VERB"),
    ("treated", "treat", "VERB"), ("treats", "treat", "VERB"), ("treat", "treat", "VERB"),
    ("treatment", "treatment", "NOUN"), ("treatments", "treatment", "NOUN"),
    ("covid-19", "covid-19", "NOUN"), ("sars-cov-2", "sars-cov-2", "NOUN"),
    ("increased", "increase", "VERB"), ("effective", "effective", "ADJ"),
    ("better", "good", "ADJ"), ("best", "good", "ADJ"), ("worse", "bad", "ADJ"),
    ("children", "child", "NOUN"), ("women", "woman", "NOUN"), ("men", "man", "NOUN"),
    ("people", "people", "NOUN"),
]


def write_lexicon(path: pathlib.Path) -> None:
    lines = ["# surface<TAB>lemma<TAB>TAG; repeated surfaces list readings in preference order"]
    for word, tag in FUNCTION_WORDS:
        lines.append(f"{word}\t{word}\t{tag}")
    for surface, lemma in AUX:
        lines.append(f"{surface}\t{lemma}\tAUX")
    for surface, lemma in IRREGULAR_VERBS:
        lines.append(f"{surface}\t{lemma}\tVERB")
    for surface, lemma, tag in DOMAIN:
        lines.append(f"{surface}\t{lemma}\t{tag}")
    for words in list(POLES.values()) + [" ".join(BACKGROUND)]:
        for w in words.split():
            if w in ("patients", "treatment", "covid-19"):
                continue
            lines.append(f"{w}\t{w}\t{'ADJ' if w in ADJECTIVES else 'NOUN'}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def make_phrases(words, rng):
    """Ten four-word phrases; each word occurs in exactly two of them."""
    while True:
        slots = words[:] + words[:]
        rng.shuffle(slots)
        phrases = [slots[i:i + 4] for i in range(0, len(slots), 4)]
        if all(len(set(p)) == 4 for p in phrases):
            return phrases


def paragraph(phrases, reps, rng):
    items = [p for p in phrases for _ in range(reps)]
    rng.shuffle(items)
    return " ".join(rng.choice(TEMPLATES).format(*p) for p in items)


# Background sentences are phrased as open questions.
QUESTION_TEMPLATES = [
    "What is the {0} of {1} in {2} with {3}?",
    "How is {0} for {1} due to the {2} of {3}?",
    "Is there any {0} of {1} in the {2} for {3}?",
    "Which {0} of the {1} was in {2} and {3}?",
    "Does the {0} of {1} have {2} in {3}?",
]


def background(sentences, rng):
    return " ".join(rng.choice(QUESTION_TEMPLATES).format(*rng.sample(BACKGROUND, 4)).replace("covid-19", "COVID-19")
                    for _ in range(sentences))


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--data", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=13)
    args = ap.parse_args()
    data = pathlib.Path(args.data)
    rng = random.Random(args.seed)

    (data / "lexicon").mkdir(parents=True, exist_ok=True)
    write_lexicon(data / "lexicon" / "en-v1.tsv")

    phrases = {pole: make_phrases(words.split(), rng) for pole, words in POLES.items()}
    texts = data / "demo" / "texts"
    texts.mkdir(parents=True, exist_ok=True)
    rows = []
    for subset, prefix, a_pole, a_reps, bc_reps in (
        ("endorsed", "E", "A-", 3, 5),
        ("controversial", "C", "A+", 9, 2),
    ):
        for i, layout in enumerate(LAYOUT[subset], start=1):
            doc_id = f"{prefix}{i:02d}"
            poles = [a_pole, layout[:2], layout[2:]]
            paras = [paragraph(phrases[a_pole], a_reps, rng)]
            paras += [paragraph(phrases[p], bc_reps, rng) for p in poles[1:]]
            rng.shuffle(paras)
            paras.insert(0, background(BACKGROUND_SENTENCES, rng))
            title = "Notes on " + ", ".join(TITLES[p] for p in poles)
            (texts / f"{doc_id}.txt").write_text("\n\n".join(paras) + "\n", encoding="utf-8")
            rows.append([doc_id, subset, title, 2020 + i % 3, f"{doc_id}.txt"])

    with open(data / "demo" / "manifest.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "subset", "title", "year", "path"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
