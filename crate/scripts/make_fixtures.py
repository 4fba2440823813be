#!/usr/bin/env python3
"""Writes the graph snapshots and datasets under crates/core/fixtures.

Snapshots use the same layout and checksum as the Rust writer, and edges are
written in the order the Rust side renders them, so loading and re-rendering a
fixture reproduces it byte for byte.
"""

import csv
import hashlib
import json
import random
import re
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"

STOP = set("""i me my myself we our ours ourselves you your yours yourself yourselves he him
his himself she her hers herself it its itself they them their theirs themselves what which
who whom this that these those am is are was were be been being have has had having do does
did doing a an the and but if or because as until while of at by for with about against
between into through during before after above below to from up down in out on off over
under again further then once here there when where why how all any both each few more most
other some such no nor not only own same so than too very s t can will just don should
now""".split())
assert len(STOP) == 127


def tokenize(text):
    out = []
    for tok in re.split(r"[^A-Za-z0-9]+", text):
        tok = tok.lower()
        if not tok or tok in STOP:
            continue
        out.append("n" + tok if tok[0].isdigit() else tok)
    return out


def write_snapshot(path, tag, edges, fetched):
    store = {}
    for head, tail, weight in edges:
        assert head != tail, (head, tail)
        key = (min(head, tail), max(head, tail))
        if key in store:
            h, t, w = store[key]
            store[key] = (h, t, max(w, weight))
        else:
            store[key] = (head, tail, float(weight))
    lines = [f"#mgl-snapshot v1 {tag}\n"]
    for key in sorted(store):
        h, t, w = store[key]
        lines.append(f"related_to({h}, {t}, {w!r}).\n")
    words = sorted(set(fetched))
    for i in range(0, len(words), 16):
        lines.append("#fetched: " + " ".join(words[i:i + 16]) + "\n")
    body = "".join(lines)
    digest = hashlib.sha256(body.encode()).hexdigest()
    path.write_text(body + f"#sha256: {digest}\n")


def parse_edges(text):
    edges = []
    for line in text.strip().splitlines():
        line = line.split("#")[0].strip()
        if not line:
            continue
        parts = line.split()
        weight = float(parts[-1]) if re.match(r"^[0-9.]+$", parts[-1]) else 1.0
        names = parts[:-1] if re.match(r"^[0-9.]+$", parts[-1]) else parts
        head = names[0]
        for tail in names[1:]:
            edges.append((head, tail, weight))
    return edges


# Task classification data: words grouped with the terms the graph relates
# them to. `head tail... [weight]`.
TASK_EDGES = """
call phone telephone 2.0
mother family 4.0
mother mom parent 3.0
grandma family grandmother 3.0
grandpa family 2.5
sister family sibling 3.0
kids family children 2.5
kids school 1.5
parents family 3.5
dad family father 3.0
wedding marriage ceremony 2.0
marriage family 1.5
son family 2.5
baby family child 2.0
brother family sibling 2.5
reunion family 2.0
aunt family relative 2.0
husband family wife 2.5
cousin relative 2.0
relative family 1.5
daughter family 2.5
nephew relative 2.0
house home 3.0
home family 2.0
dog pet 2.0
pet family 1.0
birthday party cake 2.0
present gift 2.0
holiday vacation 2.0
doctor hospital 2.0
car drive 2.0
dinner food meal 2.0
lunch food 2.0
cook food kitchen 2.0
kitchen home 1.0
story book 1.5
guests party 1.5
card letter 1.0
walk exercise 1.5
graduation school 2.0
cookies bake 2.0
picnic park 2.0
chat talk 1.5
video film 1.5
email mail letter 2.0
boss work manager 3.0
project work plan 2.0
deadline work 1.5
slides presentation 2.0
presentation work 1.5
client business customer 2.0
meeting work office 2.5
report work document 2.0
quarterly business 1.5
interview job 2.5
job work 3.0
candidate job 2.0
contract business law 2.0
lawyer law 2.5
letter mail 2.0
manager work boss 2.5
budget money finance 2.0
spreadsheet work excel 1.5
team work sport 1.5
office work 3.0
bug code 2.0
code programming work 1.5
release software 1.5
proposal business 2.0
sales business 2.0
supplier business 2.0
invoice business money 2.0
room house 1.0
gym exercise sport 3.0
swim water sport 3.0
swim exercise 2.0
lesson school 2.0
pool swim water 2.0
football sport ball 3.0
practice sport training 1.5
run sport exercise 2.5
marathon run sport 2.5
training exercise 2.0
tennis sport 3.0
court tennis law 1.5
jogging run exercise 2.0
yoga exercise 2.5
class school 2.0
cycling sport bike 2.5
race sport 2.0
basketball sport ball 3.0
exercise sport 2.0
shop store 2.0
registering register 1.0
"""

TASK_TEST = [
    ("call mother", "family"),
    ("visit grandma on sunday", "family"),
    ("buy birthday present for sister", "family"),
    ("pick up kids from school", "family"),
    ("dinner with parents", "family"),
    ("help dad fix the car", "family"),
    ("plan wedding anniversary", "family"),
    ("read bedtime story to son", "family"),
    ("take baby to doctor", "family"),
    ("phone brother about holiday", "family"),
    ("clean house before guests arrive", "family"),
    ("cook lunch for family reunion", "family"),
    ("write card to aunt", "family"),
    ("walk the dog with husband", "family"),
    ("celebrate cousin graduation", "family"),
    ("email boss about project deadline", "work"),
    ("prepare slides for client meeting", "work"),
    ("submit quarterly report", "work"),
    ("schedule interview with candidate", "work"),
    ("review contract with lawyer", "work"),
    ("write letter to manager", "work"),
    ("update budget spreadsheet", "work"),
    ("attend team meeting at office", "work"),
    ("fix bug in code before release", "work"),
    ("go to gym", "sport"),
    ("swim lesson at pool", "sport"),
    ("football practice after school", "sport"),
    ("run marathon training", "sport"),
    ("book tennis court", "sport"),
]

TASK_TRAIN = [
    ("hug mother", "family"),
    ("visit grandpa", "family"),
    ("bake cookies with daughter", "family"),
    ("video chat with nephew", "family"),
    ("email client proposal", "work"),
    ("finish sales report", "work"),
    ("book meeting room", "work"),
    ("call supplier about invoice", "work"),
    ("go jogging", "sport"),
    ("yoga class", "sport"),
    ("cycling race", "sport"),
    ("play basketball", "sport"),
]

NUMBERS = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"]
COLOURS = ["red", "green", "blue"]
SYNTHETIC = [
    (f"{signal} {n} {COLOURS[i % 3]}", cat)
    for cat, signal in [("alpha", "ant"), ("beta", "bee")]
    for i, n in enumerate(NUMBERS)
]
SYNTHETIC_EDGES = """
alpha ant 2.0
beta bee 2.0
ant insect 1.0
bee insect 1.0
red colour 1.0
green colour 1.0
blue colour 1.0
one number 1.0
two number 1.0
three number 1.0
four number 1.0
five number 1.0
six number 1.0
seven number 1.0
eight number 1.0
nine number 1.0
ten number 1.0
"""

NEWS_CATEGORIES = {
    "ENVIRONMENT": ["climate", "pollution", "forest", "recycling", "carbon", "wildlife",
                    "ocean", "emissions", "drought", "solar", "plastic", "species"],
    "SPORTS": ["football", "coach", "league", "tournament", "olympic", "striker",
               "championship", "tennis", "marathon", "stadium", "referee", "season"],
    "TECH": ["smartphone", "software", "startup", "robot", "internet", "chip",
             "app", "cyber", "computer", "gadget", "algorithm", "cloud"],
    "POLITICS": ["election", "senate", "president", "vote", "campaign", "congress",
                 "governor", "policy", "minister", "parliament", "ballot", "party"],
    "BUSINESS": ["market", "stocks", "profit", "merger", "bank", "economy",
                 "investor", "retail", "shares", "trade", "earnings", "company"],
}
NEWS_LABEL_WORD = {
    "ENVIRONMENT": "environment",
    "SPORTS": "sports",
    "TECH": "tech",
    "POLITICS": "politics",
    "BUSINESS": "business",
}
NEWS_FILLER = ["new", "report", "week", "city", "study", "plan", "year", "world", "big",
               "says", "future", "local", "leaders", "record", "fans", "warns", "rise",
               "fall", "top", "people"]
NEWS_TEMPLATES = [
    "{a} {f} {b}",
    "{f} {a} {g}",
    "{a} {b} {f} {g}",
    "{f} {g} {a}",
    "{a} {f}",
]


def task_snapshot():
    edges = parse_edges(TASK_EDGES)
    words = set()
    for text, cat in TASK_TEST + TASK_TRAIN:
        words.update(tokenize(text))
        words.add(cat)
    for extra in ["mother", "call", "swim", "exercise", "shop", "letter", "registering", "gym",
                  "visit", "home", "lesson"]:
        words.add(extra)
    write_snapshot(FIXTURES / "tasks_bk.facts", "fixture task-classification", edges, words)


def write_csv(path, rows):
    with path.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["text", "category"])
        w.writerows(rows)


def synthetic():
    rows = list(SYNTHETIC)
    random.Random(11).shuffle(rows)
    write_csv(FIXTURES / "synthetic.csv", rows)
    words = {w for t, _ in rows for w in tokenize(t)} | {"alpha", "beta"}
    write_snapshot(FIXTURES / "synthetic_bk.facts", "fixture synthetic", parse_edges(SYNTHETIC_EDGES), words)


def news():
    rng = random.Random(2022)
    lines = []
    cats = list(NEWS_CATEGORIES)
    for i in range(1000):
        cat = cats[i % len(cats)] if i % 7 else rng.choice(cats)
        topic = NEWS_CATEGORIES[cat]
        headline = rng.choice(NEWS_TEMPLATES).format(
            a=rng.choice(topic).capitalize(),
            b=rng.choice(topic),
            f=rng.choice(NEWS_FILLER),
            g=rng.choice(NEWS_FILLER),
        )
        record = {"category": cat, "headline": headline, "authors": "", "date": f"2018-01-{1 + i % 28:02d}"}
        if i == 417:
            record = {"category": cat, "short_description": headline}
        lines.append(json.dumps(record))
    (FIXTURES / "news_sample.jsonl").write_text("\n".join(lines) + "\n")

    edges = []
    for cat, topic in NEWS_CATEGORIES.items():
        label = NEWS_LABEL_WORD[cat]
        for j, word in enumerate(topic):
            # Two thirds of the topic words relate to the label directly, the
            # rest only through a shared neighbour.
            if j % 3 != 2:
                edges.append((word, label, 1.0 + (j % 4) * 0.5))
            else:
                edges.append((word, topic[j - 1], 1.5))
    for k, filler in enumerate(NEWS_FILLER):
        edges.append((filler, NEWS_FILLER[(k + 1) % len(NEWS_FILLER)], 1.0))
    # A few cross-topic links make some headlines ambiguous.
    edges += [("solar", "tech", 1.0), ("economy", "politics", 1.5), ("plastic", "business", 1.0),
              ("olympic", "politics", 1.0)]
    words = set(NEWS_FILLER) | set(NEWS_LABEL_WORD.values())
    for topic in NEWS_CATEGORIES.values():
        words.update(topic)
    words.update(c.lower() for c in NEWS_CATEGORIES)
    write_snapshot(FIXTURES / "news_bk.facts", "fixture news-category", edges, words)


def main():
    task_snapshot()
    write_csv(FIXTURES / "tasks_test.csv", TASK_TEST)
    write_csv(FIXTURES / "tasks_train.csv", TASK_TRAIN)
    synthetic()
    news()


if __name__ == "__main__":
    main()
