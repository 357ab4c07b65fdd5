"""Writes the toy corpus (vertical and CoNLL-X) and analogy questions.

Run from this directory: python3 generate.py
Output is a pure function of SEED.
"""

import random

SEED = 20150601
REPEATS = 5
FILLERS = 400

CAPITAL_COMMON = [
    ("athens", "greece"), ("berlin", "germany"), ("paris", "france"),
    ("rome", "italy"), ("madrid", "spain"), ("london", "england"),
    ("tokyo", "japan"), ("moscow", "russia"),
]
CAPITAL_WORLD = [
    ("nairobi", "kenya"), ("lima", "peru"), ("hanoi", "vietnam"),
    ("cairo", "egypt"), ("ottawa", "canada"), ("dublin", "ireland"),
    ("oslo", "norway"), ("lisbon", "portugal"), ("havana", "cuba"),
    ("bangkok", "thailand"),
]
CITY_IN_STATE = [
    ("chicago", "illinois"), ("houston", "texas"), ("boston", "massachusetts"),
    ("denver", "colorado"), ("seattle", "washington"), ("phoenix", "arizona"),
    ("miami", "florida"), ("detroit", "michigan"), ("atlanta", "georgia"),
    ("portland", "oregon"),
]
FAMILY = [
    ("boy", "girl"), ("brother", "sister"), ("father", "mother"),
    ("king", "queen"), ("man", "woman"), ("son", "daughter"),
    ("husband", "wife"), ("uncle", "aunt"), ("nephew", "niece"),
    ("prince", "princess"),
]
CURRENCY = [
    ("japan", "yen"), ("russia", "ruble"), ("india", "rupee"),
    ("mexico", "peso"), ("europe", "euro"), ("korea", "won"),
    ("brazil", "real"), ("denmark", "krone"), ("vietnam", "dong"),
    ("nigeria", "naira"),
]

# token = lemma/POS/head/relation; {A} and {B} are the two related words
CAPITAL_TEMPLATES = [
    "{A}/NP/2/nsubj is/VBZ/0/root the/DT/4/det capital/NN/2/attr of/IN/4/prep {B}/NP/5/pobj ./SENT/2/punct",
    "the/DT/2/det capital/NN/5/nsubj of/IN/2/prep {B}/NP/3/pobj is/VBZ/0/root {A}/NP/5/attr ./SENT/5/punct",
    "{A}/NP/8/nsubj ,/,/1/punct the/DT/4/det capital/NN/1/appos of/IN/4/prep {B}/NP/5/pobj ,/,/1/punct is/VBZ/0/root a/DT/11/det large/JJ/11/amod city/NN/8/attr ./SENT/8/punct",
    "many/JJ/2/amod tourists/NNS/3/nsubj visit/VBP/0/root {A}/NP/3/dobj in/IN/3/prep {B}/NP/5/pobj ./SENT/3/punct",
    "the/DT/2/det government/NN/5/nsubj of/IN/2/prep {B}/NP/3/pobj sits/VBZ/0/root in/IN/5/prep {A}/NP/6/pobj ./SENT/5/punct",
]
CITY_TEMPLATES = [
    "{A}/NP/2/nsubj is/VBZ/0/root a/DT/4/det city/NN/2/attr in/IN/4/prep {B}/NP/5/pobj ./SENT/2/punct",
    "the/DT/2/det city/NN/6/nsubjpass of/IN/2/prep {A}/NP/3/pobj is/VBZ/6/auxpass located/VBN/0/root in/IN/6/prep {B}/NP/7/pobj ./SENT/6/punct",
    "she/PP/2/nsubj moved/VBD/0/root to/TO/2/prep {A}/NP/3/pobj ,/,/4/punct {B}/NP/4/appos ./SENT/2/punct",
]
FAMILY_TEMPLATES = [
    "the/DT/2/det {A}/NN/6/nsubj and/CC/2/cc the/DT/5/det {B}/NN/2/conj are/VBP/0/root here/RB/6/advmod ./SENT/6/punct",
    "a/DT/2/det {B}/NN/3/nsubj is/VBZ/0/root a/DT/6/det female/JJ/6/amod {A}/NN/3/attr ./SENT/3/punct",
    "the/DT/2/det {B}/NN/8/nsubj ,/,/2/punct not/RB/6/neg the/DT/6/det {A}/NN/2/appos ,/,/2/punct came/VBD/0/root ./SENT/8/punct",
    "his/PP$/2/poss {A}/NN/3/nsubj loves/VBZ/0/root her/PP$/5/poss {B}/NN/3/dobj ./SENT/3/punct",
]
CURRENCY_TEMPLATES = [
    "the/DT/2/det currency/NN/5/nsubj of/IN/2/prep {A}/NP/3/pobj is/VBZ/0/root the/DT/7/det {B}/NN/5/attr ./SENT/5/punct",
    "the/DT/2/det {B}/NN/3/nsubj is/VBZ/0/root the/DT/5/det currency/NN/3/attr of/IN/5/prep {A}/NP/6/pobj ./SENT/3/punct",
    "people/NNS/4/nsubj in/IN/1/prep {A}/NP/2/pobj pay/VBP/0/root with/IN/4/prep the/DT/7/det {B}/NN/5/pobj ./SENT/4/punct",
]
BIRD_SENTENCES = [
    "ostrich/NN/2/nsubj is/VBZ/0/root a/DT/5/det large/JJ/5/amod bird/NN/2/attr that/WDT/7/nsubj lives/VBZ/5/rcmod in/IN/7/prep africa/NP/8/pobj ./SENT/2/punct",
    "emu/NN/2/nsubj is/VBZ/0/root a/DT/5/det large/JJ/5/amod bird/NN/2/attr that/WDT/7/nsubj lives/VBZ/5/rcmod in/IN/7/prep australia/NP/8/pobj ./SENT/2/punct",
    "penguin/NN/2/nsubj is/VBZ/0/root a/DT/4/det bird/NN/2/attr ./SENT/2/punct",
    "both/CC/2/preconj ostrich/NN/5/nsubj and/CC/2/cc emu/NN/2/conj are/VBP/0/root large/JJ/7/amod birds/NNS/5/attr ./SENT/5/punct",
]
FILLER_NOUNS = ["dog", "cat", "car", "house", "river", "tree", "book", "road", "table", "garden"]
FILLER_VERBS = ["sees", "likes", "finds", "follows", "needs", "paints"]
FILLER_ADJS = ["old", "small", "red", "quiet", "new"]


def tokens(template, a="", b=""):
    out = []
    for tok in template.replace("{A}", a).replace("{B}", b).split(" "):
        lemma, pos, head, rel = tok.rsplit("/", 3)
        out.append((lemma, pos, int(head), rel))
    check_tree(template, out)
    return out


def check_tree(template, toks):
    roots = [i for i, t in enumerate(toks) if t[2] == 0]
    assert len(roots) == 1, template
    for i in range(len(toks)):
        seen, j = set(), i
        while toks[j][2] != 0:
            assert j not in seen and 1 <= toks[j][2] <= len(toks), template
            seen.add(j)
            j = toks[j][2] - 1


def filler(rng):
    n1, n2 = rng.sample(FILLER_NOUNS, 2)
    verb, adj = rng.choice(FILLER_VERBS), rng.choice(FILLER_ADJS)
    return tokens(
        f"the/DT/3/det {adj}/JJ/3/amod {n1}/NN/4/nsubj {verb}/VBZ/0/root "
        f"the/DT/6/det {n2}/NN/4/dobj ./SENT/4/punct"
    )


def surface(i, lemma, pos):
    return lemma.capitalize() if i == 0 or pos == "NP" else lemma


def main():
    rng = random.Random(SEED)
    sentences = []
    groups = [
        (CAPITAL_COMMON + CAPITAL_WORLD, CAPITAL_TEMPLATES),
        (CITY_IN_STATE, CITY_TEMPLATES),
        (FAMILY, FAMILY_TEMPLATES),
        (CURRENCY, CURRENCY_TEMPLATES),
    ]
    for pairs, templates in groups:
        for a, b in pairs:
            for template in templates:
                for _ in range(REPEATS):
                    sentences.append(tokens(template, a, b))
    for s in BIRD_SENTENCES:
        for _ in range(REPEATS * 2):
            sentences.append(tokens(s))
    for _ in range(FILLERS):
        sentences.append(filler(rng))
    rng.shuffle(sentences)

    with open("toy.vert", "w") as vert, open("toy.conll", "w") as conll:
        for s in sentences:
            for i, (lemma, pos, head, rel) in enumerate(s):
                form = surface(i, lemma, pos)
                vert.write(f"{form}\t{lemma}\t{pos}\n")
                conll.write(f"{i + 1}\t{form}\t{lemma}\t{pos[0]}\t{pos}\t_\t{head}\t{rel}\n")
            vert.write("\n")
            conll.write("\n")

    categories = [
        ("capital-common-countries", CAPITAL_COMMON),
        ("capital-world", CAPITAL_WORLD),
        ("city-in-state", CITY_IN_STATE),
        ("family", FAMILY),
        ("currency", CURRENCY),
    ]
    with open("questions.txt", "w") as q:
        for name, pairs in categories:
            q.write(f": {name}\n")
            for a, b in pairs:
                for c, d in pairs:
                    if (a, b) != (c, d) and len({a, b, c, d}) == 4:
                        q.write(f"{a} {b} {c} {d}\n")


if __name__ == "__main__":
    main()
