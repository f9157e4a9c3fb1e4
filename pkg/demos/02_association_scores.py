"""Score n-grams with the six association measures.

Every measure is a function of the observed count O and the expected
count E (corpus size times the product of the component words' marginal
probabilities).  Different measures disagree about what matters: raw
frequency ignores E entirely, MI rewards tiny E, the hypothesis-test
statistics weigh the evidence.
"""

from chancegram import MEASURES, extract, score_table
from chancegram.synth import planted_stream

# synthetic corpus: Zipf background plus planted collocations
stream = planted_stream(n_tokens=30_000, n_planted=40, n_planted_frequent=10, seed=1)
table = extract(stream, 2, min_freq=3)
records = score_table(table)
print(f"{len(records)} bigram types scored\n")

header = f"{'bigram':18s} {'O':>5s} {'E':>9s}" + "".join(f"{m:>11s}" for m in MEASURES)
print(header)


def show(title, rows):
    print(f"-- {title}")
    for r in rows:
        gram = " ".join(stream.vocab.surfaces(r.key))
        cells = f"{gram:18s} {r.observed:5d} {r.expected:9.3f}"
        cells += "".join(f"{r.scores[m]:11.3f}" for m in MEASURES)
        print(cells)
    print()


by_f = sorted(records, key=lambda r: -r.scores["f"])
show("highest raw frequency (frequent words, mostly chance)", by_f[:5])

by_mi = sorted(records, key=lambda r: -r.scores["MI"])
show("highest MI (rare pairs, tiny E)", by_mi[:5])

by_sll = sorted(records, key=lambda r: -r.scores["simple_ll"])
show("highest simple-ll (strong evidence)", by_sll[:5])

# the MI3 correction: an under-expected n-gram must sort at the end of
# the list, so MI3 falls back to plain (negative) MI there
under = [r for r in records if r.observed < r.expected]
if under:
    show("co-occurring less often than expected (MI3 = MI < 0)", under[:3])
