"""Tokenize a corpus and count n-grams over word runs.

Two ingestion paths: plain text (whitespace tokens, letters+apostrophes
are words) and vertical input where every token arrives pre-tagged as
word or non-word.  Punctuation interrupts n-gram windows: no n-gram ever
spans a comma.
"""

from chancegram import count_ngrams, extract, ingest_plain

text = """
the cat sat on the mat , and the cat saw the dog .
the dog sat on the mat , and the dog saw the cat .
they didn't care about the 9 mice .
"""

stream = ingest_plain(text)
print(f"{stream.total_tokens} tokens, {stream.word_tokens} words, "
      f"{len(stream.vocab)} distinct surface forms")
print()

for n in (2, 3):
    counts = count_ngrams(stream, n)
    print(f"top {n}-grams:")
    top = sorted(counts.items(), key=lambda kv: -kv[1])[:6]
    for key, count in top:
        print(f"  {' '.join(stream.vocab.surfaces(key))!r:24s} {count}")
    print()

# note the interruption rule: "mat and" never appears because a comma
# sits between them in the running text
key = (stream.vocab.id_of("mat"), stream.vocab.id_of("and"))
print("count('mat and') =", count_ngrams(stream, 2).get(key, 0))

# thresholding drops unreliable rare n-grams (counts below 3)
table = extract(stream, 2, min_freq=3)
print(f"{len(table.entries)} bigram types appear at least 3 times:")
for key, count in table.entries.items():
    print(f"  {' '.join(stream.vocab.surfaces(key))!r:24s} {count}")
